#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "decometric/model.hpp"

namespace dm = decometric;
using dm::Vec3;

TEST(BuildConfig, SquareLatticeLayout) {
    const auto cfg = dm::build_config({dm::LatticeKind::square2d, 3, 3, 580.0});
    ASSERT_EQ(cfg.size(), 9u);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            const auto& p = cfg.positions()[static_cast<std::size_t>(j * 3 + i)];
            EXPECT_EQ(p, Vec3(i * 580.0, j * 580.0, 0.0));
        }
    for (const auto& u : cfg.dipoles()) EXPECT_EQ(u, Vec3::UnitZ());
    EXPECT_EQ(cfg.n_selected(), 9u);
    EXPECT_TRUE(cfg.unselected().empty());
}

TEST(BuildConfig, CountsAndSingleAtom) {
    EXPECT_EQ(dm::build_config({dm::LatticeKind::square2d, 3, 4, 100.0}).size(), 12u);
    const auto one = dm::build_config({dm::LatticeKind::linear, 1, 7, 5.0});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.positions()[0], Vec3::Zero());
}

TEST(BuildConfig, RejectsInvalidSpecs) {
    EXPECT_THROW(dm::build_config({dm::LatticeKind::square2d, 0, 3, 1.0}), std::invalid_argument);
    EXPECT_THROW(dm::build_config({dm::LatticeKind::square2d, 3, 0, 1.0}), std::invalid_argument);
    EXPECT_THROW(dm::build_config({dm::LatticeKind::linear, 3, 1, 0.0}), std::invalid_argument);
    EXPECT_THROW(dm::build_config({dm::LatticeKind::linear, 3, 1, -2.0}), std::invalid_argument);
}

TEST(AtomConfig, Validation) {
    EXPECT_THROW(dm::AtomConfig({Vec3::Zero()}, {Vec3(0, 0, 1.001)}), std::invalid_argument);
    EXPECT_THROW(dm::AtomConfig({Vec3(NAN, 0, 0)}, {Vec3::UnitZ()}), std::invalid_argument);
    EXPECT_THROW(dm::AtomConfig({Vec3::Zero()}, {Vec3::UnitZ()}, {1}), std::invalid_argument);
    EXPECT_THROW(dm::AtomConfig({Vec3::Zero(), Vec3::UnitX()}, {Vec3::UnitZ(), Vec3::UnitZ()}, {0, 0}),
                 std::invalid_argument);
    EXPECT_THROW(dm::AtomConfig({}, {}), std::invalid_argument);
    // Duplicate positions are allowed.
    const dm::AtomConfig dup({Vec3::Zero(), Vec3::Zero()}, {Vec3::UnitZ(), Vec3::UnitZ()});
    EXPECT_EQ(dup.size(), 2u);
}

TEST(AtomConfig, SelectionSplitsObservedAndTraced) {
    const dm::AtomConfig cfg({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()},
                             {Vec3::UnitZ(), Vec3::UnitZ(), Vec3::UnitZ()}, {2, 0});
    EXPECT_EQ(cfg.selected(), (std::vector<std::size_t>{2, 0}));
    EXPECT_EQ(cfg.unselected(), (std::vector<std::size_t>{1}));
}

TEST(PairGeometry, Examples) {
    const double a = 250.0;
    const dm::AtomConfig cfg({Vec3::Zero(), Vec3(a, 0, 0), Vec3(0, 0, a)},
                             {Vec3::UnitZ(), Vec3::UnitZ(), Vec3::UnitZ()});
    auto g = dm::pair_geometry(cfg, 0, 1);
    EXPECT_EQ(g.r, a);
    EXPECT_NEAR(g.theta, std::numbers::pi / 2, 1e-15);
    g = dm::pair_geometry(cfg, 0, 2);
    EXPECT_EQ(g.r, a);
    EXPECT_NEAR(std::sin(g.theta), 0.0, 1e-15);
    g = dm::pair_geometry(cfg, 1, 1);
    EXPECT_EQ(g.r, 0.0);
    EXPECT_EQ(g.theta, 0.0);
}

TEST(PairGeometry, SymmetricInDistanceAndSquaredTrig) {
    const dm::AtomConfig cfg({Vec3(1, 2, 3), Vec3(-4, 0.5, 7)}, {Vec3::UnitZ(), Vec3::UnitZ()});
    const auto ab = dm::pair_geometry(cfg, 0, 1), ba = dm::pair_geometry(cfg, 1, 0);
    EXPECT_EQ(ab.r, ba.r);
    EXPECT_NEAR(std::pow(std::sin(ab.theta), 2), std::pow(std::sin(ba.theta), 2), 1e-15);
}

TEST(PairGeometry, NonParallelDipolesRejected) {
    const dm::AtomConfig cfg({Vec3::Zero(), Vec3::UnitX()}, {Vec3::UnitZ(), Vec3::UnitX()});
    EXPECT_FALSE(cfg.all_dipoles_parallel());
    EXPECT_THROW(dm::pair_geometry(cfg, 0, 1), std::invalid_argument);
    EXPECT_THROW(dm::pair_geometry(cfg, 0, 5), std::out_of_range);
}

TEST(BathParams, Validation) {
    EXPECT_NO_THROW((dm::BathParams{}.validate()));
    EXPECT_THROW((dm::BathParams{dm::kFineStructure, 0.0, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((dm::BathParams{dm::kFineStructure, 0.01, -1.0}.validate()), std::invalid_argument);
    EXPECT_EQ(dm::BathParams{}.alpha, 1.0 / 137.06);
}
