#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "decometric/metric.hpp"
#include "oracles.hpp"

namespace dm = decometric;
using dm::Codeword;
using dm::Vec3;

namespace {

dm::MetricTensor tensor(const Eigen::MatrixXd& m) { return dm::MetricTensor(1.0, m); }

} // namespace

TEST(Codeword, IndexRoundTripAndValidation) {
    for (std::uint64_t i = 0; i < 32; ++i) EXPECT_EQ(Codeword::from_index(i, 5).index(), i);
    EXPECT_EQ(Codeword::from_index(1, 3).bits(), (std::vector<int>{1, -1, -1}));
    EXPECT_THROW(Codeword({1, 0, -1}), std::invalid_argument);
    EXPECT_THROW(Codeword(std::vector<int>{}), std::invalid_argument);
    EXPECT_THROW(dm::DiffVector({2}), std::invalid_argument);
}

TEST(Hamming, Examples) {
    const Codeword a({1, 1, -1}), b({1, -1, 1});
    EXPECT_EQ(dm::hamming(a, a), 0);
    EXPECT_EQ(dm::hamming(a, b), 2);
    const auto w = Codeword::from_index(0, 9);
    EXPECT_EQ(dm::hamming(w, w.flipped()), 9);
}

TEST(Decoherence, Examples) {
    const Codeword a({1, 1, -1}), b({-1, -1, 1});
    EXPECT_EQ(dm::decoherence(a, a, tensor(Eigen::MatrixXd::Ones(3, 3))), 0.0);
    EXPECT_EQ(dm::decoherence(a, b, tensor(Eigen::MatrixXd::Ones(3, 3))), 1.0);
    // Identity tensor gives the Hamming distance.
    const auto id = tensor(Eigen::MatrixXd::Identity(4, 4));
    for (std::uint64_t i = 0; i < 16; ++i)
        for (std::uint64_t j = 0; j < 16; ++j) {
            const auto x = Codeword::from_index(i, 4), y = Codeword::from_index(j, 4);
            EXPECT_EQ(dm::decoherence(x, y, id), dm::hamming(x, y));
        }
    EXPECT_EQ(dm::metric_distance(Codeword::from_index(0, 4), Codeword::from_index(15, 4), id), 2.0);
    EXPECT_THROW(dm::decoherence(a, Codeword({1, 1}), id), std::invalid_argument);
}

TEST(Decoherence, SymmetryAndGlobalFlipAreExact) {
    std::mt19937_64 rng(5);
    const auto m = tensor(oracle::random_psd(5, rng));
    for (std::uint64_t i = 0; i < 32; ++i)
        for (std::uint64_t j = 0; j < 32; ++j) {
            const auto x = Codeword::from_index(i, 5), y = Codeword::from_index(j, 5);
            EXPECT_EQ(dm::decoherence(x, y, m), dm::decoherence(y, x, m));
            EXPECT_EQ(dm::decoherence(x, y, m), dm::decoherence(x.flipped(), y.flipped(), m));
            EXPECT_NEAR(dm::decoherence(x, y, m), oracle::naive_decoherence(m.entries(),
                        Eigen::Map<const Eigen::VectorXi>(x.bits().data(), 5).cast<double>(),
                        Eigen::Map<const Eigen::VectorXi>(y.bits().data(), 5).cast<double>()), 1e-12);
        }
}

TEST(TotalDecoherence, MatchesBruteForceAverage) {
    std::mt19937_64 rng(99);
    for (std::size_t n = 1; n <= 4; ++n)
        for (int rep = 0; rep < 5; ++rep) {
            const auto m = oracle::random_psd(n, rng);
            dm::CompensatedSum sum;
            std::uint64_t count = 0;
            oracle::for_each_word_pair(n, [&](auto i, auto j, const auto& a, const auto& b) {
                if (i == j) return;
                sum.add(oracle::naive_decoherence(m, a, b));
                ++count;
            });
            const double avg = sum.value() / static_cast<double>(count);
            EXPECT_NEAR(dm::total_decoherence(tensor(m)), avg, 1e-12 * avg) << n;
        }
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.5;
    EXPECT_DOUBLE_EQ(dm::total_decoherence(tensor(d)), 2.0 / 3.0 * 4.5);
    EXPECT_EQ(dm::total_decoherence(tensor(Eigen::MatrixXd::Constant(1, 1, 0.7))), 0.7);
}

TEST(PsdCheck, Examples) {
    const auto z = dm::psd_check(tensor(Eigen::MatrixXd::Zero(3, 3)));
    EXPECT_EQ(z.min_eig, 0.0);
    EXPECT_TRUE(z.ok);
    const auto i = dm::psd_check(tensor(Eigen::MatrixXd::Identity(3, 3)));
    EXPECT_NEAR(i.min_eig, 1.0, 1e-15);
    EXPECT_TRUE(i.ok);
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    EXPECT_FALSE(dm::psd_check(tensor(bad)).ok);
}

TEST(MetricTensor, RejectsAsymmetricOrNegativeTime) {
    Eigen::MatrixXd m(2, 2);
    m << 1, 2, 2.0000001, 1;
    EXPECT_THROW(tensor(m), std::invalid_argument);
    EXPECT_THROW(dm::MetricTensor(-1.0, Eigen::MatrixXd::Identity(2, 2)), std::invalid_argument);
    EXPECT_THROW(dm::MetricTensor(1.0, Eigen::MatrixXd(2, 3)), std::invalid_argument);
}

TEST(BuildDmt, ZeroTimeAndDiagonal) {
    const auto cfg = dm::build_config({dm::LatticeKind::square2d, 3, 3, 580.0});
    const dm::BathParams bath{};
    const auto z = dm::build_dmt(cfg, bath, 0.0);
    EXPECT_TRUE(z.entries().isZero(0.0));
    const auto m = dm::build_dmt(cfg, bath, 200.0);
    EXPECT_FALSE(m.includes_indirect());
    const double fii = dm::f_diag(200.0, bath).value;
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(m(i, i), 4.0 * fii);
    EXPECT_EQ(m(0, 1), 4.0 * dm::f_offdiag(200.0, 580.0, std::numbers::pi / 2, bath).value);
    EXPECT_NEAR(dm::total_decoherence(m), m.trace() / (2.0 - std::pow(2.0, -8.0)), 0.0);
    EXPECT_TRUE(dm::psd_check(m).ok);
}

TEST(BuildDmt, CoincidentAtomsGiveAllEqualEntries) {
    const dm::AtomConfig cfg({Vec3::Zero(), Vec3::Zero()}, {Vec3::UnitZ(), Vec3::UnitZ()});
    const dm::BathParams bath{};
    const auto m = dm::build_dmt(cfg, bath, 300.0);
    const double v = 4.0 * dm::f_diag(300.0, bath).value;
    EXPECT_EQ(m.entries(), Eigen::MatrixXd::Constant(2, 2, v));
    EXPECT_EQ(dm::decoherence(Codeword({1, -1}), Codeword({-1, 1}), m), 0.0);
    const auto single = dm::build_dmt(dm::AtomConfig({Vec3::Zero()}, {Vec3::UnitZ()}), bath, 300.0);
    EXPECT_EQ(single(0, 0), v);
}

TEST(BuildDmt, IndirectTermFromTracedAtoms) {
    const dm::AtomConfig cfg({Vec3::Zero(), Vec3(400, 0, 0), Vec3(0, 900, 0)},
                             {Vec3::UnitZ(), Vec3::UnitZ(), Vec3::UnitZ()}, {0, 1});
    const dm::BathParams bath{};
    const double t = 500.0;
    const auto with = dm::build_dmt(cfg, bath, t);
    const auto without = dm::build_dmt(cfg, bath, t, {false, 0});
    EXPECT_TRUE(with.includes_indirect());
    EXPECT_FALSE(without.includes_indirect());
    const double p0 = dm::phi_kernel(t, 900.0, std::numbers::pi / 2, bath).value;
    const double p1 = dm::phi_kernel(t, std::hypot(400.0, 900.0), std::numbers::pi / 2, bath).value;
    EXPECT_NEAR(with(0, 0) - without(0, 0), 2.0 * p0 * p0, 1e-12 * std::abs(with(0, 0)));
    EXPECT_NEAR(with(0, 1) - without(0, 1), 2.0 * p0 * p1, 1e-12 * std::abs(with(0, 0)));
    EXPECT_EQ(with(0, 1), with(1, 0));
}

TEST(BuildDmt, EqualHammingDifferentDecoherence) {
    // Parallel and antiparallel flips of two neighbours at 580d.
    const auto cfg = dm::build_config({dm::LatticeKind::square2d, 3, 3, 580.0});
    const auto m = dm::build_dmt(cfg, dm::BathParams{}, 200.0);
    const auto base = Codeword::from_index(0, 9);
    auto par = base.bits(), anti = base.bits();
    par[0] = par[1] = 1;
    anti[0] = 1;
    anti[1] = -1;
    const auto other = base.bits();
    auto anti_ref = other;
    anti_ref[1] = 1; // differs from anti in positions 0 and 1 with opposite signs
    const double dpar = dm::decoherence(Codeword(par), base, m);
    const double danti = dm::decoherence(Codeword(anti), Codeword(anti_ref), m);
    EXPECT_EQ(dm::hamming(Codeword(par), base), 2);
    EXPECT_EQ(dm::hamming(Codeword(anti), Codeword(anti_ref)), 2);
    EXPECT_GT(std::abs(dpar - danti), 1e-3 * dpar);
}

TEST(BuildDmt, RejectsNonParallelDipoles) {
    const dm::AtomConfig cfg({Vec3::Zero(), Vec3::UnitX()}, {Vec3::UnitZ(), Vec3::UnitY()});
    EXPECT_THROW(dm::build_dmt(cfg, dm::BathParams{}, 1.0), std::invalid_argument);
    EXPECT_THROW(dm::build_dmt(dm::build_config({dm::LatticeKind::linear, 2, 1, 5.0}), dm::BathParams{}, -1.0),
                 std::invalid_argument);
}

TEST(BuildDmt, ThreadCountDoesNotChangeEntries) {
    const auto cfg = dm::build_config({dm::LatticeKind::square2d, 3, 3, 250.0});
    const dm::AtomConfig traced(cfg.positions(), cfg.dipoles(), {0, 4, 8});
    const auto a = dm::build_dmt(traced, dm::BathParams{}, 300.0, {true, 1});
    const auto b = dm::build_dmt(traced, dm::BathParams{}, 300.0, {true, 4});
    EXPECT_EQ(a.entries(), b.entries());
}
