#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "decometric/io.hpp"

namespace dm = decometric;
using dm::Vec3;

namespace {

dm::ConfigError parse_error(const std::string& text) {
    try {
        dm::parse_config(text);
    } catch (const dm::ConfigError& e) {
        return e;
    }
    ADD_FAILURE() << "no ConfigError for: " << text;
    return dm::ConfigError("", "");
}

} // namespace

TEST(ParseConfig, LatticeWithDefaults) {
    const auto c = dm::parse_config(R"({"bath": {"kappa": 0.01},
        "atoms": {"lattice": {"kind": "square2d", "nx": 3, "spacing": 580}}})");
    EXPECT_EQ(c.bath.alpha, 1.0 / 137.06);
    EXPECT_EQ(c.bath.theta_T, 0.0);
    EXPECT_EQ(c.atoms.size(), 9u);
    ASSERT_TRUE(c.lattice.has_value());
    EXPECT_EQ(c.lattice->ny, 3);
    EXPECT_EQ(c.atoms.positions()[8], Vec3(1160, 1160, 0));
}

TEST(ParseConfig, ExplicitWithSelection) {
    const auto c = dm::parse_config(R"({"bath": {"kappa": 0.1, "alpha": 6.5, "temperature": 0.25},
        "atoms": {"explicit": [{"pos": [0,0,0], "dipole": [1,0,0]}, {"pos": [3,4,0], "dipole": [1,0,0]}]},
        "selected": [1]})");
    EXPECT_EQ(c.bath.alpha, 6.5);
    EXPECT_EQ(c.bath.theta_T, 0.25);
    EXPECT_EQ(c.atoms.selected(), (std::vector<std::size_t>{1}));
    EXPECT_EQ(c.atoms.unselected(), (std::vector<std::size_t>{0}));
    EXPECT_FALSE(c.lattice.has_value());
}

TEST(ParseConfig, UnknownKeyReportsLineColumnAndPointer) {
    const auto e = parse_error("{\n  \"bath\": {\"kappa\": 0.01},\n  \"atoms\": {\"lattice\": "
                               "{\"kind\": \"linear\", \"nx\": 2, \"spacing\": 1, \"colour\": 1}}\n}");
    EXPECT_EQ(e.field(), "/atoms/lattice/colour");
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 66u);
    EXPECT_NE(std::string(e.what()).find("config:3:66 at /atoms/lattice/colour"), std::string::npos) << e.what();
}

TEST(ParseConfig, SchemaViolations) {
    EXPECT_EQ(parse_error(R"({"atoms": {"lattice": {"kind": "linear", "nx": 1, "spacing": 1}}})").field(), "/");
    EXPECT_EQ(parse_error(R"({"bath": {"kappa": -1}, "atoms": {"lattice": {"kind": "linear", "nx": 1, "spacing": 1}}})")
                  .field(),
              "/bath/kappa");
    EXPECT_EQ(parse_error(R"({"bath": {"kappa": 1}, "atoms": {"lattice": {"kind": "hex", "nx": 1, "spacing": 1}}})")
                  .field(),
              "/atoms/lattice/kind");
    EXPECT_EQ(parse_error(R"({"bath": {"kappa": 1}, "atoms": {"lattice": {"kind": "linear", "nx": 1.5, "spacing": 1}}})")
                  .field(),
              "/atoms/lattice/nx");
    EXPECT_EQ(parse_error(R"({"bath": {"kappa": 1}, "atoms": {}})").field(), "/atoms");
    EXPECT_EQ(parse_error(R"({"bath": {"kappa": 1}, "atoms": {"explicit": [{"pos": [0,0,0], "dipole": [0,0,2]}]}})")
                  .field(),
              "/atoms/explicit/0/dipole");
    EXPECT_EQ(parse_error(R"({"bath": {"kappa": 1}, "atoms": {"explicit": [{"pos": [0,"x",0], "dipole": [0,0,1]}]}})")
                  .field(),
              "/atoms/explicit/0/pos/1");
    EXPECT_EQ(parse_error(R"({"bath": {"kappa": 1}, "atoms": {"lattice": {"kind": "linear", "nx": 2, "spacing": 1}},
                             "selected": [0, 2]})")
                  .field(),
              "/selected/1");
    EXPECT_EQ(parse_error(R"({"bath": {"kappa": 1}, "atoms": {"lattice": {"kind": "linear", "nx": 2, "ny": 2, "spacing": 1}}})")
                  .field(),
              "/atoms/lattice/ny");
}

TEST(ParseConfig, SyntaxErrorPosition) {
    const auto e = parse_error("{\n  \"bath\": {\"kappa\": 0.01,}\n}");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 20u);
}

TEST(ParseConfig, RoundTripIsBitExact) {
    const dm::AtomConfig atoms({Vec3(0.1, 1.0 / 3.0, -2e-17), Vec3(1e300, std::nextafter(5.0, 6.0), 7.25)},
                               {Vec3(0.6, 0.8, 0.0), Vec3(0.0, 0.0, -1.0)}, {1});
    const dm::Config c{{0.0072973525693, 0.0123, 0.5}, atoms, std::nullopt, {1}};
    const auto back = dm::parse_config(dm::to_json(c).dump());
    ASSERT_EQ(back.atoms.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back.atoms.positions()[i], atoms.positions()[i]);
        EXPECT_EQ(back.atoms.dipoles()[i], atoms.dipoles()[i]);
    }
    EXPECT_EQ(back.atoms.selected(), atoms.selected());
    EXPECT_EQ(back.bath.alpha, c.bath.alpha);
    EXPECT_EQ(back.bath.kappa, c.bath.kappa);
    EXPECT_EQ(back.bath.theta_T, c.bath.theta_T);
}

TEST(WithSpacing, KeepsSelectionAndBath) {
    const auto c = dm::parse_config(R"({"bath": {"kappa": 0.02},
        "atoms": {"lattice": {"kind": "linear", "nx": 3, "spacing": 10}}, "selected": [0, 2]})");
    const auto d = dm::with_spacing(c, 40.0);
    EXPECT_EQ(d.atoms.positions()[2], Vec3(80, 0, 0));
    EXPECT_EQ(d.atoms.selected(), c.atoms.selected());
    EXPECT_EQ(d.bath.kappa, 0.02);
}

TEST(Serialization, MetricTensorJson) {
    Eigen::MatrixXd m(2, 2);
    m << 1.5, 0.25, 0.25, 2.0;
    const dm::MetricTensor mt(200.0, m, true);
    const auto j = dm::to_json(mt);
    EXPECT_EQ(j.at("t"), 200.0);
    EXPECT_EQ(j.at("n"), 2);
    EXPECT_EQ(j.at("entries"), dm::json::array({1.5, 0.25, 0.25, 2.0}));
    EXPECT_EQ(j.at("includes_indirect"), true);
    const auto back = dm::metric_from_json(j);
    EXPECT_EQ(back.entries(), mt.entries());
}

TEST(Csv, SeventeenSignificantDigits) {
    EXPECT_EQ(dm::format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(dm::format_real(2.0), "2");
    EXPECT_EQ(std::stod(dm::format_real(1.0 / 3.0)), 1.0 / 3.0);
    std::ostringstream os;
    dm::CsvWriter w(os, {"a", "b", "c"});
    w.row(1, 0.5, "x");
    EXPECT_EQ(os.str(), "a,b,c\n1,0.5,x\n");
}
