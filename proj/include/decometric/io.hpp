// io.hpp - JSON configuration ingestion, result serialization and CSV formatting
//
// Config document:
//   { "bath":  {"alpha": real?, "kappa": real, "temperature": real?},
//     "atoms": {"lattice": {"kind": "square2d"|"linear", "nx": int, "ny": int?, "spacing": real}
//               | "explicit": [{"pos": [x, y, z], "dipole": [ux, uy, uz]}, ...]},
//     "selected": [int, ...]? }
// Unknown keys are rejected. Defaults: alpha = 1/137.06, temperature = 0, ny = nx for
// square2d, all atoms selected. Lattice atoms carry dipoles along +z.

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "decometric/ensemble.hpp"
#include "decometric/errors.hpp"
#include "decometric/metric.hpp"
#include "decometric/model.hpp"

namespace decometric {

using json = nlohmann::json;

struct Config {
    BathParams bath;
    AtomConfig atoms;
    std::optional<LatticeSpec> lattice; // set for lattice-generated geometries
    std::vector<std::size_t> selected;  // as written; empty means all atoms
};

namespace detail {

struct TextPos {
    std::size_t line{0};
    std::size_t column{0};
};

inline TextPos text_pos(std::string_view text, std::size_t offset) {
    TextPos p{1, 1};
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++p.line;
            p.column = 1;
        } else {
            ++p.column;
        }
    }
    return p;
}

// Finds where a JSON pointer lands in already-validated JSON text. Object members resolve
// to their key; a missing member resolves to the deepest enclosing value that exists.
class PointerLocator {
public:
    explicit PointerLocator(std::string_view text) : s_(text) {}

    std::size_t locate(const std::vector<std::string>& path) {
        pos_ = 0;
        best_ = 0;
        skip_ws();
        best_ = pos_;
        descend(path, 0);
        return best_;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\n' || s_[pos_] == '\t' || s_[pos_] == '\r'))
            ++pos_;
    }
    std::string read_string() {
        std::string out;
        ++pos_; // opening quote
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\') ++pos_;
            if (pos_ < s_.size()) out += s_[pos_++];
        }
        ++pos_;
        return out;
    }
    void skip_value() {
        skip_ws();
        if (pos_ >= s_.size()) return;
        const char c = s_[pos_];
        if (c == '"') {
            read_string();
        } else if (c == '{' || c == '[') {
            int depth = 0;
            while (pos_ < s_.size()) {
                const char d = s_[pos_];
                if (d == '"') {
                    read_string();
                    continue;
                }
                if (d == '{' || d == '[') ++depth;
                if (d == '}' || d == ']') --depth;
                ++pos_;
                if (depth == 0) break;
            }
        } else {
            while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}' && s_[pos_] != ']' && s_[pos_] != ' ' &&
                   s_[pos_] != '\n' && s_[pos_] != '\t' && s_[pos_] != '\r')
                ++pos_;
        }
    }
    void descend(const std::vector<std::string>& path, std::size_t depth) {
        if (depth == path.size() || pos_ >= s_.size()) return;
        if (s_[pos_] == '{') {
            ++pos_;
            for (;;) {
                skip_ws();
                if (pos_ >= s_.size() || s_[pos_] != '"') return;
                const std::size_t key_pos = pos_;
                const std::string key = read_string();
                skip_ws();
                ++pos_; // ':'
                skip_ws();
                if (key == path[depth]) {
                    best_ = key_pos;
                    descend(path, depth + 1);
                    return;
                }
                skip_value();
                skip_ws();
                if (pos_ >= s_.size() || s_[pos_] != ',') return;
                ++pos_;
            }
        }
        if (s_[pos_] == '[') {
            std::size_t want = 0;
            const auto& tok = path[depth];
            if (std::from_chars(tok.data(), tok.data() + tok.size(), want).ec != std::errc{}) return;
            ++pos_;
            for (std::size_t i = 0;; ++i) {
                skip_ws();
                if (pos_ >= s_.size() || s_[pos_] == ']') return;
                if (i == want) {
                    best_ = pos_;
                    descend(path, depth + 1);
                    return;
                }
                skip_value();
                skip_ws();
                if (pos_ >= s_.size() || s_[pos_] != ',') return;
                ++pos_;
            }
        }
    }

    std::string_view s_;
    std::size_t pos_{0};
    std::size_t best_{0};
};

class ConfigReader {
public:
    explicit ConfigReader(std::string_view text) : text_(text) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
        std::string pointer;
        for (const auto& p : path) pointer += "/" + p;
        const auto at = text_pos(text_, PointerLocator(text_).locate(path));
        throw ConfigError(pointer.empty() ? "/" : pointer, what, at.line, at.column);
    }

    void only_keys(const json& obj, const std::vector<std::string>& path,
                   std::initializer_list<std::string_view> allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        for (const auto& item : obj.items()) {
            bool ok = false;
            for (auto a : allowed) ok = ok || item.key() == a;
            if (!ok) {
                auto p = path;
                p.push_back(item.key());
                fail(p, "unknown key '" + item.key() + "'");
            }
        }
    }

    double real(const json& obj, const std::vector<std::string>& path, const std::string& key) const {
        auto p = path;
        p.push_back(key);
        if (!obj.contains(key)) fail(path, "missing required field '" + key + "'");
        const auto& v = obj.at(key);
        if (!v.is_number()) fail(p, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(p, "expected a finite number");
        return x;
    }

    long long integer(const json& v, const std::vector<std::string>& path) const {
        if (!v.is_number_integer()) fail(path, "expected an integer");
        if (v.is_number_unsigned() && v.get<unsigned long long>() > 1000000000ULL) fail(path, "integer out of range");
        return v.get<long long>();
    }

    Vec3 vec3(const json& v, const std::vector<std::string>& path) const {
        if (!v.is_array() || v.size() != 3) fail(path, "expected an array of three numbers");
        Vec3 out;
        for (std::size_t i = 0; i < 3; ++i) {
            if (!v[i].is_number()) {
                auto p = path;
                p.push_back(std::to_string(i));
                fail(p, "expected a number");
            }
            out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
        }
        return out;
    }

    Config read(const json& root) const {
        only_keys(root, {}, {"bath", "atoms", "selected"});
        if (!root.contains("bath")) fail({}, "missing required field 'bath'");
        if (!root.contains("atoms")) fail({}, "missing required field 'atoms'");

        const auto& jb = root.at("bath");
        only_keys(jb, {"bath"}, {"alpha", "kappa", "temperature"});
        BathParams bath;
        bath.kappa = real(jb, {"bath"}, "kappa");
        if (!(bath.kappa > 0.0)) fail({"bath", "kappa"}, "kappa must be positive");
        if (jb.contains("alpha")) bath.alpha = real(jb, {"bath"}, "alpha");
        if (jb.contains("temperature")) {
            bath.theta_T = real(jb, {"bath"}, "temperature");
            if (bath.theta_T < 0.0) fail({"bath", "temperature"}, "temperature must be non-negative");
        }

        const auto& ja = root.at("atoms");
        only_keys(ja, {"atoms"}, {"lattice", "explicit"});
        if (ja.contains("lattice") == ja.contains("explicit"))
            fail({"atoms"}, "exactly one of 'lattice' or 'explicit' is required");

        std::vector<std::size_t> selected;
        if (root.contains("selected")) {
            const auto& js = root.at("selected");
            if (!js.is_array() || js.empty()) fail({"selected"}, "expected a non-empty array of atom indices");
            for (std::size_t i = 0; i < js.size(); ++i) {
                const auto v = integer(js[i], {"selected", std::to_string(i)});
                if (v < 0) fail({"selected", std::to_string(i)}, "atom index must be non-negative");
                selected.push_back(static_cast<std::size_t>(v));
            }
        }

        std::optional<LatticeSpec> lattice;
        std::vector<Vec3> pos, dip;
        if (ja.contains("lattice")) {
            const std::vector<std::string> lp{"atoms", "lattice"};
            const auto& jl = ja.at("lattice");
            only_keys(jl, lp, {"kind", "nx", "ny", "spacing"});
            LatticeSpec spec;
            if (!jl.contains("kind")) fail(lp, "missing required field 'kind'");
            const auto& kind = jl.at("kind");
            if (kind == "square2d") {
                spec.kind = LatticeKind::square2d;
            } else if (kind == "linear") {
                spec.kind = LatticeKind::linear;
            } else {
                fail({"atoms", "lattice", "kind"}, "kind must be \"square2d\" or \"linear\"");
            }
            if (!jl.contains("nx")) fail(lp, "missing required field 'nx'");
            const auto nx = integer(jl.at("nx"), {"atoms", "lattice", "nx"});
            if (nx < 1) fail({"atoms", "lattice", "nx"}, "nx must be positive");
            spec.nx = static_cast<int>(nx);
            spec.ny = spec.nx;
            if (jl.contains("ny")) {
                if (spec.kind == LatticeKind::linear) fail({"atoms", "lattice", "ny"}, "ny is not used by linear lattices");
                const auto ny = integer(jl.at("ny"), {"atoms", "lattice", "ny"});
                if (ny < 1) fail({"atoms", "lattice", "ny"}, "ny must be positive");
                spec.ny = static_cast<int>(ny);
            }
            if (spec.kind == LatticeKind::linear) spec.ny = 1;
            spec.spacing = real(jl, lp, "spacing");
            if (!(spec.spacing > 0.0)) fail({"atoms", "lattice", "spacing"}, "spacing must be positive");
            if (spec.atom_count() > 100000) fail(lp, "lattice has too many atoms");
            const auto cfg = build_config(spec);
            pos = cfg.positions();
            dip = cfg.dipoles();
            lattice = spec;
        } else {
            const auto& je = ja.at("explicit");
            if (!je.is_array() || je.empty()) fail({"atoms", "explicit"}, "expected a non-empty array of atoms");
            for (std::size_t i = 0; i < je.size(); ++i) {
                const std::vector<std::string> ap{"atoms", "explicit", std::to_string(i)};
                only_keys(je[i], ap, {"pos", "dipole"});
                for (const char* key : {"pos", "dipole"})
                    if (!je[i].contains(key)) fail(ap, std::string("missing required field '") + key + "'");
                auto pp = ap, dp = ap;
                pp.push_back("pos");
                dp.push_back("dipole");
                pos.push_back(vec3(je[i].at("pos"), pp));
                dip.push_back(vec3(je[i].at("dipole"), dp));
                if (std::abs(dip.back().norm() - 1.0) > 1e-12) fail(dp, "dipole must be a unit vector (to 1e-12)");
            }
        }
        for (std::size_t i = 0; i < selected.size(); ++i) {
            if (selected[i] >= pos.size())
                fail({"selected", std::to_string(i)}, "atom index " + std::to_string(selected[i]) + " out of range");
            for (std::size_t j = 0; j < i; ++j)
                if (selected[j] == selected[i])
                    fail({"selected", std::to_string(i)}, "atom index " + std::to_string(selected[i]) + " repeated");
        }
        return Config{bath, AtomConfig(std::move(pos), std::move(dip), selected), lattice, selected};
    }

private:
    std::string_view text_;
};

} // namespace detail

/// Parses a configuration document. Throws ConfigError with line, column and JSON
/// pointer of the offending field.
inline Config parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto at = detail::text_pos(text, e.byte == 0 ? 0 : e.byte - 1);
        std::string what = e.what();
        if (const auto c = what.find(": "); c != std::string::npos) what = what.substr(c + 2);
        throw ConfigError("", what, at.line, at.column);
    }
    return detail::ConfigReader(text).read(root);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Config load_config(const std::string& path) { return parse_config(read_file(path)); }

/// Same lattice with a different spacing, keeping bath and selection.
inline Config with_spacing(const Config& cfg, double spacing) {
    if (!cfg.lattice) throw ConfigError("/atoms", "spacing sweeps need a lattice geometry");
    LatticeSpec spec = *cfg.lattice;
    spec.spacing = spacing;
    const auto atoms = build_config(spec);
    return Config{cfg.bath, AtomConfig(atoms.positions(), atoms.dipoles(), cfg.selected), spec, cfg.selected};
}

/// Explicit-form document describing the same atoms. Doubles are written in shortest
/// round-trip form, so parse_config(to_json(c).dump()) reproduces positions bit-exactly.
inline json to_json(const Config& cfg) {
    json doc;
    doc["bath"] = {{"alpha", cfg.bath.alpha}, {"kappa", cfg.bath.kappa}, {"temperature", cfg.bath.theta_T}};
    json atoms = json::array();
    for (std::size_t i = 0; i < cfg.atoms.size(); ++i) {
        const auto& p = cfg.atoms.positions()[i];
        const auto& u = cfg.atoms.dipoles()[i];
        atoms.push_back({{"pos", {p.x(), p.y(), p.z()}}, {"dipole", {u.x(), u.y(), u.z()}}});
    }
    doc["atoms"] = {{"explicit", atoms}};
    if (!cfg.selected.empty()) doc["selected"] = cfg.selected;
    return doc;
}

inline json to_json(const MetricTensor& m) {
    json entries = json::array();
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t j = 0; j < m.n(); ++j) entries.push_back(m(i, j));
    return {{"t", m.time()}, {"n", m.n()}, {"entries", entries}, {"includes_indirect", m.includes_indirect()}};
}

inline MetricTensor metric_from_json(const json& doc) {
    const auto n = doc.at("n").get<std::size_t>();
    const auto& e = doc.at("entries");
    if (e.size() != n * n) throw std::invalid_argument("metric tensor: entries must have n*n values");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e.at(i * n + j).get<double>();
    return MetricTensor(doc.at("t").get<double>(), std::move(m), doc.at("includes_indirect").get<bool>());
}

inline json to_json(const DecoStats& st) {
    json hist = json::array();
    for (const auto& b : st.histogram) hist.push_back({{"bin_lo", b.lo}, {"bin_hi", b.hi}, {"weight", b.weight}});
    return {{"n_pairs", st.n_pairs}, {"pair_semantics", "unordered codeword pairs"},
            {"min", st.min},         {"max", st.max},
            {"mean", st.mean},       {"stddev", st.stddev},
            {"histogram", hist}};
}

/// 17 significant digits, '.' decimal point.
inline std::string format_real(double x) {
    std::array<char, 40> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

/// Minimal CSV emitter: a header row, then rows of numbers or plain tokens.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header) : out_(out) {
        bool first = true;
        for (auto h : header) {
            out_ << (first ? "" : ",") << h;
            first = false;
        }
        out_ << '\n';
    }

    template <class... Ts>
    void row(const Ts&... values) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
        out_ << '\n';
    }

private:
    static std::string cell(double x) { return format_real(x); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    template <class I>
        requires std::is_integral_v<I>
    static std::string cell(I i) { return std::to_string(i); }

    std::ostream& out_;
};

} // namespace decometric
