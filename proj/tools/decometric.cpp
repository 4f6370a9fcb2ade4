// decometric - command-line front end
//
// Exit codes: 0 success, 1 usage, 2 configuration, 3 numerical failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "decometric/decometric.hpp"

namespace dm = decometric;
using dm::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config;
    std::string out;
    unsigned threads{0};
    std::uint64_t seed{0}; // tie-breaking is lexicographic, so the seed never changes results
};

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Loaded configuration plus the raw bytes its digest is computed from.
struct Loaded {
    dm::Config cfg;
    std::string text;
};

Loaded load(const Globals& g) {
    if (g.config.empty()) throw UsageError("--config is required for this command");
    std::string text = dm::read_file(g.config);
    return {dm::parse_config(text), std::move(text)};
}

class Run {
public:
    Run(const Globals& g, std::string command, std::string config_text)
        : g_(g), command_(std::move(command)), digest_(sha256_hex(config_text)) {
        params_["threads"] = g.threads;
        params_["seed"] = g.seed;
        if (!g.config.empty()) params_["config"] = g.config;
    }

    json& params() { return params_; }

    void describe(const dm::Config& cfg) {
        params_["n_atoms"] = cfg.atoms.size();
        params_["n_selected"] = cfg.atoms.n_selected();
        params_["alpha"] = cfg.bath.alpha;
        params_["kappa"] = cfg.bath.kappa;
        params_["temperature"] = cfg.bath.theta_T;
        if (cfg.lattice) params_["lattice_dipole"] = {0.0, 0.0, 1.0}; // default: normal to the lattice plane
    }

    // Writes data to `path` plus a sidecar manifest, or to stdout when path is empty.
    void emit(const std::string& data, const std::string& path) const {
        if (path.empty()) {
            std::cout << data;
            return;
        }
        write_file(path, data);
        const json manifest{{"config_digest", digest_},
                            {"command", command_},
                            {"parameters", params_},
                            {"tool_version", dm::version()},
                            {"timestamp", utc_timestamp()}};
        write_file(path + ".manifest.json", manifest.dump(2) + "\n");
    }

    const std::string& out() const { return g_.out; }

private:
    static void write_file(const std::string& path, const std::string& data) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw UsageError("cannot write '" + path + "'");
        f << data;
        if (!f) throw UsageError("failed writing '" + path + "'");
    }

    const Globals& g_;
    std::string command_;
    std::string digest_;
    json params_ = json::object();
};

struct Range {
    double lo{0.0}, hi{0.0};
    int count{1};
    double at(int i) const { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); }
};

// "lo:hi:count", inclusive, count >= 1.
Range parse_range(const std::string& text, const char* flag) {
    Range r;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.count) || c1 != ':' || c2 != ':' || !in.eof())
        throw UsageError(std::string(flag) + ": expected lo:hi:count, got '" + text + "'");
    if (r.count < 1 || !std::isfinite(r.lo) || !std::isfinite(r.hi) || r.hi < r.lo)
        throw UsageError(std::string(flag) + ": need finite lo <= hi and count >= 1");
    return r;
}

void require_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw UsageError("--t must be a finite non-negative time");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- kernel ---------------------------------------------------------------

struct KernelArgs {
    double t{0.0}, r{0.0}, theta{std::numbers::pi / 2}, kappa{0.01}, temperature{0.0}, alpha{dm::kFineStructure};
    std::string t_range, r_range;
};

dm::KernelValue kernel_value(double t, double r, double theta, const dm::BathParams& bath) {
    return r == 0.0 ? dm::f_diag(t, bath) : dm::f_offdiag(t, r, theta, bath);
}

void cmd_kernel(const Globals& g, const KernelArgs& a) {
    const dm::BathParams bath{a.alpha, a.kappa, a.temperature};
    try {
        bath.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!(a.r >= 0.0)) throw UsageError("--r must be non-negative");
    Run run(g, "kernel", "");
    run.params().update({{"theta", a.theta}, {"kappa", a.kappa}, {"temperature", a.temperature}, {"alpha", a.alpha}});

    if (a.t_range.empty() && a.r_range.empty()) {
        require_time(a.t);
        const auto v = kernel_value(a.t, a.r, a.theta, bath);
        run.params().update({{"t", a.t}, {"r", a.r}});
        std::ostringstream os;
        dm::CsvWriter csv(os, {"t", "r", "theta", "f", "regime"});
        csv.row(a.t, a.r, a.theta, v.value, dm::to_string(v.regime));
        run.emit(os.str(), g.out);
        return;
    }
    if (a.t_range.empty() || a.r_range.empty()) throw UsageError("grid mode needs both --t-range and --r-range");
    const auto tr = parse_range(a.t_range, "--t-range");
    const auto rr = parse_range(a.r_range, "--r-range");
    if (tr.lo < 0.0 || rr.lo < 0.0) throw UsageError("ranges must be non-negative");
    run.params().update({{"t_range", a.t_range}, {"r_range", a.r_range}});

    std::vector<dm::KernelValue> grid(static_cast<std::size_t>(tr.count) * rr.count);
    dm::parallel_chunks(static_cast<std::size_t>(tr.count), g.threads, [&](std::size_t i) {
        for (int j = 0; j < rr.count; ++j)
            grid[i * rr.count + j] = kernel_value(tr.at(static_cast<int>(i)), rr.at(j), a.theta, bath);
    });
    std::ostringstream os;
    dm::CsvWriter csv(os, {"t", "r", "theta", "f", "regime"});
    for (int i = 0; i < tr.count; ++i)
        for (int j = 0; j < rr.count; ++j) {
            const auto& v = grid[static_cast<std::size_t>(i) * rr.count + j];
            csv.row(tr.at(i), rr.at(j), a.theta, v.value, dm::to_string(v.regime));
        }
    run.emit(os.str(), g.out);
}

// ---- dmt ------------------------------------------------------------------

void cmd_dmt(const Globals& g, double t, bool no_indirect) {
    require_time(t);
    const auto in = load(g);
    Run run(g, "dmt", in.text);
    run.describe(in.cfg);
    run.params().update({{"t", t}, {"include_indirect", !no_indirect}});
    const auto m = dm::build_dmt(in.cfg.atoms, in.cfg.bath, t, {!no_indirect, g.threads});
    const auto psd = dm::psd_check(m);
    auto doc = dm::to_json(m);
    doc["trace"] = m.trace();
    doc["d_tot"] = dm::total_decoherence(m);
    doc["min_eigenvalue"] = psd.min_eig;
    doc["psd_ok"] = psd.ok;
    run.emit(dump(doc), g.out);
    if (!g.out.empty())
        std::cout << "trace " << dm::format_real(m.trace()) << "\nd_tot " << dm::format_real(dm::total_decoherence(m))
                  << "\nmin_eigenvalue " << dm::format_real(psd.min_eig) << "\n";
}

// ---- pairs / sweep ----------------------------------------------------------

std::string scatter_csv(const dm::MetricTensor& m, unsigned threads) {
    std::ostringstream os;
    dm::CsvWriter csv(os, {"hamming", "decoherence", "multiplicity"});
    for (const auto& p : dm::decoherence_vs_hamming(m, threads)) csv.row(p.hamming, p.decoherence, p.multiplicity);
    return os.str();
}

void cmd_pairs(const Globals& g, double t, std::size_t bins, const std::string& csv_path, bool identity) {
    require_time(t);
    if (bins == 0) throw UsageError("--bins must be positive");
    const auto in = load(g);
    Run run(g, "pairs", in.text);
    run.describe(in.cfg);
    run.params().update({{"t", t}, {"bins", bins}, {"identity", identity}});
    const std::size_t n = in.cfg.atoms.n_selected();
    const auto m = identity ? dm::MetricTensor(t, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                                            static_cast<Eigen::Index>(n)))
                            : dm::build_dmt(in.cfg.atoms, in.cfg.bath, t, {true, g.threads});
    const auto st = dm::enumerate_stats(m, bins, g.threads);
    auto doc = dm::to_json(st);
    doc["d_tot"] = dm::total_decoherence(m);
    doc["t"] = t;
    doc["n"] = n;
    run.emit(dump(doc), g.out);
    if (!csv_path.empty()) run.emit(scatter_csv(m, g.threads), csv_path);
}

void cmd_sweep(const Globals& g, double t, double lo, double hi, int steps, std::size_t bins) {
    require_time(t);
    if (steps < 1 || !(lo > 0.0) || hi < lo) throw UsageError("sweep: need 0 < spacing-min <= spacing-max, steps >= 1");
    const auto in = load(g);
    if (!in.cfg.lattice) throw dm::ConfigError("/atoms", "sweep requires a lattice geometry");
    Run run(g, "sweep", in.text);
    run.describe(in.cfg);
    run.params().update({{"t", t}, {"spacing_min", lo}, {"spacing_max", hi}, {"steps", steps}});
    const Range spacings{lo, hi, steps};
    std::ostringstream os;
    dm::CsvWriter csv(os, {"spacing", "min", "max", "mean", "stddev"});
    for (int i = 0; i < steps; ++i) {
        const double a = spacings.at(i);
        const auto cfg = dm::with_spacing(in.cfg, a);
        const auto m = dm::build_dmt(cfg.atoms, cfg.bath, t, {true, g.threads});
        const auto st = dm::enumerate_stats(m, bins, g.threads);
        csv.row(a, st.min, st.max, st.mean, st.stddev);
    }
    run.emit(os.str(), g.out);
}

// ---- dfs --------------------------------------------------------------------

void cmd_dfs(const Globals& g, double t, const std::string& mode, std::size_t code_size) {
    require_time(t);
    dm::SearchMode sm;
    if (mode == "exhaustive") {
        sm = dm::SearchMode::exhaustive;
    } else if (mode == "bnb" || mode == "branch_and_bound") {
        sm = dm::SearchMode::branch_and_bound;
    } else {
        throw UsageError("--mode must be exhaustive or bnb");
    }
    const auto in = load(g);
    Run run(g, "dfs", in.text);
    run.describe(in.cfg);
    run.params().update({{"t", t}, {"mode", mode}, {"code_size", code_size}});
    const auto m = dm::build_dmt(in.cfg.atoms, in.cfg.bath, t, {true, g.threads});
    const auto res = dm::min_decoherence(m, sm, g.threads);
    json doc{{"t", t},
             {"mode", mode},
             {"value", res.value},
             {"delta", res.delta.values()},
             {"hamming", res.delta.support()},
             {"nodes", res.nodes}};
    if (code_size != 0) {
        const auto code = dm::select_code(m, code_size, g.threads);
        json words = json::array();
        for (const auto& w : code) words.push_back(w.bits());
        doc["code"] = words;
        doc["code_max_decoherence"] = dm::max_pairwise_decoherence(code, m);
    }
    run.emit(dump(doc), g.out);
}

// ---- exact ------------------------------------------------------------------

void cmd_exact(const Globals& g, double t, bool no_indirect) {
    require_time(t);
    const auto in = load(g);
    Run run(g, "exact", in.text);
    run.describe(in.cfg);
    run.params().update({{"t", t}, {"include_indirect", !no_indirect}});
    const dm::DmtOptions opt{!no_indirect, g.threads};
    const auto rows = dm::quadratic_defects(in.cfg.atoms, in.cfg.bath, t, opt);
    std::ostringstream os;
    dm::CsvWriter csv(os, {"hamming", "one_minus_magnitude", "quadratic_decoherence", "defect"});
    double max_defect = 0.0, max_d = 0.0;
    for (const auto& r : rows) {
        csv.row(r.hamming, r.one_minus_magnitude, r.quadratic_decoherence, r.defect);
        max_defect = std::max(max_defect, r.defect);
        max_d = std::max(max_d, r.quadratic_decoherence);
    }
    run.emit(os.str(), g.out);
    if (!g.out.empty())
        std::cout << "max_defect " << dm::format_real(max_defect) << "\nmax_decoherence " << dm::format_real(max_d)
                  << "\n";
}

// ---- modesum ----------------------------------------------------------------

void cmd_modesum(const Globals& g, double t, double box_L, int n_max) {
    require_time(t);
    const auto in = load(g);
    const auto& cfg = in.cfg.atoms;
    if (!cfg.all_dipoles_parallel()) throw UsageError("modesum comparison needs parallel dipoles");
    const auto grid = n_max > 0 ? dm::ModeGrid{box_L, n_max, in.cfg.bath.kappa}
                                : dm::ModeGrid::covering(box_L, in.cfg.bath.kappa);
    try {
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    Run run(g, "modesum", in.text);
    run.describe(in.cfg);
    run.params().update({{"t", t}, {"box_L", box_L}, {"n_max", grid.n_max}});

    std::vector<dm::AtomPair> pairs;
    const auto& sel = cfg.selected();
    for (std::size_t a = 0; a < sel.size(); ++a)
        for (std::size_t b = a; b < sel.size(); ++b) pairs.push_back({sel[a], sel[b]});
    const double times[] = {t};
    const auto sums = dm::mode_sums(cfg, pairs, times, grid, in.cfg.bath.alpha, in.cfg.bath.theta_T, g.threads);

    std::ostringstream os;
    dm::CsvWriter csv(os, {"i", "j", "r", "theta", "f_modesum", "f_continuum", "phi_modesum", "phi_continuum"});
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto geo = dm::pair_geometry(cfg, pairs[p].i, pairs[p].j);
        const double fc = kernel_value(t, geo.r, geo.theta, in.cfg.bath).value;
        const double pc = dm::phi_kernel(t, geo.r, geo.theta, in.cfg.bath).value;
        csv.row(pairs[p].i, pairs[p].j, geo.r, geo.theta, sums.f[p], fc, sums.phi[p], pc);
    }
    run.emit(os.str(), g.out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decoherence metric of atoms coupled to a common radiation bath"};
    app.set_version_flag("--version", std::string(dm::version()));
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--out", g.out, "output file (stdout when omitted); a .manifest.json sidecar is written next to it");
    app.add_option("--threads", g.threads, "worker threads (0 = hardware concurrency)");
    app.add_option("--seed", g.seed, "accepted for reproducibility records; ties are broken lexicographically");

    KernelArgs ka;
    auto* kernel = app.add_subcommand("kernel", "f(t, r, theta) for one point or a t x r grid");
    kernel->add_option("--t", ka.t, "time in d/c");
    kernel->add_option("--r", ka.r, "separation in d (0 gives f_ii)");
    kernel->add_option("--theta", ka.theta, "angle between dipole and separation")->capture_default_str();
    kernel->add_option("--kappa", ka.kappa, "UV cutoff")->capture_default_str();
    kernel->add_option("--temperature", ka.temperature, "reduced temperature")->capture_default_str();
    kernel->add_option("--alpha", ka.alpha, "coupling constant")->capture_default_str();
    kernel->add_option("--t-range", ka.t_range, "grid times lo:hi:count");
    kernel->add_option("--r-range", ka.r_range, "grid separations lo:hi:count");

    double t = 0.0;
    bool no_indirect = false;
    auto* dmt = app.add_subcommand("dmt", "decoherence metric tensor as JSON");
    dmt->add_option("--t", t, "time in d/c")->required();
    dmt->add_flag("--no-indirect", no_indirect, "omit the traced-atom contribution");

    std::size_t bins = 50;
    std::string csv_path;
    bool identity = false;
    auto* pairs = app.add_subcommand("pairs", "statistics over all codeword pairs");
    pairs->add_option("--t", t, "time in d/c")->required();
    pairs->add_option("--bins", bins, "histogram bins")->capture_default_str();
    pairs->add_option("--csv", csv_path, "per-class (hamming, decoherence, multiplicity) CSV");
    pairs->add_flag("--identity", identity, "replace the tensor by the identity");

    double smin = 0.0, smax = 0.0;
    int steps = 11;
    auto* sweep = app.add_subcommand("sweep", "pair statistics over a range of lattice spacings");
    sweep->add_option("--t", t, "time in d/c")->required();
    sweep->add_option("--spacing-min", smin, "smallest spacing in d")->required();
    sweep->add_option("--spacing-max", smax, "largest spacing in d")->required();
    sweep->add_option("--steps", steps, "number of spacings")->capture_default_str();
    sweep->add_option("--bins", bins, "histogram bins")->capture_default_str();

    std::string mode = "exhaustive";
    std::size_t code_size = 0;
    auto* dfs = app.add_subcommand("dfs", "minimum-decoherence difference vector and greedy code");
    dfs->add_option("--t", t, "time in d/c")->required();
    dfs->add_option("--mode", mode, "exhaustive or bnb")->capture_default_str();
    dfs->add_option("--code-size", code_size, "also select a greedy code of this many words");

    auto* exact = app.add_subcommand("exact", "exact versus quadratic decoherence per difference class");
    exact->add_option("--t", t, "time in d/c")->required();
    exact->add_flag("--no-indirect", no_indirect, "omit the traced-atom term on the quadratic side");

    double box_L = 0.0;
    int n_max = 0;
    auto* modesum = app.add_subcommand("modesum", "discrete mode sums against the continuum kernels");
    modesum->add_option("--t", t, "time in d/c")->required();
    modesum->add_option("--box-L", box_L, "box length in d")->required();
    modesum->add_option("--n-max", n_max, "mode index bound (default: smallest covering the cutoff)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "decometric: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*kernel) cmd_kernel(g, ka);
        if (*dmt) cmd_dmt(g, t, no_indirect);
        if (*pairs) cmd_pairs(g, t, bins, csv_path, identity);
        if (*sweep) cmd_sweep(g, t, smin, smax, steps, bins);
        if (*dfs) cmd_dfs(g, t, mode, code_size);
        if (*exact) cmd_exact(g, t, no_indirect);
        if (*modesum) cmd_modesum(g, t, box_L, n_max);
    } catch (const dm::ConfigError& e) {
        std::cerr << "decometric: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "decometric: " << e.what() << "\n";
        return 1;
    } catch (const dm::NumericError& e) {
        std::cerr << "decometric: " << e.what() << "\n";
        return 3;
    } catch (const std::length_error& e) {
        std::cerr << "decometric: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "decometric: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "decometric: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
