// exact.hpp - Exact coherence ratio rho_{s,s'}(t) / rho_{s,s'}(0) for small clusters
//
// With delta = (s - s') / 2 over the selected atoms,
//     |ratio| = exp(-4 delta^T F delta) * prod_l |cos(2 delta . phi_l)|
// where F holds f_ij between selected atoms and phi_l the couplings phi_il to traced atom l.
// Expanding to second order gives 1 - |ratio| ~ delta^T (4F + 2 Phi) delta, the
// decoherence of the metric module, which is what validate_quadratic checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "decometric/ensemble.hpp"
#include "decometric/kernels.hpp"
#include "decometric/metric.hpp"
#include "decometric/model.hpp"
#include "decometric/summation.hpp"

namespace decometric {

inline constexpr std::size_t kMaxExactAtoms = 12;
inline constexpr std::size_t kMaxValidateAtoms = 8;

/// Kernel values entering the exact ratio at one time.
struct ExactKernels {
    double time{0.0};
    Eigen::MatrixXd f;          // n x n, f_ii on the diagonal
    Eigen::MatrixXd phi;        // n x n, phi_ij between selected atoms (phase only)
    Eigen::MatrixXd phi_traced; // n x (N - n), phi_il to traced atoms
};

inline ExactKernels exact_kernels(const AtomConfig& cfg, const BathParams& bath, double t, unsigned threads = 0) {
    bath.validate();
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("exact: t must be >= 0");
    if (!cfg.all_dipoles_parallel()) throw std::invalid_argument("exact: dipoles must be parallel");
    const auto& sel = cfg.selected();
    const auto& traced = cfg.unselected();
    const auto n = static_cast<Eigen::Index>(sel.size());
    const auto nl = static_cast<Eigen::Index>(traced.size());
    ExactKernels k{t, Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, nl)};
    if (t == 0.0) return k;
    parallel_chunks(sel.size(), threads, [&](std::size_t a) {
        const auto i = static_cast<Eigen::Index>(a);
        for (std::size_t b = a; b < sel.size(); ++b) {
            const auto j = static_cast<Eigen::Index>(b);
            k.f(i, j) = detail::pair_f(cfg, sel[a], sel[b], bath, t).value;
            if (b != a) k.phi(i, j) = detail::pair_phi(cfg, sel[a], sel[b], bath, t).value;
        }
        for (Eigen::Index l = 0; l < nl; ++l)
            k.phi_traced(i, l) = detail::pair_phi(cfg, sel[a], traced[static_cast<std::size_t>(l)], bath, t).value;
    });
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) {
            k.f(i, j) = k.f(j, i);
            k.phi(i, j) = k.phi(j, i);
        }
    return k;
}

struct AmplitudeRatio {
    Codeword sA;
    Codeword sB;
    double magnitude{1.0};
    double phase{0.0};
    double one_minus_magnitude{0.0}; // evaluated without cancellation
};

namespace detail {

// log|ratio| for difference vector delta.
inline double log_magnitude(const ExactKernels& k, const int* delta, std::size_t n) {
    double lg = -4.0 * quad_form(k.f, delta, n);
    for (Eigen::Index l = 0; l < k.phi_traced.cols(); ++l) {
        double x = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (delta[i] != 0) x += delta[i] * k.phi_traced(static_cast<Eigen::Index>(i), l);
        const double s = std::sin(2.0 * x);
        lg += 0.5 * std::log1p(-s * s);
    }
    return lg;
}

} // namespace detail

/// Coherence ratio between pointer states sA and sB. Each negative cosine factor adds
/// pi to the phase, with sign +1 when index(sA) < index(sB) and -1 otherwise, so that
/// swapping the pair negates the phase.
inline AmplitudeRatio amplitude_ratio(const Codeword& sA, const Codeword& sB, const ExactKernels& k) {
    const std::size_t n = static_cast<std::size_t>(k.f.rows());
    if (sA.size() != n || sB.size() != n) throw std::invalid_argument("amplitude_ratio: codeword length mismatch");
    if (n > kMaxExactAtoms) throw std::length_error("amplitude_ratio: at most 12 selected atoms");
    AmplitudeRatio out{sA, sB};
    if (sA == sB) return out;

    const auto delta = DiffVector::between(sA, sB);
    const double lg = detail::log_magnitude(k, delta.values().data(), n);
    out.magnitude = std::exp(lg);
    out.one_minus_magnitude = -std::expm1(lg);

    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            phase += (sA[i] * sA[j] - sB[i] * sB[j]) * k.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    int negatives = 0;
    for (Eigen::Index l = 0; l < k.phi_traced.cols(); ++l) {
        double x = 0.0;
        for (std::size_t i = 0; i < n; ++i) x += delta[i] * k.phi_traced(static_cast<Eigen::Index>(i), l);
        negatives += std::cos(2.0 * x) < 0.0;
    }
    const double orient = sA.index() < sB.index() ? 1.0 : -1.0;
    out.phase = phase + orient * std::numbers::pi * negatives;
    return out;
}

inline AmplitudeRatio amplitude_ratio(const Codeword& sA, const Codeword& sB, const AtomConfig& cfg,
                                      const BathParams& bath, double t) {
    if (cfg.n_selected() > kMaxExactAtoms) throw std::length_error("amplitude_ratio: at most 12 selected atoms");
    return amplitude_ratio(sA, sB, exact_kernels(cfg, bath, t));
}

struct DefectRow {
    DiffVector delta{std::vector<int>{}};
    int hamming{0};
    double one_minus_magnitude{0.0};
    double quadratic_decoherence{0.0};
    double defect{0.0};
};

/// Exact versus quadratic decoherence for every difference class, in class order.
/// opt.include_indirect = false drops the traced-atom term from the quadratic side only.
inline std::vector<DefectRow> quadratic_defects(const AtomConfig& cfg, const BathParams& bath, double t,
                                                const DmtOptions& opt = {}) {
    const std::size_t n = cfg.n_selected();
    detail::check_size(n, kMaxValidateAtoms, "validate_quadratic");
    const auto k = exact_kernels(cfg, bath, t, opt.threads);
    const auto m = build_dmt(cfg, bath, t, opt);
    std::vector<DefectRow> rows;
    rows.reserve(class_count(n));
    detail::visit_classes(n, 0, class_count(n), [&](std::uint64_t, const detail::ClassCursor& cur) {
        DefectRow row{DiffVector(std::vector<int>(cur.delta(), cur.delta() + n))};
        row.hamming = static_cast<int>(cur.support());
        row.one_minus_magnitude = -std::expm1(detail::log_magnitude(k, cur.delta(), n));
        row.quadratic_decoherence = detail::quad_form(m.entries(), cur.delta(), n);
        row.defect = std::abs(row.one_minus_magnitude - row.quadratic_decoherence);
        rows.push_back(std::move(row));
    });
    return rows;
}

struct QuadraticCheck {
    double max_defect{0.0};
    double max_decoherence{0.0};     // quadratic side
    double max_one_minus_magnitude{0.0}; // exact side
};

inline QuadraticCheck validate_quadratic(const AtomConfig& cfg, const BathParams& bath, double t,
                                         const DmtOptions& opt = {}) {
    QuadraticCheck out;
    for (const auto& row : quadratic_defects(cfg, bath, t, opt)) {
        out.max_defect = std::max(out.max_defect, row.defect);
        out.max_decoherence = std::max(out.max_decoherence, row.quadratic_decoherence);
        out.max_one_minus_magnitude = std::max(out.max_one_minus_magnitude, row.one_minus_magnitude);
    }
    return out;
}

} // namespace decometric
