// metric.hpp - Decoherence metric tensor M(t), codeword decoherences and the induced pseudometric

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "decometric/kernels.hpp"
#include "decometric/model.hpp"
#include "decometric/summation.hpp"

namespace decometric {

/// Real symmetric n x n tensor M(t) over the selected atoms.
class MetricTensor {
public:
    MetricTensor(double time, Eigen::MatrixXd entries, bool includes_indirect = false)
        : time_(time), entries_(std::move(entries)), includes_indirect_(includes_indirect) {
        if (entries_.rows() == 0 || entries_.rows() != entries_.cols())
            throw std::invalid_argument("MetricTensor: entries must be a non-empty square matrix");
        if (!(time_ >= 0.0)) throw std::invalid_argument("MetricTensor: time must be >= 0");
        if (!entries_.allFinite()) throw std::invalid_argument("MetricTensor: entries must be finite");
        for (Eigen::Index i = 0; i < entries_.rows(); ++i)
            for (Eigen::Index j = 0; j < i; ++j)
                if (entries_(i, j) != entries_(j, i)) throw std::invalid_argument("MetricTensor: entries not symmetric");
    }

    double time() const { return time_; }
    std::size_t n() const { return static_cast<std::size_t>(entries_.rows()); }
    const Eigen::MatrixXd& entries() const { return entries_; }
    double operator()(std::size_t i, std::size_t j) const {
        return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    bool includes_indirect() const { return includes_indirect_; }
    double trace() const { return entries_.trace(); }

private:
    double time_;
    Eigen::MatrixXd entries_;
    bool includes_indirect_;
};

/// Word of sigma_x eigenvalues s_i = +-1. Index bit i set <=> s_i = +1.
class Codeword {
public:
    explicit Codeword(std::vector<int> bits) : bits_(std::move(bits)) {
        if (bits_.empty()) throw std::invalid_argument("Codeword: empty");
        for (int b : bits_)
            if (b != 1 && b != -1) throw std::invalid_argument("Codeword: entries must be +1 or -1");
    }
    static Codeword from_index(std::uint64_t index, std::size_t n) {
        if (n == 0 || n > 63) throw std::invalid_argument("Codeword: length must be in [1, 63]");
        std::vector<int> bits(n);
        for (std::size_t i = 0; i < n; ++i) bits[i] = ((index >> i) & 1u) ? 1 : -1;
        return Codeword(std::move(bits));
    }

    std::size_t size() const { return bits_.size(); }
    int operator[](std::size_t i) const { return bits_[i]; }
    const std::vector<int>& bits() const { return bits_; }
    std::uint64_t index() const {
        std::uint64_t idx = 0;
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i] == 1) idx |= (std::uint64_t{1} << i);
        return idx;
    }
    Codeword flipped() const {
        auto b = bits_;
        for (auto& x : b) x = -x;
        return Codeword(std::move(b));
    }
    bool operator==(const Codeword&) const = default;

private:
    std::vector<int> bits_;
};

/// delta_i = (s_i - s'_i) / 2 in {-1, 0, 1}.
class DiffVector {
public:
    explicit DiffVector(std::vector<int> delta) : delta_(std::move(delta)) {
        for (int d : delta_)
            if (d < -1 || d > 1) throw std::invalid_argument("DiffVector: entries must be in {-1, 0, 1}");
    }
    static DiffVector between(const Codeword& a, const Codeword& b) {
        if (a.size() != b.size()) throw std::invalid_argument("DiffVector: codeword lengths differ");
        std::vector<int> d(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) d[i] = (a[i] - b[i]) / 2;
        return DiffVector(std::move(d));
    }

    std::size_t size() const { return delta_.size(); }
    int operator[](std::size_t i) const { return delta_[i]; }
    const std::vector<int>& values() const { return delta_; }
    std::size_t support() const {
        std::size_t c = 0;
        for (int d : delta_) c += d != 0;
        return c;
    }
    bool is_zero() const { return support() == 0; }
    /// Representative of {delta, -delta} whose first nonzero entry is +1.
    DiffVector canonical() const {
        for (int d : delta_) {
            if (d == 0) continue;
            if (d > 0) return *this;
            auto neg = delta_;
            for (auto& x : neg) x = -x;
            return DiffVector(std::move(neg));
        }
        return *this;
    }
    bool operator==(const DiffVector&) const = default;

private:
    std::vector<int> delta_;
};

namespace detail {

// delta^T M delta over the nonzero entries. Every decoherence in the library goes through
// this routine, so equal difference classes give bitwise-equal values.
inline double quad_form(const Eigen::MatrixXd& m, const int* delta, std::size_t n) {
    int nz[64];
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (delta[i] != 0) nz[count++] = static_cast<int>(i);
    double total = 0.0;
    for (std::size_t a = 0; a < count; ++a) {
        const int i = nz[a];
        double row = 0.0;
        for (std::size_t b = 0; b < count; ++b) {
            const int j = nz[b];
            row += m(i, j) * delta[j];
        }
        total += delta[i] * row;
    }
    return total;
}

} // namespace detail

inline double quadratic_form(const MetricTensor& m, const DiffVector& delta) {
    if (delta.size() != m.n()) throw std::invalid_argument("quadratic_form: dimension mismatch");
    if (m.n() > 64) throw std::invalid_argument("quadratic_form: at most 64 atoms supported");
    return detail::quad_form(m.entries(), delta.values().data(), delta.size());
}

/// d = (1/4)(sA - sB) M (sA - sB)^T.
inline double decoherence(const Codeword& a, const Codeword& b, const MetricTensor& m) {
    if (a.size() != m.n() || b.size() != m.n()) throw std::invalid_argument("decoherence: dimension mismatch");
    return quadratic_form(m, DiffVector::between(a, b));
}

/// ||sA - sB||_M = (1/2) sqrt((sA - sB) M (sA - sB)^T), the square root of the decoherence.
inline double metric_distance(const Codeword& a, const Codeword& b, const MetricTensor& m) {
    return std::sqrt(std::max(0.0, decoherence(a, b, m)));
}

inline int hamming(const Codeword& a, const Codeword& b) {
    if (a.size() != b.size()) throw std::invalid_argument("hamming: lengths differ");
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

/// Average decoherence over all ordered pairs of distinct codewords: tr M / (2 - 2^{1-n}).
inline double total_decoherence(const MetricTensor& m) {
    const double n = static_cast<double>(m.n());
    return m.trace() / (2.0 - std::pow(2.0, 1.0 - n));
}

struct PsdReport {
    double min_eig{0.0};
    bool ok{true};
};

inline PsdReport psd_check(const MetricTensor& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.entries(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("psd_check: eigenvalue solver failed");
    const double min_eig = solver.eigenvalues().minCoeff();
    return {min_eig, min_eig >= -1e-10 * m.trace()};
}

struct DmtOptions {
    bool include_indirect{true}; // add 2 Phi_ij from traced-out atoms
    unsigned threads{0};
};

namespace detail {

inline KernelValue pair_f(const AtomConfig& cfg, std::size_t a, std::size_t b, const BathParams& bath, double t) {
    const auto geo = pair_geometry(cfg, a, b);
    if (geo.r == 0.0) return f_diag(t, bath);
    return f_offdiag(t, geo.r, geo.theta, bath);
}

inline KernelValue pair_phi(const AtomConfig& cfg, std::size_t a, std::size_t b, const BathParams& bath, double t) {
    const auto geo = pair_geometry(cfg, a, b);
    return phi_kernel(t, geo.r, geo.theta, bath);
}

} // namespace detail

/// M_ij = 4 f_ij + 2 Phi_ij over the selected atoms, with
/// Phi_ij = sum over traced-out atoms l of phi_il phi_jl. Requires parallel dipoles.
inline MetricTensor build_dmt(const AtomConfig& cfg, const BathParams& bath, double t, const DmtOptions& opt = {}) {
    bath.validate();
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("build_dmt: t must be >= 0");
    if (!cfg.all_dipoles_parallel())
        throw std::invalid_argument("build_dmt: closed-form kernels require all dipoles to be parallel");
    const auto& sel = cfg.selected();
    const auto& traced = cfg.unselected();
    const std::size_t n = sel.size();
    const bool indirect = opt.include_indirect && !traced.empty();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (t == 0.0) return MetricTensor(t, std::move(m), indirect);

    // Upper-triangle f entries; one chunk per row.
    parallel_chunks(n, opt.threads, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j) {
            const double f = detail::pair_f(cfg, sel[i], sel[j], bath, t).value;
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 4.0 * f;
        }
    });

    if (indirect) {
        const std::size_t nl = traced.size();
        Eigen::MatrixXd phi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nl));
        parallel_chunks(n, opt.threads, [&](std::size_t i) {
            for (std::size_t l = 0; l < nl; ++l)
                phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) =
                    detail::pair_phi(cfg, sel[i], traced[l], bath, t).value;
        });
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                CompensatedSum acc;
                for (std::size_t l = 0; l < nl; ++l)
                    acc.add(phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) *
                            phi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)));
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += 2.0 * acc.value();
            }
        }
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < i; ++j) m(i, j) = m(j, i);
    return MetricTensor(t, std::move(m), indirect);
}

} // namespace decometric
