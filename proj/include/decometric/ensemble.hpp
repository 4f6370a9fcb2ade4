// ensemble.hpp - Statistics over all codeword pairs and minimum-decoherence searches
//
// The decoherence of a pair depends only on its difference vector delta, and delta and
// -delta describe the same unordered pair. The (3^n - 1)/2 classes are indexed by
// c = (3^p - 1)/2 + m, where p is the highest nonzero position (delta_p = +1) and the
// base-3 digits of m (0 -> 0, 1 -> +1, 2 -> -1) give delta_0 .. delta_{p-1}.
// A class with z zeros stands for 2^z unordered codeword pairs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "decometric/metric.hpp"
#include "decometric/summation.hpp"

namespace decometric {

inline constexpr std::size_t kMaxStatsAtoms = 20;
inline constexpr std::size_t kMaxListAtoms = 16;

inline std::uint64_t class_count(std::size_t n) {
    std::uint64_t p = 1;
    for (std::size_t i = 0; i < n; ++i) p *= 3;
    return (p - 1) / 2;
}

/// Number of unordered pairs of distinct codewords, 2^{n-1} (2^n - 1).
inline std::uint64_t pair_count(std::size_t n) {
    return (std::uint64_t{1} << (n - 1)) * ((std::uint64_t{1} << n) - 1);
}

namespace detail {

inline constexpr std::uint64_t kClassChunk = 1u << 14;

// Walks difference classes in index order.
class ClassCursor {
public:
    explicit ClassCursor(std::size_t n) : n_(n), digits_(n, 0), delta_(n, 0) {}

    void seek(std::uint64_t c) {
        std::fill(digits_.begin(), digits_.end(), 0);
        std::fill(delta_.begin(), delta_.end(), 0);
        std::uint64_t offset = 0, block = 1; // block = 3^p
        lead_ = 0;
        while (offset + block <= c) {
            offset += block;
            block *= 3;
            ++lead_;
        }
        std::uint64_t m = c - offset;
        support_ = 1;
        for (std::size_t i = 0; i < lead_; ++i) {
            digits_[i] = static_cast<int>(m % 3);
            m /= 3;
            delta_[i] = kDigit[digits_[i]];
            support_ += digits_[i] != 0;
        }
        delta_[lead_] = 1;
    }

    void next() {
        for (std::size_t i = 0; i < lead_; ++i) {
            if (digits_[i] == 0) ++support_;
            if (digits_[i] < 2) {
                ++digits_[i];
                delta_[i] = kDigit[digits_[i]];
                return;
            }
            digits_[i] = 0;
            delta_[i] = 0;
            --support_;
        }
        delta_[lead_] = 0;
        ++lead_;
        if (lead_ < n_) delta_[lead_] = 1;
        support_ = 1;
    }

    const int* delta() const { return delta_.data(); }
    std::size_t support() const { return support_; }
    std::uint64_t multiplicity() const { return std::uint64_t{1} << (n_ - support_); }

private:
    static constexpr int kDigit[3] = {0, 1, -1};
    std::size_t n_;
    std::size_t lead_{0};
    std::size_t support_{1};
    std::vector<int> digits_;
    std::vector<int> delta_;
};

// Calls body(class_index, cursor) for every class in [begin, end).
template <class Body>
void visit_classes(std::size_t n, std::uint64_t begin, std::uint64_t end, Body&& body) {
    if (begin >= end) return;
    ClassCursor cur(n);
    cur.seek(begin);
    for (std::uint64_t c = begin; c < end; ++c) {
        body(c, cur);
        if (c + 1 < end) cur.next();
    }
}

// Runs body(begin, end, chunk) over fixed-size chunks of the class range.
template <class Body>
void chunked_classes(std::size_t n, unsigned threads, Body&& body) {
    const std::uint64_t total = class_count(n);
    const std::uint64_t chunks = (total + kClassChunk - 1) / kClassChunk;
    parallel_chunks(static_cast<std::size_t>(chunks), threads, [&](std::size_t k) {
        const std::uint64_t b = k * kClassChunk;
        body(b, std::min(total, b + kClassChunk), k);
    });
}

inline void check_size(std::size_t n, std::size_t limit, const char* what) {
    if (n > limit)
        throw std::length_error(std::string(what) + ": n = " + std::to_string(n) + " exceeds the enumeration bound " +
                                std::to_string(limit));
}

} // namespace detail

struct HistogramBin {
    double lo{0.0};
    double hi{0.0};
    std::uint64_t weight{0}; // unordered codeword pairs
};

struct DecoStats {
    std::uint64_t n_pairs{0};
    double min{0.0};
    double max{0.0};
    double mean{0.0};
    double stddev{0.0};
    std::vector<HistogramBin> histogram;
};

struct ClassTable {
    std::vector<DiffVector> classes;
    std::vector<std::uint64_t> multiplicity;
};

/// Canonical representatives of all difference classes in index order.
inline ClassTable make_class_table(std::size_t n) {
    if (n == 0) throw std::invalid_argument("make_class_table: n must be positive");
    detail::check_size(n, kMaxListAtoms, "make_class_table");
    ClassTable table;
    const auto total = class_count(n);
    table.classes.reserve(total);
    table.multiplicity.reserve(total);
    detail::visit_classes(n, 0, total, [&](std::uint64_t, const detail::ClassCursor& cur) {
        table.classes.emplace_back(std::vector<int>(cur.delta(), cur.delta() + n));
        table.multiplicity.push_back(cur.multiplicity());
    });
    return table;
}

/// Exact min / max / mean / standard deviation and histogram of the decoherences of all
/// unordered codeword pairs, weighted by pair multiplicity. Histogram bins split [0, max]
/// evenly. Independent of the thread count.
inline DecoStats enumerate_stats(const MetricTensor& m, std::size_t bins, unsigned threads = 0) {
    const std::size_t n = m.n();
    detail::check_size(n, kMaxStatsAtoms, "enumerate_stats");
    if (bins == 0) throw std::invalid_argument("enumerate_stats: bins must be positive");
    const auto& mat = m.entries();

    struct Pass1 {
        double lo{std::numeric_limits<double>::infinity()};
        double hi{-std::numeric_limits<double>::infinity()};
        CompensatedSum sum;
    };
    const std::uint64_t total = class_count(n);
    const std::size_t chunks = static_cast<std::size_t>((total + detail::kClassChunk - 1) / detail::kClassChunk);
    std::vector<Pass1> p1(chunks);
    detail::chunked_classes(n, threads, [&](std::uint64_t b, std::uint64_t e, std::size_t k) {
        auto& acc = p1[k];
        detail::visit_classes(n, b, e, [&](std::uint64_t, const detail::ClassCursor& cur) {
            const double d = detail::quad_form(mat, cur.delta(), n);
            acc.lo = std::min(acc.lo, d);
            acc.hi = std::max(acc.hi, d);
            acc.sum.add(static_cast<double>(cur.multiplicity()) * d);
        });
    });

    DecoStats st;
    st.n_pairs = pair_count(n);
    st.min = std::numeric_limits<double>::infinity();
    st.max = -std::numeric_limits<double>::infinity();
    CompensatedSum sum;
    for (const auto& a : p1) {
        st.min = std::min(st.min, a.lo);
        st.max = std::max(st.max, a.hi);
        sum.add(a.sum);
    }
    st.mean = sum.value() / static_cast<double>(st.n_pairs);

    const double width = st.max > 0.0 ? st.max / static_cast<double>(bins) : 0.0;
    struct Pass2 {
        CompensatedSum var;
        std::vector<std::uint64_t> counts;
    };
    std::vector<Pass2> p2(chunks);
    detail::chunked_classes(n, threads, [&](std::uint64_t b, std::uint64_t e, std::size_t k) {
        auto& acc = p2[k];
        acc.counts.assign(bins, 0);
        detail::visit_classes(n, b, e, [&](std::uint64_t, const detail::ClassCursor& cur) {
            const double d = detail::quad_form(mat, cur.delta(), n);
            const double w = static_cast<double>(cur.multiplicity());
            acc.var.add(w * (d - st.mean) * (d - st.mean));
            std::size_t bin = 0;
            if (width > 0.0 && d > 0.0) bin = std::min(bins - 1, static_cast<std::size_t>(d / width));
            acc.counts[bin] += cur.multiplicity();
        });
    });
    CompensatedSum var;
    st.histogram.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        st.histogram[i].lo = width * static_cast<double>(i);
        st.histogram[i].hi = i + 1 == bins ? st.max : width * static_cast<double>(i + 1);
    }
    for (const auto& a : p2) {
        var.add(a.var);
        for (std::size_t i = 0; i < bins; ++i) st.histogram[i].weight += a.counts[i];
    }
    st.stddev = std::sqrt(std::max(0.0, var.value() / static_cast<double>(st.n_pairs)));
    return st;
}

struct ClassPoint {
    int hamming{0};
    double decoherence{0.0};
    std::uint64_t multiplicity{0};
};

/// One (Hamming distance, decoherence, multiplicity) point per difference class.
inline std::vector<ClassPoint> decoherence_vs_hamming(const MetricTensor& m, unsigned threads = 0) {
    const std::size_t n = m.n();
    detail::check_size(n, kMaxListAtoms, "decoherence_vs_hamming");
    std::vector<ClassPoint> pts(class_count(n));
    const auto& mat = m.entries();
    detail::chunked_classes(n, threads, [&](std::uint64_t b, std::uint64_t e, std::size_t) {
        detail::visit_classes(n, b, e, [&](std::uint64_t c, const detail::ClassCursor& cur) {
            pts[c] = {static_cast<int>(cur.support()), detail::quad_form(mat, cur.delta(), n), cur.multiplicity()};
        });
    });
    return pts;
}

enum class SearchMode { exhaustive, branch_and_bound };

struct MinResult {
    DiffVector delta{std::vector<int>{}};
    double value{0.0};
    std::uint64_t nodes{0}; // classes scanned or search nodes expanded
};

namespace detail {

inline MinResult min_exhaustive(const MetricTensor& m, unsigned threads) {
    const std::size_t n = m.n();
    check_size(n, kMaxListAtoms, "min_decoherence (exhaustive)");
    const auto& mat = m.entries();
    const std::uint64_t total = class_count(n);
    const std::size_t chunks = static_cast<std::size_t>((total + kClassChunk - 1) / kClassChunk);
    struct Best {
        double value{std::numeric_limits<double>::infinity()};
        std::uint64_t index{0};
    };
    std::vector<Best> best(chunks);
    chunked_classes(n, threads, [&](std::uint64_t b, std::uint64_t e, std::size_t k) {
        visit_classes(n, b, e, [&](std::uint64_t c, const ClassCursor& cur) {
            const double d = quad_form(mat, cur.delta(), n);
            if (d < best[k].value) best[k] = {d, c};
        });
    });
    Best overall;
    for (const auto& b : best)
        if (b.value < overall.value) overall = b;
    ClassCursor cur(n);
    cur.seek(overall.index);
    return {DiffVector(std::vector<int>(cur.delta(), cur.delta() + n)).canonical(), overall.value, total};
}

class BranchAndBound {
public:
    explicit BranchAndBound(const Eigen::MatrixXd& m) : m_(m), n_(static_cast<std::size_t>(m.rows())) {
        // Per depth k: smallest eigenvalue of the trailing block and Gershgorin-type
        // diagonal margins mu_j = M_jj - sum_{l >= k, l != j} |M_jl|.
        lambda_.resize(n_);
        mu_.assign(n_, std::vector<double>(n_, 0.0));
        for (std::size_t k = 0; k < n_; ++k) {
            const auto len = static_cast<Eigen::Index>(n_ - k);
            const auto kk = static_cast<Eigen::Index>(k);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_.block(kk, kk, len, len), Eigen::EigenvaluesOnly);
            lambda_[k] = es.eigenvalues().minCoeff();
            for (std::size_t j = k; j < n_; ++j) {
                double off = 0.0;
                for (std::size_t l = k; l < n_; ++l)
                    if (l != j) off += std::abs(m_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)));
                mu_[k][j] = m_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) - off;
            }
        }
        margin_ = 1e-12 * m_.cwiseAbs().sum();
        delta_.assign(n_, 0);
        b_.assign(n_, 0.0);
    }

    MinResult run() {
        // Incumbent: best single flip.
        std::size_t j0 = 0;
        for (std::size_t j = 1; j < n_; ++j)
            if (m_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) <
                m_(static_cast<Eigen::Index>(j0), static_cast<Eigen::Index>(j0)))
                j0 = j;
        best_delta_.assign(n_, 0);
        best_delta_[j0] = 1;
        best_ = quad_form(m_, best_delta_.data(), n_);
        search(0, 0.0, false);
        return {DiffVector(best_delta_), best_, nodes_};
    }

private:
    double lower_bound(std::size_t k, double q) const {
        double eig = 0.0, diag = 0.0;
        for (std::size_t j = k; j < n_; ++j) {
            const double twob = 2.0 * std::abs(b_[j]);
            eig += std::min(0.0, lambda_[k] - twob);
            diag += std::min(0.0, mu_[k][j] - twob);
        }
        return q + std::max(eig, diag);
    }

    void search(std::size_t k, double q, bool nonzero) {
        ++nodes_;
        if (k == n_) {
            if (!nonzero) return;
            const double v = quad_form(m_, delta_.data(), n_);
            if (v < best_) {
                best_ = v;
                best_delta_ = delta_;
            }
            return;
        }
        if (lower_bound(k, q) > best_ + margin_) return;

        const double mkk = m_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        int choices[3] = {0, 1, -1};
        const int nchoice = nonzero ? 3 : 2; // first nonzero entry is +1
        double cost[3];
        for (int c = 0; c < nchoice; ++c) cost[c] = q + 2.0 * choices[c] * b_[k] + choices[c] * choices[c] * mkk;
        // Cheapest branch first; stable for ties.
        for (int a = 1; a < nchoice; ++a)
            for (int c = a; c > 0 && cost[c] < cost[c - 1]; --c) {
                std::swap(cost[c], cost[c - 1]);
                std::swap(choices[c], choices[c - 1]);
            }
        for (int c = 0; c < nchoice; ++c) {
            const int v = choices[c];
            delta_[k] = v;
            if (v != 0)
                for (std::size_t j = k + 1; j < n_; ++j)
                    b_[j] += m_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * v;
            search(k + 1, cost[c], nonzero || v != 0);
            if (v != 0)
                for (std::size_t j = k + 1; j < n_; ++j)
                    b_[j] -= m_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * v;
            delta_[k] = 0;
        }
    }

    const Eigen::MatrixXd& m_;
    std::size_t n_;
    std::vector<double> lambda_;
    std::vector<std::vector<double>> mu_;
    double margin_{0.0};
    std::vector<int> delta_;
    std::vector<double> b_; // b_j = sum_{i < k} M_ji delta_i
    std::vector<int> best_delta_;
    double best_{0.0};
    std::uint64_t nodes_{0};
};

} // namespace detail

/// Smallest decoherence over nonzero difference classes and a minimiser whose first
/// nonzero entry is +1.
/// Both modes return bitwise-equal values; the minimiser may differ on exact ties.
inline MinResult min_decoherence(const MetricTensor& m, SearchMode mode, unsigned threads = 0) {
    if (m.n() > 64) throw std::length_error("min_decoherence: at most 64 atoms supported");
    if (mode == SearchMode::exhaustive) return detail::min_exhaustive(m, threads);
    return detail::BranchAndBound(m.entries()).run();
}

/// Greedy code of K codewords: start from a pair realising the minimum decoherence,
/// then repeatedly add the codeword whose largest decoherence to the chosen set is
/// smallest. Ties go to the smallest codeword index. No optimality guarantee.
inline std::vector<Codeword> select_code(const MetricTensor& m, std::size_t K, unsigned threads = 0) {
    const std::size_t n = m.n();
    detail::check_size(n, kMaxListAtoms, "select_code");
    const std::uint64_t words = std::uint64_t{1} << n;
    if (K < 2 || K > words) throw std::invalid_argument("select_code: K must lie in [2, 2^n]");

    const auto seed = min_decoherence(m, SearchMode::exhaustive, threads);
    std::uint64_t a = 0, b = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (seed.delta[i] == 1) a |= std::uint64_t{1} << i;
        if (seed.delta[i] == -1) b |= std::uint64_t{1} << i;
    }
    std::vector<std::uint64_t> chosen{std::min(a, b), std::max(a, b)};
    std::vector<double> worst(words, 0.0);
    std::vector<char> taken(words, 0);
    const auto& mat = m.entries();
    auto absorb = [&](std::uint64_t w) {
        taken[w] = 1;
        const std::size_t chunks = static_cast<std::size_t>((words + 4095) / 4096);
        parallel_chunks(chunks, threads, [&](std::size_t k) {
            int delta[64];
            const std::uint64_t hi = std::min<std::uint64_t>(words, (k + 1) * 4096);
            for (std::uint64_t c = k * 4096; c < hi; ++c) {
                if (taken[c]) continue;
                for (std::size_t i = 0; i < n; ++i)
                    delta[i] = static_cast<int>((c >> i) & 1u) - static_cast<int>((w >> i) & 1u);
                worst[c] = std::max(worst[c], detail::quad_form(mat, delta, n));
            }
        });
    };
    absorb(chosen[0]);
    absorb(chosen[1]);
    while (chosen.size() < K) {
        std::uint64_t pick = words;
        for (std::uint64_t c = 0; c < words; ++c)
            if (!taken[c] && (pick == words || worst[c] < worst[pick])) pick = c;
        chosen.push_back(pick);
        absorb(pick);
    }
    std::vector<Codeword> code;
    code.reserve(chosen.size());
    for (auto w : chosen) code.push_back(Codeword::from_index(w, n));
    return code;
}

/// Largest pairwise decoherence within a code.
inline double max_pairwise_decoherence(const std::vector<Codeword>& code, const MetricTensor& m) {
    double worst = 0.0;
    for (std::size_t a = 0; a < code.size(); ++a)
        for (std::size_t b = a + 1; b < code.size(); ++b) worst = std::max(worst, decoherence(code[a], code[b], m));
    return worst;
}

} // namespace decometric
