// quadrature.hpp - Globally adaptive Gauss-Kronrod (7/15) integration on a pre-split interval

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

#include "decometric/summation.hpp"

namespace decometric {

struct QuadOptions {
    double rel_tol{1e-10};
    double abs_tol{0.0};
    std::size_t max_segments{2'000'000};
};

struct QuadResult {
    double value{0.0};
    double abs_error{0.0};
    double l1_norm{0.0}; // estimate of the integral of |f|
    std::size_t evaluations{0};
    bool converged{false};
};

namespace detail {

// Kronrod abscissae (descending, last is the centre) and weights; Gauss weights for xgk[1,3,5,7].
inline constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error, l1;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double uflow = std::numeric_limits<double>::min();
    const double centr = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);
    const double dhlgth = std::abs(hlgth);

    const double fc = f(centr);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    std::array<double, 7> fv1{}, fv2{};
    for (int j = 0; j < 7; ++j) {
        const double absc = hlgth * kXgk[j];
        fv1[j] = f(centr - absc);
        fv2[j] = f(centr + absc);
        const double fsum = fv1[j] + fv2[j];
        resk += kWgk[j] * fsum;
        resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    }
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    const double result = resk * hlgth;
    resabs *= dhlgth;
    resasc *= dhlgth;
    double abserr = std::abs((resk - resg) * hlgth);
    if (resasc != 0.0 && abserr != 0.0) abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
    if (resabs > uflow / (50.0 * eps)) abserr = std::max(eps * 50.0 * resabs, abserr);
    return {a, b, result, abserr, resabs};
}

} // namespace detail

/// Integrates f over [a, b]. The interval is first cut into `initial_pieces` equal
/// segments (use this to resolve known oscillation scales); segments with the largest
/// error are then bisected until the total error meets the tolerance.
///
/// The tolerance is max(abs_tol, rel_tol*|I|, 64*eps*|f|_1); the last term is the
/// round-off floor for integrals that cancel.
template <class F>
QuadResult integrate(F&& f, double a, double b, std::size_t initial_pieces = 1, const QuadOptions& opt = {}) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    initial_pieces = std::max<std::size_t>(initial_pieces, 1);
    std::priority_queue<detail::Segment> heap;
    double total = 0.0, total_err = 0.0, total_l1 = 0.0;
    const double width = (b - a) / static_cast<double>(initial_pieces);
    for (std::size_t i = 0; i < initial_pieces; ++i) {
        const double lo = a + width * static_cast<double>(i);
        const double hi = (i + 1 == initial_pieces) ? b : a + width * static_cast<double>(i + 1);
        auto seg = detail::gk15(f, lo, hi);
        total += seg.value;
        total_err += seg.error;
        total_l1 += seg.l1;
        heap.push(seg);
    }
    out.evaluations = 15 * initial_pieces;

    auto tolerance = [&] {
        return std::max({opt.abs_tol, opt.rel_tol * std::abs(total), 64.0 * eps * total_l1});
    };
    std::size_t segments = initial_pieces;
    while (total_err > tolerance() && segments < opt.max_segments) {
        const detail::Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break; // cannot split further
        heap.pop();
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_l1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
        out.evaluations += 30;
        ++segments;
    }

    // Deterministic final sum in interval order.
    std::vector<detail::Segment> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    CompensatedSum value, err, l1;
    for (const auto& s : all) {
        value.add(s.value);
        err.add(s.error);
        l1.add(s.l1);
    }
    out.value = value.value();
    out.abs_error = err.value();
    out.l1_norm = l1.value();
    total = out.value;
    total_l1 = out.l1_norm;
    out.converged = out.abs_error <= tolerance();
    return out;
}

} // namespace decometric
