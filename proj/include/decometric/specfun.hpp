// specfun.hpp - Cosine integral Ci(x) and the log-regularised combination Ci(x) - ln x

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace decometric {

/// Euler-Mascheroni constant, 17 significant digits.
inline constexpr double kEulerGamma = 0.57721566490153286;

struct SpecFunResult {
    double value{0.0};
    double est_error{0.0}; // absolute
};

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// Series and continued-fraction regimes meet here.
inline constexpr double kCiSeriesLimit = 4.0;
// Beyond this the two-term asymptotic expansion is exact to double precision.
inline constexpr double kCiAsymptoticLimit = 1e8;

// Sum_{k>=1} (-1)^k x^{2k} / (2k (2k)!), together with the sum of |terms|.
struct CinSeries {
    double sum{0.0};
    double abs_sum{0.0};
};

inline CinSeries cin_series(double x) {
    CinSeries out;
    const double x2 = x * x;
    double term = 1.0; // (-1)^k x^{2k} / (2k)!
    for (int k = 1; k < 200; ++k) {
        term *= -x2 / ((2.0 * k - 1.0) * (2.0 * k));
        const double contrib = term / (2.0 * k);
        out.sum += contrib;
        out.abs_sum += std::abs(contrib);
        if (std::abs(contrib) <= 0.25 * kEps * std::abs(out.sum)) break;
    }
    return out;
}

// E1(ix) * exp(ix) by the modified Lentz continued fraction; valid for x > 2.
inline std::complex<double> e1_imag_scaled(double x, double& rel_err) {
    using cd = std::complex<double>;
    constexpr double tiny = 1e-300;
    cd b(1.0, x);
    cd c(1.0 / tiny, 0.0);
    cd d = 1.0 / b;
    cd h = d;
    rel_err = 1.0;
    for (int i = 2; i < 100000; ++i) {
        const double a = -static_cast<double>(i - 1) * (i - 1);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const cd del = c * d;
        h *= del;
        rel_err = std::abs(del - 1.0);
        if (rel_err < kEps) break;
    }
    return h;
}

} // namespace detail

/// Cosine integral Ci(x) = gamma + ln x + int_0^x (cos u - 1)/u du for x > 0.
inline SpecFunResult cosint(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::domain_error("cosint: argument must be positive and finite, got " + std::to_string(x));
    }
    using detail::kEps;
    if (x <= detail::kCiSeriesLimit) {
        const auto series = detail::cin_series(x);
        const double lx = std::log(x);
        const double value = kEulerGamma + lx + series.sum;
        const double err = 4.0 * kEps * (kEulerGamma + std::abs(lx) + series.abs_sum);
        return {value, err};
    }
    if (x >= detail::kCiAsymptoticLimit) {
        const double s = std::sin(x), c = std::cos(x);
        const double inv = 1.0 / x;
        const double value = inv * (s * (1.0 - 2.0 * inv * inv) - c * inv);
        return {value, 24.0 * inv * inv * inv * inv * inv + 4.0 * kEps * std::abs(inv)};
    }
    // Ci(x) = -Re E1(ix), E1(ix) = exp(-ix) * h
    double rel = 0.0;
    const std::complex<double> h = detail::e1_imag_scaled(x, rel);
    const std::complex<double> e1 = std::complex<double>(std::cos(x), -std::sin(x)) * h;
    const double value = -e1.real();
    const double err = (8.0 * kEps + rel) * std::abs(h);
    return {value, err};
}

/// Ci(x) - ln x for x >= 0; equals the Euler-Mascheroni constant at x = 0.
inline SpecFunResult cosint_minus_log(double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::domain_error("cosint_minus_log: argument must be non-negative and finite, got " +
                                std::to_string(x));
    }
    if (x == 0.0) return {kEulerGamma, 0.0};
    if (x <= detail::kCiSeriesLimit) {
        const auto series = detail::cin_series(x);
        return {kEulerGamma + series.sum, 4.0 * detail::kEps * (kEulerGamma + series.abs_sum)};
    }
    const auto ci = cosint(x);
    const double lx = std::log(x);
    return {ci.value - lx, ci.est_error + 2.0 * detail::kEps * std::abs(lx)};
}

} // namespace decometric
