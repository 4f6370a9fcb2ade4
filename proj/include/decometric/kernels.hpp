// kernels.hpp - Continuum-limit bath kernels f(t, r, theta), f_ii(t) and phi(t, r, theta)
//
// With all dipoles parallel, the angular part of the mode integral reduces to the
// radial weights
//     W_perp(x) = j0(x) - j1(x)/x,   W_par(x) = 2 j1(x)/x,    x = k r,
// entering as sin^2(theta) W_perp + cos^2(theta) W_par. Both tend to 2/3 as x -> 0.
// In reduced units
//     f(t, r, theta)   = (alpha/pi)   int_0^kappa k (1 - cos kt) coth(k / 2T) W dk
//     phi(t, r, theta) = (2 alpha/pi) int_0^kappa k (kt - sin kt) W dk
// and at T = 0 the first integral has the closed form
//     f = alpha / (2 pi r^2) (s(t, r) sin^2 theta + c(t, r) cos^2 theta).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include "decometric/errors.hpp"
#include "decometric/model.hpp"
#include "decometric/quadrature.hpp"
#include "decometric/specfun.hpp"

namespace decometric {

enum class Regime { closed_form, near_lightcone, quadrature };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::closed_form: return "closed_form";
        case Regime::near_lightcone: return "near_lightcone";
        case Regime::quadrature: return "quadrature";
    }
    return "unknown";
}

struct KernelValue {
    double value{0.0};
    Regime regime{Regime::closed_form};
    double est_error{0.0};
};

namespace detail {

inline constexpr double kPi = std::numbers::pi;

// Closed forms are rejected in favour of quadrature when the result is smaller than
// this fraction of the sum of magnitudes of its terms.
inline constexpr double kCancellationLimit = 1e-6;
// Relative half-width of the light-cone window reported as Regime::near_lightcone.
inline constexpr double kLightconeWindow = 1e-4;

inline constexpr QuadOptions kKernelQuad{1e-10, 0.0, 2'000'000};

// 1 - cos x without cancellation.
inline double one_minus_cos(double x) {
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s;
}

// x - sin x without cancellation.
inline double x_minus_sin(double x) {
    if (std::abs(x) >= 0.5) return x - std::sin(x);
    const double x2 = x * x;
    double term = x * x2 / 6.0;
    double sum = term;
    for (int k = 2; k < 20; ++k) {
        term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

struct RadialWeights {
    double perp; // j0 - j1/x
    double par;  // 2 j1/x
};

inline RadialWeights radial_weights(double x) {
    x = std::abs(x);
    if (x < 1.5) {
        // b_k = (-1)^k x^{2k} / (2k+3)!
        const double x2 = x * x;
        double b = 1.0 / 6.0;
        double perp = 0.0, par = 0.0;
        for (int k = 0; k < 30; ++k) {
            const double m = 2.0 * k + 2.0;
            perp += b * m * m;
            par += 2.0 * b * m;
            b *= -x2 / ((2.0 * k + 4.0) * (2.0 * k + 5.0));
            if (std::abs(b) < 1e-18) break;
        }
        return {perp, par};
    }
    const double s = std::sin(x), c = std::cos(x);
    const double x2 = x * x, x3 = x2 * x;
    return {s / x - s / x3 + c / x2, 2.0 * (s - x * c) / x3};
}

inline double dipole_weight(double x, double sin2, double cos2) {
    const auto w = radial_weights(x);
    return sin2 * w.perp + cos2 * w.par;
}

// coth(k / (2 theta_T)); 1 at zero temperature.
inline double thermal_factor(double k, double theta_T) {
    if (theta_T == 0.0) return 1.0;
    const double x = k / (2.0 * theta_T);
    if (x > 20.0) return 1.0;
    return 1.0 / std::tanh(x);
}

// Number of equal initial segments so that each spans about half an oscillation
// of the slowest-resolved factor cos(kt), cos(kr).
inline std::size_t oscillation_pieces(double kappa, double t, double r) {
    const double scale = std::max({t, r, 1.0});
    const double pieces = std::ceil(kappa * scale / kPi);
    if (!(pieces < 1e7)) throw NumericError("kernel quadrature: oscillation scale too fine (kappa*max(t,r) too large)");
    return static_cast<std::size_t>(std::max(pieces, 1.0));
}

template <class F>
KernelValue radial_quadrature(F&& integrand, double kappa, double t, double r, const char* what) {
    const auto q = integrate(integrand, 0.0, kappa, oscillation_pieces(kappa, t, r), kKernelQuad);
    if (!q.converged) {
        throw NumericError(std::string(what) + ": quadrature did not converge (estimate " + std::to_string(q.value) +
                           ", error " + std::to_string(q.abs_error) + ")");
    }
    return {q.value, Regime::quadrature, q.abs_error};
}

struct ClosedForm {
    double value;
    double scale; // sum of magnitudes of the terms
};

// s(t, r) with the light-cone singularity cancelled analytically. With u = t/r and
// a = kappa r the rational part 2/(1-u^2)(cos a cos au + u sin a sin au - u^2) equals
//     2 [ r sin^2(kappa (t-r)/2) / (t-r) + (cos(kappa (t+r)) + 1 + 2u) / (2 (1+u)) ]
// and the log/Ci bracket is  g(kappa (t+r)) - g(kappa |t-r|)  with g(x) = Ci(x) - ln x.
inline ClosedForm s_closed_form(double t, double r, double kappa) {
    const double u = t / r;
    const double a = kappa * r;
    const double dt = t - r;
    const double lc1 = dt == 0.0 ? 0.0 : r * one_minus_cos(kappa * dt) / (2.0 * dt);
    const double lc2 = (std::cos(kappa * (t + r)) + 1.0 + 2.0 * u) / (2.0 * (1.0 + u));
    const double p1 = sinc(a) * one_minus_cos(kappa * t);
    const double p2 = std::cos(a);
    const double gp = cosint_minus_log(kappa * (t + r)).value;
    const double gm = cosint_minus_log(kappa * std::abs(dt)).value;
    const double value = 2.0 * (lc1 + lc2) + 2.0 * (p1 - p2) + u * (gp - gm);
    const double scale = 2.0 * (std::abs(lc1) + std::abs(lc2)) + 2.0 * (std::abs(p1) + std::abs(p2)) +
                         u * (std::abs(gp) + std::abs(gm));
    return {value, scale};
}

inline ClosedForm c_closed_form(double t, double r, double kappa) {
    const double u = t / r;
    const double a = kappa * r;
    const double gp = cosint_minus_log(kappa * (t + r)).value;
    const double gm = cosint_minus_log(kappa * std::abs(t - r)).value;
    const double p = sinc(a) * one_minus_cos(kappa * t);
    return {2.0 * u * (gm - gp) - 4.0 * p, 2.0 * u * (std::abs(gm) + std::abs(gp)) + 4.0 * std::abs(p)};
}

inline void check_tr(double t, double r, const char* what) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument(std::string(what) + ": t must be >= 0");
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument(std::string(what) + ": r must be > 0");
}

inline Regime closed_regime(double t, double r) {
    return std::abs(t - r) < kLightconeWindow * std::max(t, r) ? Regime::near_lightcone : Regime::closed_form;
}

template <class ClosedFn, class WeightFn>
KernelValue sc_kernel(double t, double r, double kappa, ClosedFn closed, WeightFn weight, const char* what) {
    check_tr(t, r, what);
    if (!(kappa > 0.0)) throw std::invalid_argument(std::string(what) + ": kappa must be > 0");
    if (t == 0.0) return {0.0, Regime::closed_form, 0.0};
    const ClosedForm cf = closed(t, r, kappa);
    if (std::abs(cf.value) >= kCancellationLimit * cf.scale) {
        return {cf.value, closed_regime(t, r), 16.0 * std::numeric_limits<double>::epsilon() * cf.scale};
    }
    const double r2 = r * r;
    return radial_quadrature(
        [&](double k) { return 2.0 * r2 * k * one_minus_cos(k * t) * weight(radial_weights(k * r)); }, kappa, t, r,
        what);
}

} // namespace detail

/// Dimensionless kernel s(t, r) multiplying sin^2(theta); zero at t = 0 and finite on t = r.
inline KernelValue s_kernel(double t, double r, double kappa) {
    return detail::sc_kernel(t, r, kappa, detail::s_closed_form, [](const detail::RadialWeights& w) { return w.perp; },
                             "s_kernel");
}

/// Dimensionless kernel c(t, r) multiplying cos^2(theta).
inline KernelValue c_kernel(double t, double r, double kappa) {
    return detail::sc_kernel(t, r, kappa, detail::c_closed_form, [](const detail::RadialWeights& w) { return w.par; },
                             "c_kernel");
}

/// Off-diagonal kernel f(t, r, theta) for r > 0. Closed form at zero temperature,
/// radial quadrature with the coth factor otherwise.
inline KernelValue f_offdiag(double t, double r, double theta, const BathParams& bath) {
    bath.validate();
    detail::check_tr(t, r, "f_offdiag");
    if (t == 0.0) return {0.0, Regime::closed_form, 0.0};
    const double sn = std::sin(theta), cs = std::cos(theta);
    const double sin2 = sn * sn, cos2 = cs * cs;
    if (bath.theta_T == 0.0) {
        const auto s = s_kernel(t, r, bath.kappa);
        const auto c = c_kernel(t, r, bath.kappa);
        const double pref = bath.alpha / (2.0 * detail::kPi * r * r);
        Regime regime = Regime::closed_form;
        if (s.regime == Regime::quadrature || c.regime == Regime::quadrature) {
            regime = Regime::quadrature;
        } else if (s.regime == Regime::near_lightcone || c.regime == Regime::near_lightcone) {
            regime = Regime::near_lightcone;
        }
        return {pref * (s.value * sin2 + c.value * cos2), regime,
                std::abs(pref) * (s.est_error * sin2 + c.est_error * cos2)};
    }
    const double pref = bath.alpha / detail::kPi;
    const double theta_T = bath.theta_T;
    auto kv = detail::radial_quadrature(
        [&](double k) {
            if (k == 0.0) return 0.0;
            return k * detail::one_minus_cos(k * t) * detail::thermal_factor(k, theta_T) *
                   detail::dipole_weight(k * r, sin2, cos2);
        },
        bath.kappa, t, r, "f_offdiag");
    kv.value *= pref;
    kv.est_error *= std::abs(pref);
    return kv;
}

/// Single-atom kernel f_ii(t) = (2 alpha / 3 pi)(kappa^2/2 + (1 - cos kt - kt sin kt)/t^2)
/// at zero temperature; radial quadrature with the coth factor otherwise.
inline KernelValue f_diag(double t, const BathParams& bath) {
    bath.validate();
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("f_diag: t must be >= 0");
    if (t == 0.0) return {0.0, Regime::closed_form, 0.0};
    const double kappa = bath.kappa;
    if (bath.theta_T == 0.0) {
        // kappa^2 * h(x), h(x) = 1/2 + (1 - cos x - x sin x)/x^2, x = kappa t
        const double x = kappa * t;
        double h;
        if (x < 1.0) {
            // h(x) = sum_{m>=2} (-1)^m (2m-1) x^{2m-2} / (2m)!
            const double x2 = x * x;
            double p = x2 / 24.0; // x^{2m-2}/(2m)! at m = 2
            h = 0.0;
            for (int m = 2; m < 30; ++m) {
                const double term = ((m % 2 == 0) ? 1.0 : -1.0) * (2.0 * m - 1.0) * p;
                h += term;
                if (std::abs(term) < 1e-18 * std::abs(h)) break;
                p *= x2 / ((2.0 * m + 1.0) * (2.0 * m + 2.0));
            }
        } else {
            h = 0.5 + (detail::one_minus_cos(x) - x * std::sin(x)) / (x * x);
        }
        const double value = 2.0 * bath.alpha / (3.0 * detail::kPi) * kappa * kappa * h;
        return {value, Regime::closed_form, 8.0 * std::numeric_limits<double>::epsilon() * std::abs(value)};
    }
    const double pref = 2.0 * bath.alpha / (3.0 * detail::kPi);
    const double theta_T = bath.theta_T;
    auto kv = detail::radial_quadrature(
        [&](double k) {
            if (k == 0.0) return 0.0;
            return k * detail::one_minus_cos(k * t) * detail::thermal_factor(k, theta_T);
        },
        kappa, t, 0.0, "f_diag");
    kv.value *= pref;
    kv.est_error *= std::abs(pref);
    return kv;
}

/// Phase kernel phi(t, r, theta) for r >= 0, by radial quadrature. Temperature independent.
inline KernelValue phi_kernel(double t, double r, double theta, const BathParams& bath) {
    bath.validate();
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("phi_kernel: t must be >= 0");
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("phi_kernel: r must be >= 0");
    if (t == 0.0) return {0.0, Regime::closed_form, 0.0};
    const double sn = std::sin(theta), cs = std::cos(theta);
    const double sin2 = r == 0.0 ? 1.0 : sn * sn;
    const double cos2 = r == 0.0 ? 0.0 : cs * cs;
    const double pref = 2.0 * bath.alpha / detail::kPi;
    auto kv = detail::radial_quadrature(
        [&](double k) { return k * detail::x_minus_sin(k * t) * detail::dipole_weight(k * r, sin2, cos2); },
        bath.kappa, t, r, "phi_kernel");
    kv.value *= pref;
    kv.est_error *= std::abs(pref);
    return kv;
}

} // namespace decometric
