// modesum.hpp - Brute-force discrete mode sums for f_ij and phi_ij in a periodic box
//
// Modes are k = 2 pi n / L (integer n, k != 0, |k| <= kappa) with two transverse
// polarisations. With E_k = sqrt(hbar w / 2 eps0 V) and alpha = e^2 / (4 pi eps0 hbar c),
// the coupling product in reduced units is
//     g_k^(i) g_k^(j) / w_k^2 = (2 pi alpha / (L^3 k)) (u_i . eps_k)(u_j . eps_k),
// so that
//     f_ij   = sum_k (2 pi alpha / L^3 k) P_ij(k) cos(k.R_ij) (1 - cos kt) coth(k / 2T)
//     phi_ij = sum_k (2 pi alpha / L^3 k) P_ij(k) cos(k.R_ij) 2 (kt - sin kt)
// with P_ij(k) = sum_lambda (u_i . eps_lambda)(u_j . eps_lambda). Taking L -> infinity
// reproduces the kernels module; f_ii in particular fixes the normalisation.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "decometric/kernels.hpp"
#include "decometric/model.hpp"
#include "decometric/summation.hpp"

namespace decometric {

struct ModeGrid {
    double box_L{1.0};
    int n_max{1};
    double kappa{0.01};

    /// Smallest grid whose cube contains the cutoff sphere.
    static ModeGrid covering(double box_L, double kappa) {
        const int n = static_cast<int>(std::ceil(kappa * box_L / (2.0 * std::numbers::pi)));
        return {box_L, std::max(n, 1), kappa};
    }

    void validate() const {
        if (!(box_L > 0.0) || !std::isfinite(box_L)) throw std::invalid_argument("mode grid: box_L must be positive");
        if (n_max < 1) throw std::invalid_argument("mode grid: n_max must be positive");
        if (!(kappa > 0.0)) throw std::invalid_argument("mode grid: kappa must be positive");
        if (n_max * 2.0 * std::numbers::pi / box_L < kappa)
            throw std::invalid_argument("mode grid too coarse: n_max * 2 pi / L = " +
                                        std::to_string(n_max * 2.0 * std::numbers::pi / box_L) + " < kappa");
    }
};

/// Orthonormal transverse pair (e1, e2) for wave vector k. Depends on the direction only;
/// k = z gives (x, y).
inline std::pair<Vec3, Vec3> polarization_basis(const Vec3& k) {
    const double norm = k.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("polarization_basis: zero wave vector");
    const Vec3 khat = k / norm;
    const Vec3 helper = std::abs(khat.y()) < 0.9 ? Vec3::UnitY() : Vec3::UnitZ();
    const Vec3 e1 = helper.cross(khat).normalized();
    const Vec3 e2 = khat.cross(e1);
    return {e1, e2};
}

struct AtomPair {
    std::size_t i{0};
    std::size_t j{0};
};

/// f and phi mode sums for several pairs and times in one sweep over the grid.
/// Values are stored pair-major: f[p * times.size() + q].
struct ModeSums {
    std::vector<double> f;
    std::vector<double> phi;
    std::size_t modes{0}; // modes inside the cutoff (both half-spaces)
};

/// Half of k-space is enumerated (every summand is even in k) in slabs of fixed n_x.
/// Each slab is accumulated with compensated summation and slabs are merged in order,
/// so the result is bitwise independent of the thread count.
inline ModeSums mode_sums(const AtomConfig& cfg, std::span<const AtomPair> pairs, std::span<const double> times,
                          const ModeGrid& grid, double alpha = kFineStructure, double theta_T = 0.0,
                          unsigned threads = 0) {
    grid.validate();
    if (!(theta_T >= 0.0)) throw std::invalid_argument("mode_sums: temperature must be non-negative");
    for (const auto& p : pairs)
        if (p.i >= cfg.size() || p.j >= cfg.size()) throw std::out_of_range("mode_sums: atom index out of range");
    for (double t : times)
        if (!(t >= 0.0)) throw std::invalid_argument("mode_sums: t must be >= 0");

    const std::size_t np = pairs.size(), nt = times.size();
    const double dk = 2.0 * std::numbers::pi / grid.box_L;
    const double kappa = grid.kappa;
    const double nsphere = kappa / dk;
    const int nmax = grid.n_max;

    std::vector<Vec3> seps(np), ui(np), uj(np);
    for (std::size_t p = 0; p < np; ++p) {
        seps[p] = cfg.positions()[pairs[p].i] - cfg.positions()[pairs[p].j];
        ui[p] = cfg.dipoles()[pairs[p].i];
        uj[p] = cfg.dipoles()[pairs[p].j];
    }

    struct Slab {
        std::vector<CompensatedSum> f, phi;
        std::size_t modes{0};
    };
    const std::size_t n_slabs = static_cast<std::size_t>(nmax) + 1;
    std::vector<Slab> slabs(n_slabs);

    parallel_chunks(n_slabs, threads, [&](std::size_t slab_index) {
        Slab& slab = slabs[slab_index];
        slab.f.assign(np * nt, {});
        slab.phi.assign(np * nt, {});
        std::vector<double> fw(nt), pw(nt);
        std::vector<double> proj(np), cosr(np);
        const int nx = static_cast<int>(slab_index);
        for (int ny = (nx == 0 ? 0 : -nmax); ny <= nmax; ++ny) {
            const double rem = nsphere * nsphere - double(nx) * nx - double(ny) * ny;
            if (rem < 0.0) continue;
            const int nz_hi = std::min(nmax, static_cast<int>(std::floor(std::sqrt(rem))) + 1);
            const int nz_lo = (nx == 0 && ny == 0) ? 1 : -nz_hi;
            for (int nz = nz_lo; nz <= nz_hi; ++nz) {
                const Vec3 k(dk * nx, dk * ny, dk * nz);
                const double kk = k.norm();
                if (kk > kappa || kk == 0.0) continue;
                ++slab.modes;
                const auto [e1, e2] = polarization_basis(k);
                for (std::size_t p = 0; p < np; ++p) {
                    proj[p] = ui[p].dot(e1) * uj[p].dot(e1) + ui[p].dot(e2) * uj[p].dot(e2);
                    cosr[p] = std::cos(k.dot(seps[p]));
                }
                const double coth = detail::thermal_factor(kk, theta_T);
                for (std::size_t q = 0; q < nt; ++q) {
                    const double x = kk * times[q];
                    const double sh = std::sin(0.5 * x), ch = std::cos(0.5 * x);
                    fw[q] = 2.0 * sh * sh * coth / kk;
                    pw[q] = 2.0 * (x >= 0.5 ? x - 2.0 * sh * ch : detail::x_minus_sin(x)) / kk;
                }
                for (std::size_t p = 0; p < np; ++p) {
                    const double w = proj[p] * cosr[p];
                    for (std::size_t q = 0; q < nt; ++q) {
                        slab.f[p * nt + q].add(w * fw[q]);
                        slab.phi[p * nt + q].add(w * pw[q]);
                    }
                }
            }
        }
    });

    ModeSums out;
    out.f.assign(np * nt, 0.0);
    out.phi.assign(np * nt, 0.0);
    const double pref = 2.0 * (2.0 * std::numbers::pi * alpha) / (grid.box_L * grid.box_L * grid.box_L);
    for (std::size_t idx = 0; idx < np * nt; ++idx) {
        CompensatedSum f, phi;
        for (const auto& slab : slabs) {
            f.add(slab.f[idx]);
            phi.add(slab.phi[idx]);
        }
        out.f[idx] = pref * f.value();
        out.phi[idx] = pref * phi.value();
    }
    for (const auto& slab : slabs) out.modes += 2 * slab.modes;
    return out;
}

inline double f_modesum(double t, const AtomConfig& cfg, std::size_t i, std::size_t j, const ModeGrid& grid,
                        double theta_T = 0.0, double alpha = kFineStructure, unsigned threads = 0) {
    const AtomPair pair{i, j};
    const double time = t;
    return mode_sums(cfg, {&pair, 1}, {&time, 1}, grid, alpha, theta_T, threads).f[0];
}

inline double phi_modesum(double t, const AtomConfig& cfg, std::size_t i, std::size_t j, const ModeGrid& grid,
                          double alpha = kFineStructure, unsigned threads = 0) {
    const AtomPair pair{i, j};
    const double time = t;
    return mode_sums(cfg, {&pair, 1}, {&time, 1}, grid, alpha, 0.0, threads).phi[0];
}

} // namespace decometric
