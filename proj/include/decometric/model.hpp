// model.hpp - Atom geometry, dipole orientations and bath parameters in reduced units
//
// Lengths are in units of the dipole length d, times in units of d/c, and the
// temperature is k_B T d / (hbar c).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace decometric {

using Vec3 = Eigen::Vector3d;

inline constexpr double kFineStructure = 1.0 / 137.06;

struct BathParams {
    double alpha{kFineStructure};
    double kappa{0.01};   // UV cutoff k_max * d
    double theta_T{0.0};  // reduced temperature; 0 selects the T = 0 closed forms

    void validate() const {
        if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("bath: kappa must be positive");
        if (!(theta_T >= 0.0) || !std::isfinite(theta_T))
            throw std::invalid_argument("bath: temperature must be non-negative");
        if (!std::isfinite(alpha)) throw std::invalid_argument("bath: alpha must be finite");
    }
};

enum class LatticeKind { square2d, linear };

struct LatticeSpec {
    LatticeKind kind{LatticeKind::square2d};
    int nx{1};
    int ny{1};          // ignored for linear lattices
    double spacing{1.0};

    std::size_t atom_count() const {
        return kind == LatticeKind::linear ? static_cast<std::size_t>(nx)
                                           : static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    }
};

/// N atoms with positions and unit dipole directions, plus the ordered list of the
/// n observed ("selected") atoms. The remaining atoms are traced out.
class AtomConfig {
public:
    AtomConfig(std::vector<Vec3> positions, std::vector<Vec3> dipoles, std::vector<std::size_t> selected = {})
        : positions_(std::move(positions)), dipoles_(std::move(dipoles)), selected_(std::move(selected)) {
        if (positions_.empty()) throw std::invalid_argument("config: at least one atom is required");
        if (positions_.size() != dipoles_.size())
            throw std::invalid_argument("config: positions and dipoles differ in length");
        for (std::size_t i = 0; i < positions_.size(); ++i) {
            if (!positions_[i].allFinite())
                throw std::invalid_argument("config: position of atom " + std::to_string(i) + " is not finite");
            if (!dipoles_[i].allFinite() || std::abs(dipoles_[i].norm() - 1.0) > 1e-12)
                throw std::invalid_argument("config: dipole of atom " + std::to_string(i) + " is not a unit vector");
        }
        if (selected_.empty()) {
            selected_.resize(positions_.size());
            for (std::size_t i = 0; i < selected_.size(); ++i) selected_[i] = i;
        }
        std::vector<bool> seen(positions_.size(), false);
        for (auto idx : selected_) {
            if (idx >= positions_.size())
                throw std::invalid_argument("config: selected index " + std::to_string(idx) + " out of range");
            if (seen[idx]) throw std::invalid_argument("config: selected index " + std::to_string(idx) + " repeated");
            seen[idx] = true;
        }
        for (std::size_t i = 0; i < positions_.size(); ++i)
            if (!seen[i]) unselected_.push_back(i);
    }

    std::size_t size() const { return positions_.size(); }
    std::size_t n_selected() const { return selected_.size(); }
    const std::vector<Vec3>& positions() const { return positions_; }
    const std::vector<Vec3>& dipoles() const { return dipoles_; }
    const std::vector<std::size_t>& selected() const { return selected_; }
    const std::vector<std::size_t>& unselected() const { return unselected_; }

    bool dipoles_parallel(std::size_t i, std::size_t j) const {
        return dipoles_[i].dot(dipoles_[j]) >= 1.0 - 1e-12;
    }
    bool all_dipoles_parallel() const {
        for (std::size_t i = 1; i < size(); ++i)
            if (!dipoles_parallel(0, i)) return false;
        return true;
    }

private:
    std::vector<Vec3> positions_;
    std::vector<Vec3> dipoles_;
    std::vector<std::size_t> selected_;
    std::vector<std::size_t> unselected_;
};

/// Lays atoms out row by row (x fastest) in the z = 0 plane, all with the same dipole.
inline AtomConfig build_config(const LatticeSpec& spec, const Vec3& dipole = Vec3::UnitZ()) {
    if (spec.nx < 1) throw std::invalid_argument("lattice: nx must be positive");
    if (spec.kind == LatticeKind::square2d && spec.ny < 1) throw std::invalid_argument("lattice: ny must be positive");
    if (!(spec.spacing > 0.0) || !std::isfinite(spec.spacing))
        throw std::invalid_argument("lattice: spacing must be positive");
    const int ny = spec.kind == LatticeKind::linear ? 1 : spec.ny;
    std::vector<Vec3> pos;
    pos.reserve(spec.atom_count());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < spec.nx; ++i) pos.emplace_back(i * spec.spacing, j * spec.spacing, 0.0);
    std::vector<Vec3> dip(pos.size(), dipole);
    return AtomConfig(std::move(pos), std::move(dip));
}

struct PairGeometry {
    double r{0.0};     // |R_i - R_j|
    double theta{0.0}; // angle between the common dipole and R_i - R_j
};

/// Distance and dipole angle of atoms i and j. Requires parallel dipoles.
/// Coincident atoms (including i == j) give (0, 0).
inline PairGeometry pair_geometry(const AtomConfig& cfg, std::size_t i, std::size_t j) {
    if (i >= cfg.size() || j >= cfg.size()) throw std::out_of_range("pair_geometry: atom index out of range");
    if (!cfg.dipoles_parallel(i, j))
        throw std::invalid_argument("pair_geometry: dipoles of atoms " + std::to_string(i) + " and " +
                                    std::to_string(j) + " are not parallel");
    if (i == j) return {};
    const Vec3 sep = cfg.positions()[i] - cfg.positions()[j];
    const double r = sep.norm();
    if (r == 0.0) return {};
    const double c = std::clamp(cfg.dipoles()[i].dot(sep) / r, -1.0, 1.0);
    return {r, std::acos(c)};
}

} // namespace decometric
