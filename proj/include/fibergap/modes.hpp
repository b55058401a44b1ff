#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fibergap/linalg.hpp"

namespace fibergap {

/// Antipodally symmetric direction sets on the unit sphere. Every set lists
/// directions in (d, -d) pairs, so the resulting grid is closed under k -> -k.
enum class DirectionSet {
    pair2,       // +-x, weight 2 pi each
    axes6,       // +-x, +-y, +-z, weight 4 pi / 6 each
    lebedev14,   // axes (4 pi / 15) + cube diagonals (4 pi * 3 / 40)
};

std::string to_string(DirectionSet set);
DirectionSet direction_set_from_string(const std::string& name);

struct GridSpec {
    int n_shells = 2;
    DirectionSet directions = DirectionSet::axes6;
    /// Radial nodes live on [delta, Lambda] with delta = radial_floor * Lambda.
    double radial_floor = 1e-3;
    /// Multiply form factors by exp(-|k|^2 / (2 Lambda^2)); off by default.
    bool smooth_envelope = false;
};

struct ModelParams {
    double e = 0.05;
    double gamma = 0.5;
    double M = 1.0;
    double m_ph = 0.5;
    double Lambda = 1.0;
    GridSpec grid;
    int N_max = 1;
    std::size_t max_fock_dim = 4096;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;

    /// gamma < 1 and m_ph > 0: the regime where a uniform gap is expected.
    bool gap_hypotheses() const { return gamma < 1.0 && m_ph > 0.0; }
};

struct Mode {
    Vec3 k;
    int polarization;  // 1 or 2
    Vec3 eps;
    double weight;
};

using ModeSet = std::vector<Mode>;

struct FormFactorTable {
    std::vector<Vec3> f;          // e sqrt(w) eps / sqrt(2 (2 pi)^3 omega)
    std::vector<double> scalar;   // |f_m|, the prefactor g_m with f_m = g_m eps_m
    std::vector<double> omega;

    std::size_t size() const { return f.size(); }
};

struct CouplingNorms {
    double n_half = 0.0;   // (sum |f|^2 / omega)^{1/2}
    double n_one = 0.0;    // (sum (1 + omega^{-1/2})^2 |f|^2)^{1/2}
    double n_kin = 0.0;    // (sum |k| |f|^2)^{1/2}
    double n_curl = 0.0;   // (sum (1 + omega^{-1/2})^2 |k|^2 |f|^2)^{1/2}
    Vec3 n_half_component = Vec3::Zero();  // (sum f_j^2 / omega)^{1/2} per axis
    Vec3 n_one_component = Vec3::Zero();
};

double dispersion(const Vec3& k, double m_ph);

/// Orthonormal polarization pair with {k/|k|, eps1, eps2} right-handed:
/// eps1 = normalize(a x k), eps2 = normalize(k x eps1), a = (0,0,1), falling
/// back to a = (0,1,0) when |k x (0,0,1)| < 1e-9 |k|.
std::pair<Vec3, Vec3> dreibein(const Vec3& k);

struct UnitDirection {
    Vec3 n;
    double weight;
};
std::vector<UnitDirection> directions(DirectionSet set);

ModeSet build_mode_set(const ModelParams& params);

FormFactorTable form_factors(const ModeSet& modes, const ModelParams& params);

CouplingNorms coupling_norms(const ModeSet& modes, const FormFactorTable& table);

/// CSV with header k_x,k_y,k_z,lambda,eps_x,eps_y,eps_z,weight.
void write_modes_csv(std::ostream& os, const ModeSet& modes);

}  // namespace fibergap
