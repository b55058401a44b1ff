#pragma once

#include <string>
#include <vector>

#include "fibergap/bounds.hpp"
#include "fibergap/hamiltonian.hpp"

namespace fibergap {

// Time reversal theta = (sigma_2 (x) 1) J on C^2 (x) Fock, where J is entrywise
// complex conjugation in the occupation basis. theta^2 = -1.

CVector apply_theta(const CVector& psi);

/// (sigma_2 (x) 1) conj(H) (sigma_2 (x) 1), i.e. theta H theta^{-1} as a matrix.
CMatrix conjugate_by_theta(const CMatrix& h);

struct RealityResiduals {
    std::array<double, 3> P_f{};  // ||conj(X) - X||_max per component
    std::array<double, 3> A0{};
    std::array<double, 3> B0{};   // ||conj(B) + B||_max (anti-reality)
    double H_f = 0.0;
    double scale = 0.0;           // max entry over all checked operators

    double worst() const;
};

RealityResiduals check_reality_relations(const FiberModel& model);

/// ||theta H theta^{-1} - H||_F / ||H||_F for an operator on C^2 (x) Fock.
double check_theta_commutes(const CMatrix& h);

struct KramersCertificate {
    enum class Status { certified, failed, hypotheses_not_met, inconclusive };
    Status status = Status::inconclusive;
    int ground_multiplicity = 0;
    double pairing_residual = 0.0;  // ||H (theta v) - E (theta v)|| / ||H||
    double overlap = 0.0;           // |<v, theta v>|
    double commutation_residual = 0.0;
    int count_below_sigma = 0;
    bool sandwich_holds = false;
    std::string note;
};

std::string to_string(KramersCertificate::Status s);

/// Ground multiplicity >= 2 (clustering), theta pairs the ground vector with
/// an orthogonal ground vector, and count_below(H, sigma_minus) <= 2 under a
/// verified lower sandwich: together these pin the multiplicity to exactly 2.
/// `perturbation`, when nonempty, is added to H(P) (negative controls).
KramersCertificate kramers_certificate(const FiberModel& model, const Vec3& P, const BoundConstants& c,
                                       const CMatrix& perturbation = {}, double degeneracy_tol = 1e-8);

/// Position-grid toy: a spin-1/2 charge on a reflection-symmetric 1-D grid
/// x_j along (1,0,0), coupled to the same photon modes through A(x) and
/// B(x). Built as sqrt((sigma . (p + A(x)))^2 + M^2) + V(x) + H_f.
struct PositionToy {
    std::vector<double> x;    // grid points, x.size() >= 2, symmetric about 0
    std::vector<double> V;    // potential on the grid
    CMatrix H;                // on C^2 (x) l^2(grid) (x) Fock
    std::size_t fock_dim = 0;
};

PositionToy build_position_toy(const FiberModel& model, std::vector<double> x, std::vector<double> V);

/// theta_V = (sigma_2 (x) 1) R J with (R psi)(x) = psi(-x).
double position_theta_residual(const PositionToy& toy);

enum class RelatedModel { non_relativistic, position_even_V };

/// Commutation residual for H_NR(P) or a position toy. The position variant
/// rejects a non-even V with std::invalid_argument; use
/// position_theta_residual directly for negative controls.
double check_theta_commutes_related(RelatedModel which, const FiberModel& model, const Vec3& P,
                                    const std::vector<double>& x = {}, const std::vector<double>& V = {});

}  // namespace fibergap
