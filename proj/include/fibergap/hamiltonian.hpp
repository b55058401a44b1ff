#pragma once

#include <array>
#include <cstddef>

#include "fibergap/fock.hpp"
#include "fibergap/linalg.hpp"
#include "fibergap/modes.hpp"

namespace fibergap {

/// Operator on C^s (x) truncated Fock space; spin index slow, Fock index fast.
struct SpinorOperator {
    int spin_dim = 1;
    std::size_t fock_dim = 0;
    CMatrix matrix;

    std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
    CMatrix block(int a, int b) const;
};

using Triple = std::array<CMatrix, 3>;

/// Pauli matrices sigma_1..3; sigma_2 = [[0, -i], [i, 0]].
const Triple& pauli();

/// Standard representation: alpha_j = offdiag(sigma_j, sigma_j), beta = diag(1, 1, -1, -1).
const Triple& dirac_alpha();
const CMatrix& dirac_beta();

/// A(0)_j = field_sum(f_{m,j}); real symmetric.
Triple build_A0(const FockBasis& basis, const FormFactorTable& table);

/// B(0)_j = sum_m i (k_m x f_m)_j (a_m - a_m^dagger); Hermitian, purely
/// imaginary. The coupling e is already inside f_m.
Triple build_B0(const FockBasis& basis, const ModeSet& modes, const FormFactorTable& table);

/// Everything P-independent that the fiber operators are assembled from.
struct FiberModel {
    ModelParams params;
    ModeSet modes;
    FormFactorTable table;
    CouplingNorms norms;
    FockBasis basis;
    Triple A0;
    Triple B0;
    std::array<RVector, 3> Pf;  // diagonals of dGamma(k_j)
    RVector Hf;                 // diagonal of dGamma(omega)
    RVector Nf;                 // diagonal of dGamma(1)

    static FiberModel build(const ModelParams& params);
    /// Same modes with a different truncation or coupling.
    static FiberModel build(const ModelParams& params, const ModeSet& modes);

    std::size_t fock_dim() const { return basis.dim(); }
};

/// v_j = P_j - P_f,j + A(0)_j.
Triple build_v(const FiberModel& model, const Vec3& P);

enum class TForm { direct, expanded };

/// T(P) on C^2 (x) Fock.
/// direct:   (sigma . v)^2
/// expanded: (sum_j v_j^2) (x) 1 + i sigma . (v ^ v), with (v ^ v)_k = eps_kij v_i v_j
/// built from the truncated v. The two agree to rounding; the second term
/// equals sigma . B(0) except on the top photon-number sector.
SpinorOperator build_T(const FiberModel& model, const Vec3& P, TForm form = TForm::direct);

/// sigma . B(0) lifted to C^2 (x) Fock.
CMatrix spin_field_coupling(const FiberModel& model);

/// D(P) = alpha . v + mass beta on C^4 (x) Fock.
SpinorOperator build_D(const FiberModel& model, const Vec3& P, double mass);
SpinorOperator build_D(const FiberModel& model, const Vec3& P);

/// |D(P)| = sqrt(T(P) + M^2) on C^2 (x) Fock.
CMatrix abs_D(const FiberModel& model, const Vec3& P);

/// H(P) = gamma |D(P)| + H_f.
SpinorOperator build_H(const FiberModel& model, const Vec3& P);

/// Spinless H_SL(P) = gamma sqrt(v . v + M^2) + H_f on Fock only.
CMatrix build_H_SL(const FiberModel& model, const Vec3& P);

/// Diagonal of the free fiber operator gamma sqrt((P - P_f)^2 + M^2) + H_f on Fock.
RVector free_fiber_diagonal(const FiberModel& model, const Vec3& P);

/// H_0(P) lifted to C^2 (x) Fock.
SpinorOperator build_H0(const FiberModel& model, const Vec3& P);

/// || (|D(P)| - |D_0(P)|) (H_0(P) + 1)^{-1} ||.
double interaction_norm(const FiberModel& model, const Vec3& P);

/// Non-relativistic fiber operator
/// (P - P_f + A(0))^2 / 2M + sigma . B(0) / 2M + H_f on C^2 (x) Fock.
SpinorOperator build_H_NR(const FiberModel& model, const Vec3& P);

}  // namespace fibergap
