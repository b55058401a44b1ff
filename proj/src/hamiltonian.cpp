#include "fibergap/hamiltonian.hpp"

#include <cmath>
#include <vector>

namespace fibergap {

CMatrix SpinorOperator::block(int a, int b) const {
    const auto n = static_cast<Eigen::Index>(fock_dim);
    return matrix.block(a * n, b * n, n, n);
}

const Triple& pauli() {
    static const Triple sigma = [] {
        const Complex i(0.0, 1.0);
        Triple s;
        s[0] = CMatrix(2, 2);
        s[0] << 0.0, 1.0, 1.0, 0.0;
        s[1] = CMatrix(2, 2);
        s[1] << 0.0, -i, i, 0.0;
        s[2] = CMatrix(2, 2);
        s[2] << 1.0, 0.0, 0.0, -1.0;
        return s;
    }();
    return sigma;
}

const Triple& dirac_alpha() {
    static const Triple alpha = [] {
        CMatrix off = CMatrix::Zero(2, 2);
        off << 0.0, 1.0, 1.0, 0.0;
        Triple a;
        for (int j = 0; j < 3; ++j) a[j] = kron(off, pauli()[j]);
        return a;
    }();
    return alpha;
}

const CMatrix& dirac_beta() {
    static const CMatrix beta = [] {
        CMatrix b = CMatrix::Zero(4, 4);
        b(0, 0) = b(1, 1) = 1.0;
        b(2, 2) = b(3, 3) = -1.0;
        return b;
    }();
    return beta;
}

Triple build_A0(const FockBasis& basis, const FormFactorTable& table) {
    Triple A;
    std::vector<double> c(table.size());
    for (int j = 0; j < 3; ++j) {
        for (std::size_t m = 0; m < table.size(); ++m) c[m] = table.f[m](j);
        A[j] = field_sum(basis, std::span<const double>(c));
    }
    return A;
}

Triple build_B0(const FockBasis& basis, const ModeSet& modes, const FormFactorTable& table) {
    const Complex i(0.0, 1.0);
    Triple B;
    std::vector<Complex> c(table.size());
    for (int j = 0; j < 3; ++j) {
        for (std::size_t m = 0; m < table.size(); ++m) {
            const Vec3 curl = modes[m].k.cross(table.f[m]);
            // field_sum uses conj(c) a + c a^dagger.
            c[m] = -i * curl(j);
        }
        B[j] = field_sum(basis, std::span<const Complex>(c));
    }
    return B;
}

FiberModel FiberModel::build(const ModelParams& params) {
    return build(params, build_mode_set(params));
}

FiberModel FiberModel::build(const ModelParams& params, const ModeSet& modes) {
    params.validate();
    FormFactorTable table = form_factors(modes, params);
    CouplingNorms norms = coupling_norms(modes, table);
    FockBasis basis(modes.size(), params.N_max, params.max_fock_dim);
    FiberModel model{params, modes, std::move(table), norms, std::move(basis), {}, {}, {}, {}, {}};
    model.A0 = build_A0(model.basis, model.table);
    model.B0 = build_B0(model.basis, model.modes, model.table);
    std::vector<double> c(modes.size());
    for (int j = 0; j < 3; ++j) {
        for (std::size_t m = 0; m < modes.size(); ++m) c[m] = modes[m].k(j);
        model.Pf[j] = dgamma_diagonal(model.basis, c);
    }
    model.Hf = dgamma_diagonal(model.basis, model.table.omega);
    std::vector<double> ones(modes.size(), 1.0);
    model.Nf = dgamma_diagonal(model.basis, ones);
    return model;
}

Triple build_v(const FiberModel& model, const Vec3& P) {
    Triple v;
    for (int j = 0; j < 3; ++j) {
        RVector d = P(j) - model.Pf[j].array();
        v[j] = model.A0[j];
        v[j].diagonal() += d.cast<Complex>();
    }
    return v;
}

namespace {

CMatrix sigma_dot(const Triple& v) {
    const auto& s = pauli();
    return kron(s[0], v[0]) + kron(s[1], v[1]) + kron(s[2], v[2]);
}

CMatrix sum_of_squares(const Triple& v) {
    return v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
}

}  // namespace

SpinorOperator build_T(const FiberModel& model, const Vec3& P, TForm form) {
    const Triple v = build_v(model, P);
    const std::size_t n = model.fock_dim();
    if (form == TForm::direct) {
        const CMatrix sv = sigma_dot(v);
        return {2, n, sv * sv};
    }
    Triple wedge;
    wedge[0] = v[1] * v[2] - v[2] * v[1];
    wedge[1] = v[2] * v[0] - v[0] * v[2];
    wedge[2] = v[0] * v[1] - v[1] * v[0];
    const Complex i(0.0, 1.0);
    CMatrix t = lift_spin(sum_of_squares(v), 2) + i * sigma_dot(wedge);
    return {2, n, std::move(t)};
}

CMatrix spin_field_coupling(const FiberModel& model) {
    return sigma_dot(model.B0);
}

SpinorOperator build_D(const FiberModel& model, const Vec3& P, double mass) {
    const Triple v = build_v(model, P);
    const auto& alpha = dirac_alpha();
    const std::size_t n = model.fock_dim();
    CMatrix d = kron(alpha[0], v[0]) + kron(alpha[1], v[1]) + kron(alpha[2], v[2]);
    d += mass * kron(dirac_beta(), CMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
    return {4, n, std::move(d)};
}

SpinorOperator build_D(const FiberModel& model, const Vec3& P) {
    return build_D(model, P, model.params.M);
}

CMatrix abs_D(const FiberModel& model, const Vec3& P) {
    CMatrix t = build_T(model, P).matrix;
    t.diagonal().array() += model.params.M * model.params.M;
    return op_sqrt_eig(t);
}

SpinorOperator build_H(const FiberModel& model, const Vec3& P) {
    CMatrix h = model.params.gamma * abs_D(model, P);
    const RVector hf2 = RVector(model.Hf.replicate(2, 1));
    h.diagonal() += hf2.cast<Complex>();
    return {2, model.fock_dim(), std::move(h)};
}

CMatrix build_H_SL(const FiberModel& model, const Vec3& P) {
    CMatrix s = sum_of_squares(build_v(model, P));
    s.diagonal().array() += model.params.M * model.params.M;
    CMatrix h = model.params.gamma * op_sqrt_eig(s);
    h.diagonal() += model.Hf.cast<Complex>();
    return h;
}

RVector free_fiber_diagonal(const FiberModel& model, const Vec3& P) {
    const auto& p = model.params;
    RVector kin2 = RVector::Constant(static_cast<Eigen::Index>(model.fock_dim()), p.M * p.M);
    for (int j = 0; j < 3; ++j) kin2.array() += (P(j) - model.Pf[j].array()).square();
    return p.gamma * kin2.array().sqrt() + model.Hf.array();
}

SpinorOperator build_H0(const FiberModel& model, const Vec3& P) {
    const RVector d = free_fiber_diagonal(model, P);
    return {2, model.fock_dim(), diagonal(RVector(d.replicate(2, 1)))};
}

double interaction_norm(const FiberModel& model, const Vec3& P) {
    const auto& p = model.params;
    RVector free_abs = RVector::Constant(static_cast<Eigen::Index>(model.fock_dim()), p.M * p.M);
    for (int j = 0; j < 3; ++j) free_abs.array() += (P(j) - model.Pf[j].array()).square();
    free_abs = free_abs.array().sqrt();
    const RVector resolvent = (free_fiber_diagonal(model, P).array() + 1.0).inverse();

    CMatrix diff = abs_D(model, P);
    diff.diagonal() -= RVector(free_abs.replicate(2, 1)).cast<Complex>();
    const RVector r2 = resolvent.replicate(2, 1);
    return operator_norm(diff * r2.asDiagonal());
}

SpinorOperator build_H_NR(const FiberModel& model, const Vec3& P) {
    const double inv2m = 1.0 / (2.0 * model.params.M);
    CMatrix h = inv2m * (lift_spin(sum_of_squares(build_v(model, P)), 2) + spin_field_coupling(model));
    h.diagonal() += RVector(model.Hf.replicate(2, 1)).cast<Complex>();
    return {2, model.fock_dim(), std::move(h)};
}

}  // namespace fibergap
