#include "fibergap/kramers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fibergap {

namespace {

CMatrix sigma2_lift(Eigen::Index dim) {
    return kron(pauli()[1], CMatrix::Identity(dim / 2, dim / 2));
}

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

CVector apply_theta(const CVector& psi) {
    if (psi.size() % 2 != 0) throw std::invalid_argument("apply_theta: dimension must be even");
    const Eigen::Index half = psi.size() / 2;
    const Complex i(0.0, 1.0);
    CVector out(psi.size());
    // sigma_2 = [[0, -i], [i, 0]] acting on conj(psi)
    out.head(half) = -i * psi.tail(half).conjugate();
    out.tail(half) = i * psi.head(half).conjugate();
    return out;
}

CMatrix conjugate_by_theta(const CMatrix& h) {
    if (h.rows() % 2 != 0) throw std::invalid_argument("conjugate_by_theta: dimension must be even");
    const CMatrix s = sigma2_lift(h.rows());
    return s * h.conjugate() * s;
}

double RealityResiduals::worst() const {
    double w = H_f;
    for (int j = 0; j < 3; ++j) w = std::max({w, P_f[j], A0[j], B0[j]});
    return w;
}

RealityResiduals check_reality_relations(const FiberModel& model) {
    RealityResiduals r;
    double scale = model.Hf.size() ? model.Hf.cwiseAbs().maxCoeff() : 0.0;
    for (int j = 0; j < 3; ++j) {
        const CMatrix pf = diagonal(model.Pf[j]);
        r.P_f[j] = max_abs(pf.conjugate() - pf);
        r.A0[j] = max_abs(model.A0[j].conjugate() - model.A0[j]);
        r.B0[j] = max_abs(model.B0[j].conjugate() + model.B0[j]);
        scale = std::max({scale, max_abs(pf), max_abs(model.A0[j]), max_abs(model.B0[j])});
    }
    const CMatrix hf = diagonal(model.Hf);
    r.H_f = max_abs(hf.conjugate() - hf);
    r.scale = scale;
    return r;
}

double check_theta_commutes(const CMatrix& h) {
    const double norm = h.norm();
    if (norm == 0.0) return 0.0;
    return (conjugate_by_theta(h) - h).norm() / norm;
}

std::string to_string(KramersCertificate::Status s) {
    switch (s) {
        case KramersCertificate::Status::certified: return "certified";
        case KramersCertificate::Status::failed: return "failed";
        case KramersCertificate::Status::hypotheses_not_met: return "hypotheses not met";
        case KramersCertificate::Status::inconclusive: return "inconclusive";
    }
    return "unknown";
}

KramersCertificate kramers_certificate(const FiberModel& model, const Vec3& P, const BoundConstants& c,
                                       const CMatrix& perturbation, double degeneracy_tol) {
    KramersCertificate cert;
    if (!model.params.gap_hypotheses()) {
        cert.status = KramersCertificate::Status::hypotheses_not_met;
        cert.note = "requires gamma < 1 and m_ph > 0";
        return cert;
    }

    CMatrix h = build_H(model, P).matrix;
    if (perturbation.size() != 0) h += perturbation;
    cert.commutation_residual = check_theta_commutes(h);

    const auto dec = hermitian_eigen(h);
    std::vector<double> vals(dec.values.data(), dec.values.data() + dec.values.size());
    const auto clusters = cluster_degeneracy(vals, degeneracy_tol);
    cert.ground_multiplicity = clusters.front().multiplicity;
    const double E = clusters.front().value;
    const double scale = std::max(std::abs(vals.front()), std::abs(vals.back()));

    const CVector v = dec.vectors.col(0);
    const CVector tv = apply_theta(v);
    cert.overlap = std::abs(v.dot(tv));
    cert.pairing_residual = (h * tv - E * tv).norm() / scale;

    // Off-axis momenta use the direction-free constant.
    BoundConstants cc = c;
    const bool on_axis = std::abs(P(1)) == 0.0 && std::abs(P(2)) == 0.0;
    if (!on_axis) cc.eC1 = cc.eC2 = c.eC_iso;
    const double P_abs = P.norm();
    const double sigma = cc.sigma_minus(model.params, P_abs);
    const RVector lminus = L_minus_diagonal(model, P_abs, cc);
    cert.sandwich_holds = check_op_leq(diagonal(RVector(lminus.replicate(2, 1))), h).holds;
    cert.count_below_sigma = count_below(dec.values, sigma);

    const bool paired = cert.ground_multiplicity >= 2 && cert.pairing_residual <= 1e-8 && cert.overlap <= 1e-8;
    if (!paired) {
        cert.status = KramersCertificate::Status::failed;
        cert.note = "ground state not Kramers paired";
    } else if (!cert.sandwich_holds) {
        cert.status = KramersCertificate::Status::inconclusive;
        cert.note = "lower sandwich failed";
    } else if (cert.count_below_sigma < 2) {
        cert.status = KramersCertificate::Status::inconclusive;
        cert.note = "E(P) is not below sigma_minus(P); coupling outside the counting regime";
    } else if (cert.count_below_sigma == 2 && cert.ground_multiplicity == 2) {
        cert.status = KramersCertificate::Status::certified;
    } else {
        cert.status = KramersCertificate::Status::failed;
        cert.note = "more than two states below sigma_minus despite the sandwich";
    }
    return cert;
}

PositionToy build_position_toy(const FiberModel& model, std::vector<double> x, std::vector<double> V) {
    const std::size_t L = x.size();
    if (L < 2 || V.size() != L) throw std::invalid_argument("position toy: need >= 2 grid points and one V per point");
    const double h = x[1] - x[0];
    for (std::size_t i = 0; i < L; ++i) {
        if (std::abs(x[i] + x[L - 1 - i]) > 1e-12 * std::max(1.0, std::abs(x[i])))
            throw std::invalid_argument("position toy: grid must be symmetric about 0");
        if (i > 0 && std::abs((x[i] - x[i - 1]) - h) > 1e-12 * std::abs(h))
            throw std::invalid_argument("position toy: grid must be uniform");
    }

    const auto nf = static_cast<Eigen::Index>(model.fock_dim());
    const auto nl = static_cast<Eigen::Index>(L);
    const Complex i(0.0, 1.0);

    // p = -i d/dx by central differences with open ends.
    CMatrix p = CMatrix::Zero(nl, nl);
    for (Eigen::Index j = 0; j + 1 < nl; ++j) {
        p(j, j + 1) = -i / (2.0 * h);
        p(j + 1, j) = i / (2.0 * h);
    }

    Triple v;
    for (int c = 0; c < 3; ++c) v[c] = CMatrix::Zero(nl * nf, nl * nf);
    v[0] += kron(p, CMatrix::Identity(nf, nf));
    std::vector<Complex> coeff(model.table.size());
    for (Eigen::Index j = 0; j < nl; ++j) {
        for (int c = 0; c < 3; ++c) {
            for (std::size_t m = 0; m < model.table.size(); ++m) {
                const double phase = model.modes[m].k(0) * x[static_cast<std::size_t>(j)];
                coeff[m] = model.table.f[m](c) * std::exp(-i * phase);
            }
            v[c].block(j * nf, j * nf, nf, nf) += field_sum(model.basis, std::span<const Complex>(coeff));
        }
    }

    const auto& s = pauli();
    const CMatrix sv = kron(s[0], v[0]) + kron(s[1], v[1]) + kron(s[2], v[2]);
    CMatrix t = sv * sv;
    t.diagonal().array() += model.params.M * model.params.M;
    CMatrix H = op_sqrt_eig(t);

    RVector local(nl * nf);
    for (Eigen::Index j = 0; j < nl; ++j)
        local.segment(j * nf, nf) = model.Hf.array() + V[static_cast<std::size_t>(j)];
    H.diagonal() += RVector(local.replicate(2, 1)).cast<Complex>();

    return {std::move(x), std::move(V), std::move(H), model.fock_dim()};
}

double position_theta_residual(const PositionToy& toy) {
    const auto nl = static_cast<Eigen::Index>(toy.x.size());
    const auto nf = static_cast<Eigen::Index>(toy.fock_dim);
    CMatrix reflect = CMatrix::Zero(nl, nl);
    for (Eigen::Index j = 0; j < nl; ++j) reflect(j, nl - 1 - j) = 1.0;
    const CMatrix u = kron(pauli()[1], kron(reflect, CMatrix::Identity(nf, nf)));
    const double norm = toy.H.norm();
    return (u * toy.H.conjugate() * u.adjoint() - toy.H).norm() / norm;
}

double check_theta_commutes_related(RelatedModel which, const FiberModel& model, const Vec3& P,
                                    const std::vector<double>& x, const std::vector<double>& V) {
    if (which == RelatedModel::non_relativistic) return check_theta_commutes(build_H_NR(model, P).matrix);
    const std::size_t L = V.size();
    for (std::size_t j = 0; j < L; ++j) {
        if (std::abs(V[j] - V[L - 1 - j]) > 1e-14 * std::max(1.0, std::abs(V[j])))
            throw std::invalid_argument("position toy: V must be even, V(x) = V(-x)");
    }
    return position_theta_residual(build_position_toy(model, x, V));
}

}  // namespace fibergap
