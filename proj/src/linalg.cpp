#include "fibergap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fibergap {

namespace {

std::string psd_message(double min_eig, double scale) {
    std::ostringstream os;
    os << "matrix is not positive semidefinite: min eigenvalue " << min_eig
       << " below -tol * " << scale;
    return os.str();
}

std::string quad_message(double change, double tol) {
    std::ostringstream os;
    os << "resolvent quadrature stalled: last change " << change << " > tol " << tol;
    return os.str();
}

}  // namespace

NotPositiveSemidefinite::NotPositiveSemidefinite(double min_eig, double s)
    : NumericalError(psd_message(min_eig, s)), min_eigenvalue(min_eig), scale(s) {}

QuadratureNotConverged::QuadratureNotConverged(double change, double t)
    : NumericalError(quad_message(change, t)), last_change(change), tol(t) {}

double hermiticity_defect(const CMatrix& h) {
    if (h.size() == 0) return 0.0;
    const double scale = h.cwiseAbs().maxCoeff();
    const double defect = (h - h.adjoint()).cwiseAbs().maxCoeff();
    return defect / std::max(scale, 1e-300);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix lift_spin(const CMatrix& fock_op, int spin_dim) {
    return kron(CMatrix::Identity(spin_dim, spin_dim), fock_op);
}

CMatrix diagonal(const RVector& d) {
    CMatrix out = CMatrix::Zero(d.size(), d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) out(i, i) = d(i);
    return out;
}

EigenDecomposition hermitian_eigen(const CMatrix& h) {
    const CMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
    if (solver.info() != Eigen::Success)
        throw EigensolverFailure("self-adjoint eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

RVector hermitian_eigenvalues(const CMatrix& h) {
    const CMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw EigensolverFailure("self-adjoint eigensolver did not converge");
    return solver.eigenvalues();
}

double min_eigenvalue(const CMatrix& h) {
    if (h.size() == 0) return 0.0;
    return hermitian_eigenvalues(h)(0);
}

double hermitian_norm(const CMatrix& h) {
    if (h.size() == 0) return 0.0;
    const RVector ev = hermitian_eigenvalues(h);
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double operator_norm(const CMatrix& x) {
    if (x.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(x);
    return svd.singularValues()(0);
}

CMatrix hermitian_function(const CMatrix& h, const std::function<double(double)>& f) {
    const auto dec = hermitian_eigen(h);
    RVector fv(dec.values.size());
    for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(dec.values(i));
    return dec.vectors * fv.asDiagonal() * dec.vectors.adjoint();
}

CMatrix op_sqrt_eig(const CMatrix& h, double tol_psd) {
    const auto dec = hermitian_eigen(h);
    const Eigen::Index n = dec.values.size();
    if (n == 0) return h;
    const double scale = std::max(std::abs(dec.values(0)), std::abs(dec.values(n - 1)));
    if (dec.values(0) < -tol_psd * scale) throw NotPositiveSemidefinite(dec.values(0), scale);
    RVector root(n);
    for (Eigen::Index i = 0; i < n; ++i) root(i) = std::sqrt(std::max(dec.values(i), 0.0));
    return dec.vectors * root.asDiagonal() * dec.vectors.adjoint();
}

GaussLegendreRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

namespace {

CMatrix resolvent_integral(const CMatrix& x, double c, int panels, const GaussLegendreRule& rule) {
    const Eigen::Index n = x.rows();
    const CMatrix id = CMatrix::Identity(n, n);
    const double upper = std::numbers::pi / 2.0;
    const double width = upper / panels;
    CMatrix sum = CMatrix::Zero(n, n);
    for (int p = 0; p < panels; ++p) {
        const double a = p * width;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double theta = a + 0.5 * width * (rule.nodes[q] + 1.0);
            const double w = 0.5 * width * rule.weights[q];
            const double s2 = std::sin(theta) * std::sin(theta);
            const double c2 = std::cos(theta) * std::cos(theta);
            const CMatrix denom = c * s2 * id + c2 * x;
            // X and the denominator commute, so solve(denom, X) = X denom^{-1}.
            sum += w * denom.ldlt().solve(x);
        }
    }
    return (2.0 * std::sqrt(c) / std::numbers::pi) * sum;
}

}  // namespace

SqrtQuadratureResult op_sqrt_quad_detailed(const CMatrix& x_in, const SqrtQuadratureOptions& opts) {
    const CMatrix x = 0.5 * (x_in + x_in.adjoint());
    if (x.rows() == 0) return {x, 0, 0.0};
    const double min_eig = min_eigenvalue(x);
    if (!(min_eig > 0.0)) throw NotPositiveSemidefinite(min_eig, hermitian_norm(x));
    double c = opts.scale;
    if (c <= 0.0) c = x.diagonal().real().minCoeff();
    if (c <= 0.0) c = min_eig;

    const auto rule = gauss_legendre(opts.nodes_per_panel);
    int panels = std::max(1, opts.initial_panels);
    CMatrix prev = resolvent_integral(x, c, panels, rule);
    double change = 0.0;
    for (int d = 0; d < opts.max_doublings; ++d) {
        panels *= 2;
        CMatrix next = resolvent_integral(x, c, panels, rule);
        change = (next - prev).cwiseAbs().maxCoeff();
        prev = std::move(next);
        if (change < opts.tol) return {0.5 * (prev + prev.adjoint()), panels, change};
    }
    throw QuadratureNotConverged(change, opts.tol);
}

CMatrix op_sqrt_quad(const CMatrix& x, double tol) {
    SqrtQuadratureOptions opts;
    opts.tol = tol;
    return op_sqrt_quad_detailed(x, opts).value;
}

}  // namespace fibergap
