#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fibergap {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a matrix handed to a square root has eigenvalues below the
/// clamping tolerance.
class NotPositiveSemidefinite : public NumericalError {
public:
    NotPositiveSemidefinite(double min_eig, double scale);
    double min_eigenvalue;
    double scale;
};

class QuadratureNotConverged : public NumericalError {
public:
    QuadratureNotConverged(double last_change, double tol);
    double last_change;
    double tol;
};

class EigensolverFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Relative PSD clamping tolerance used by every square root in the project.
inline constexpr double kPsdTolerance = 1e-10;

/// max|H - H^dagger| / max(1e-300, max|H|).
double hermiticity_defect(const CMatrix& h);

/// Kronecker product a (x) b; the first factor is the slow index.
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Lift a Fock-space operator to (C^s) (x) Fock as Id_s (x) op.
CMatrix lift_spin(const CMatrix& fock_op, int spin_dim);

CMatrix diagonal(const RVector& d);

struct EigenDecomposition {
    RVector values;   // ascending
    CMatrix vectors;  // columns
};

/// Full Hermitian eigendecomposition. Only the Hermitian part of h is used.
EigenDecomposition hermitian_eigen(const CMatrix& h);

RVector hermitian_eigenvalues(const CMatrix& h);

double min_eigenvalue(const CMatrix& h);

/// Largest |eigenvalue| of a Hermitian matrix.
double hermitian_norm(const CMatrix& h);

/// Largest singular value of an arbitrary matrix.
double operator_norm(const CMatrix& x);

/// Apply a real function to a Hermitian matrix through its spectrum.
CMatrix hermitian_function(const CMatrix& h, const std::function<double(double)>& f);

/// Reference PSD square root. Eigenvalues in [-tol_psd * ||H||, 0) are
/// clamped to zero; anything lower throws NotPositiveSemidefinite.
CMatrix op_sqrt_eig(const CMatrix& h, double tol_psd = kPsdTolerance);

struct SqrtQuadratureOptions {
    double tol = 1e-10;
    /// Resolvent scale c in t = c * s / (1 - s). Non-positive selects the
    /// smallest diagonal entry of the input.
    double scale = 0.0;
    int initial_panels = 2;
    int nodes_per_panel = 8;
    int max_doublings = 10;
};

struct SqrtQuadratureResult {
    CMatrix value;
    int panels = 0;
    double last_change = 0.0;
};

/// Square root from the resolvent representation
///   sqrt(X) = (1/pi) int_0^inf t^{-1/2} X (t + X)^{-1} dt,
/// evaluated with composite Gauss-Legendre panels after t = c tan^2(theta),
/// which turns the integrand into the smooth
///   (2 sqrt(c) / pi) X (c sin^2 theta + X cos^2 theta)^{-1}  on [0, pi/2].
/// Panels are doubled until the max-abs change falls below tol.
/// Requires X strictly positive definite.
SqrtQuadratureResult op_sqrt_quad_detailed(const CMatrix& x, const SqrtQuadratureOptions& opts = {});

CMatrix op_sqrt_quad(const CMatrix& x, double tol);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int n);

}  // namespace fibergap
