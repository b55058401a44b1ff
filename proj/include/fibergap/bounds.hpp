#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fibergap/hamiltonian.hpp"
#include "fibergap/spectral.hpp"

namespace fibergap {

/// Explicit constants for the comparison operators. Every entry is built from
/// coupling_norms, so all of them vanish linearly as e -> 0.
///
///   eC1 = eC2 = gamma n_half_x + gamma (3 pi / M) n_curl
///   eC3 = n_half,  e^2 C4 = 2 n_one^2 + n_kin^2
///
/// eC_iso replaces n_half_x by n_half and therefore holds for every direction
/// of P, not just u = (1, 0, 0).
struct BoundConstants {
    double eC1 = 0.0;
    double eC2 = 0.0;
    double eC3 = 0.0;
    double e2C4 = 0.0;
    double eC_iso = 0.0;
    double spinless = 0.0;   // gamma n_half_x, the constant of the spinless lower bound
    double spin_diff = 0.0;  // (3 pi / M) n_curl, bound on ||(|D_SL| - |D|)(H_f + 1)^{-1/2}||-type differences

    static BoundConstants from(const ModelParams& params, const CouplingNorms& norms);

    /// gamma sqrt(P^2 + M^2) + (1 - gamma - eC1) m_ph - eC2.
    double sigma_minus(const ModelParams& params, double P_abs) const;
};

/// Diagonal (Fock) of L_-(P) = gamma sqrt(P^2 + M^2) + (1 - gamma - eC1) H_f - eC2.
RVector L_minus_diagonal(const FiberModel& model, double P_abs, const BoundConstants& c);
CMatrix build_L_minus(const FiberModel& model, double P_abs, const BoundConstants& c);

/// Diagonal (Fock) of
/// L_+(P) = gamma [ (|P| u - P_f)^2 + 2|P| (H_f + n_half) + 4 (H_f + 1) P_f^2
///                 + n_one^2 + n_one^2 (H_f + 1) + H_f + n_kin^2 + M^2 ]^{1/2} + H_f.
RVector L_plus_diagonal(const FiberModel& model, double P_abs);
CMatrix build_L_plus(const FiberModel& model, double P_abs);

struct OrderCheck {
    bool holds = false;
    double min_eig = 0.0;  // smallest eigenvalue of B - A
    double scale = 0.0;    // max(||A||, ||B||)
};

/// A <= B up to tol * max(||A||, ||B||).
OrderCheck check_op_leq(const CMatrix& a, const CMatrix& b, double tol = 1e-9);

/// Number of eigenvalues strictly below threshold.
int count_below(const CMatrix& h, double threshold);
int count_below(const RVector& eigenvalues, double threshold);

struct EnergyEnvelope {
    double lower = 0.0;  // gamma sqrt(P^2 + M^2) - eC2
    double upper = 0.0;  // gamma sqrt((|P| + eC3)^2 + M^2 + e^2 C4)
};
EnergyEnvelope corollary_energy_bounds(const ModelParams& params, double P_abs, const BoundConstants& c);

/// Every per-P quantity of the sandwich argument, from one eigensolve of H(|P|u).
struct PointAnalysis {
    double P_abs = 0.0;
    RVector spectrum;  // full spectrum of H(|P|u)
    double E = 0.0;
    std::optional<double> E1;
    int ground_multiplicity = 0;
    double sigma_minus = 0.0;
    OrderCheck lower;  // L_- <= H
    OrderCheck upper;  // H <= L_+
    int count_H = 0;   // eigenvalues of H below sigma_minus
    int count_L = 0;   // eigenvalues of L_- (x) 1_2 below sigma_minus
    EnergyEnvelope envelope;
};

PointAnalysis analyze_point(const FiberModel& model, double P_abs, const BoundConstants& c,
                            double degeneracy_tol = 1e-8, double order_tol = 1e-9);

/// Gap margins along a ladder of |P| values.
struct GapReport {
    struct Row {
        double P_abs;
        double delta;
        double gap;             // E1 - E (NaN when E1 is missing)
        double bound_delta;     // (1 - gamma) m_ph - e c1_hat(P)
        double bound_gap;       // (1 - eC1 - gamma) m_ph - eC2
        double chain;           // sigma_minus - upper envelope
        double margin_delta;    // delta - bound_delta
        double margin_gap;      // gap - bound_gap
        double margin_chain;    // gap - chain
    };
    std::vector<Row> rows;
    double e_c1_hat = 0.0;  // eC_iso + max_P (upper(P) - gamma sqrt(P^2 + M^2))
    double min_margin_delta = 0.0;
    double min_margin_gap = 0.0;
    double min_margin_chain = 0.0;
    double min_gap = 0.0;
};

GapReport theorem_gap_report(const FiberModel& model, std::span<const double> P_ladder, const BoundConstants& c,
                             EnergyCache* cache = nullptr);

struct MonotoneReport {
    bool passed = true;
    int trials = 0;
    int failures = 0;
    double worst_margin = 0.0;  // min over trials of min_eig(sqrt(T) - sqrt(S)) / ||sqrt(T)||
};

/// Random Hermitian S >= 0 and T = S + W^dagger W; checks sqrt(T) >= sqrt(S).
MonotoneReport sqrt_monotone_test(int dim, int trials, std::uint64_t seed, double tol = 1e-10);

/// Worst violation of each inequality of the second-quantization lemma,
/// measured as max over samples of (lhs - rhs) / max(1, rhs); <= 0 means no
/// violation. Vectors are restricted to sectors where the truncated operators
/// act exactly like the untruncated ones.
struct FieldInequalityReport {
    std::array<double, 5> worst{};       // items (i)..(v)
    std::array<int, 5> violations{};     // samples with violation > tol
    double form_bound_min_eig = 0.0;     // min eig of H_f + ||omega^{-1/2} f||^2 - (a(f) + a(f)^*)
    int samples = 0;
};

FieldInequalityReport field_inequality_suite(std::span<const double> omega, int N_max, int samples,
                                             std::uint64_t seed, double tol = 1e-10);

/// Smallest eigenvalue (relative to scale) of the Taylor remainder
/// sqrt((|P| - X)^2 + M^2) - sqrt(P^2 + M^2) + |P| X / sqrt(P^2 + M^2),
/// X = P_f1 - A(0)_1.
double taylor_remainder_min_eig(const FiberModel& model, double P_abs);

struct SpinlessChecks {
    OrderCheck spinless_lower;   // H_SL(|P|u) >= gamma sqrt(P^2+M^2) + (1 - gamma - eC) H_f - eC
    OrderCheck diff_plus;        // H_SL - H <= (3 pi / M) n_curl (H_f + 1)
    OrderCheck diff_minus;       // H - H_SL <= (3 pi / M) n_curl (H_f + 1)
    OrderCheck abs_diff_plus;    // same for |D_SL| - |D|, without the gamma prefactor
    OrderCheck abs_diff_minus;
};

SpinlessChecks spinless_checks(const FiberModel& model, double P_abs, const BoundConstants& c);

/// max over k of ||(|D(P - k)| - |D(P)|)(H(P) + 1)^{-1}|| / |k|.
double lipschitz_constant(const FiberModel& model, const Vec3& P, std::span<const Vec3> ks);

struct InteractionTrend {
    std::vector<double> e;
    std::vector<double> norm;
    double intercept = 0.0;   // value at e = 0
    double slope = 0.0;       // least-squares slope through the origin
    /// max over consecutive nonzero rungs of |(norm_b / norm_a) / (e_b / e_a) - 1|
    double max_ratio_deviation = 0.0;
};

/// ||H_I(P)(H_0(P) + 1)^{-1}|| along an e ladder with the mode grid held fixed.
InteractionTrend interaction_trend(const ModelParams& params, const Vec3& P, std::span<const double> e_ladder);

}  // namespace fibergap
