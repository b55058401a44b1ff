#include "fibergap/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fibergap {

BoundConstants BoundConstants::from(const ModelParams& params, const CouplingNorms& norms) {
    BoundConstants c;
    c.spinless = params.gamma * norms.n_half_component(0);
    c.spin_diff = 3.0 * std::numbers::pi / params.M * norms.n_curl;
    c.eC1 = c.spinless + params.gamma * c.spin_diff;
    c.eC2 = c.eC1;
    c.eC3 = norms.n_half;
    c.e2C4 = 2.0 * norms.n_one * norms.n_one + norms.n_kin * norms.n_kin;
    c.eC_iso = params.gamma * norms.n_half + params.gamma * c.spin_diff;
    return c;
}

double BoundConstants::sigma_minus(const ModelParams& p, double P_abs) const {
    return p.gamma * std::hypot(P_abs, p.M) + (1.0 - p.gamma - eC1) * p.m_ph - eC2;
}

RVector L_minus_diagonal(const FiberModel& model, double P_abs, const BoundConstants& c) {
    const auto& p = model.params;
    return (p.gamma * std::hypot(P_abs, p.M) - c.eC2) + (1.0 - p.gamma - c.eC1) * model.Hf.array();
}

CMatrix build_L_minus(const FiberModel& model, double P_abs, const BoundConstants& c) {
    return diagonal(L_minus_diagonal(model, P_abs, c));
}

RVector L_plus_diagonal(const FiberModel& model, double P_abs) {
    const auto& p = model.params;
    const auto& n = model.norms;
    const auto hf = model.Hf.array();
    const RVector pf2 = model.Pf[0].array().square() + model.Pf[1].array().square() + model.Pf[2].array().square();
    RVector radicand = (P_abs - model.Pf[0].array()).square() + model.Pf[1].array().square() +
                       model.Pf[2].array().square();
    radicand.array() += 2.0 * P_abs * (hf + n.n_half);
    radicand.array() += 4.0 * (hf + 1.0) * pf2.array();
    radicand.array() += n.n_one * n.n_one + n.n_one * n.n_one * (hf + 1.0);
    radicand.array() += hf + n.n_kin * n.n_kin + p.M * p.M;
    if (radicand.minCoeff() < 0.0) throw NumericalError("L_plus: negative radicand");
    return p.gamma * radicand.array().sqrt() + hf;
}

CMatrix build_L_plus(const FiberModel& model, double P_abs) {
    return diagonal(L_plus_diagonal(model, P_abs));
}

OrderCheck check_op_leq(const CMatrix& a, const CMatrix& b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("check_op_leq: dimension mismatch");
    OrderCheck out;
    out.scale = std::max(hermitian_norm(a), hermitian_norm(b));
    out.min_eig = min_eigenvalue(b - a);
    out.holds = out.min_eig >= -tol * out.scale;
    return out;
}

int count_below(const RVector& eigenvalues, double threshold) {
    return static_cast<int>((eigenvalues.array() < threshold).count());
}

int count_below(const CMatrix& h, double threshold) {
    return count_below(hermitian_eigenvalues(h), threshold);
}

EnergyEnvelope corollary_energy_bounds(const ModelParams& p, double P_abs, const BoundConstants& c) {
    EnergyEnvelope env;
    env.lower = p.gamma * std::hypot(P_abs, p.M) - c.eC2;
    env.upper = p.gamma * std::sqrt((P_abs + c.eC3) * (P_abs + c.eC3) + p.M * p.M + c.e2C4);
    return env;
}

PointAnalysis analyze_point(const FiberModel& model, double P_abs, const BoundConstants& c, double degeneracy_tol,
                            double order_tol) {
    PointAnalysis out;
    out.P_abs = P_abs;
    const Vec3 P = P_abs * Vec3::UnitX();
    const CMatrix h = build_H(model, P).matrix;
    out.spectrum = hermitian_eigenvalues(h);

    std::vector<double> vals(out.spectrum.data(), out.spectrum.data() + out.spectrum.size());
    const auto clusters = cluster_degeneracy(vals, degeneracy_tol);
    out.E = clusters.front().value;
    out.ground_multiplicity = clusters.front().multiplicity;
    if (clusters.size() > 1) out.E1 = vals[static_cast<std::size_t>(out.ground_multiplicity)];

    out.sigma_minus = c.sigma_minus(model.params, P_abs);
    const RVector lminus = L_minus_diagonal(model, P_abs, c);
    out.lower = check_op_leq(diagonal(RVector(lminus.replicate(2, 1))), h, order_tol);
    out.upper = check_op_leq(h, diagonal(RVector(L_plus_diagonal(model, P_abs).replicate(2, 1))), order_tol);
    out.count_H = count_below(out.spectrum, out.sigma_minus);
    out.count_L = 2 * count_below(lminus, out.sigma_minus);
    out.envelope = corollary_energy_bounds(model.params, P_abs, c);
    return out;
}

GapReport theorem_gap_report(const FiberModel& model, std::span<const double> P_ladder, const BoundConstants& c,
                             EnergyCache* cache) {
    const auto& p = model.params;
    GapReport report;
    const auto trial = default_trial_set(model);

    double excess = 0.0;
    for (double P_abs : P_ladder) {
        const auto env = corollary_energy_bounds(p, P_abs, c);
        excess = std::max(excess, env.upper - p.gamma * std::hypot(P_abs, p.M));
    }
    report.e_c1_hat = c.eC_iso + excess;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.min_margin_delta = report.min_margin_gap = report.min_margin_chain = report.min_gap =
        std::numeric_limits<double>::infinity();
    for (double P_abs : P_ladder) {
        const Vec3 P = P_abs * Vec3::UnitX();
        const auto g = ground_data(model, P);
        const auto d = delta_gap(model, P, trial, cache);
        const auto env = corollary_energy_bounds(p, P_abs, c);
        GapReport::Row row{};
        row.P_abs = P_abs;
        row.delta = d.delta;
        row.gap = g.E1 ? *g.E1 - g.E : nan;
        row.bound_delta = (1.0 - p.gamma) * p.m_ph - report.e_c1_hat;
        row.bound_gap = (1.0 - c.eC1 - p.gamma) * p.m_ph - c.eC2;
        row.chain = c.sigma_minus(p, P_abs) - env.upper;
        row.margin_delta = row.delta - row.bound_delta;
        row.margin_gap = row.gap - row.bound_gap;
        row.margin_chain = row.gap - row.chain;
        report.min_margin_delta = std::min(report.min_margin_delta, row.margin_delta);
        // NaN gaps (no excited level inside the truncation) propagate into the minimum.
        report.min_margin_gap = std::isnan(row.margin_gap) ? nan : std::min(report.min_margin_gap, row.margin_gap);
        report.min_margin_chain =
            std::isnan(row.margin_chain) ? nan : std::min(report.min_margin_chain, row.margin_chain);
        report.min_gap = std::isnan(row.gap) ? nan : std::min(report.min_gap, row.gap);
        report.rows.push_back(row);
    }
    return report;
}

namespace {

CMatrix random_complex(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = Complex(normal(rng), normal(rng));
    return m;
}

}  // namespace

MonotoneReport sqrt_monotone_test(int dim, int trials, std::uint64_t seed, double tol) {
    if (dim < 1 || dim > 32) throw std::invalid_argument("sqrt_monotone_test: dim must lie in [1, 32]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_scale(-3.0, 0.0);
    std::uniform_int_distribution<int> rank_dist(1, dim);
    MonotoneReport report;
    report.worst_margin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        CMatrix S = CMatrix::Zero(dim, dim);
        if (t > 0) {
            const CMatrix g = random_complex(dim, dim, rng);
            S = g * g.adjoint() / static_cast<double>(dim);
        }
        const CMatrix w = std::pow(10.0, log_scale(rng)) * random_complex(rank_dist(rng), dim, rng);
        const CMatrix T = S + w.adjoint() * w;
        const CMatrix root_t = op_sqrt_eig(T);
        const CMatrix root_s = op_sqrt_eig(S);
        const double norm = std::max(hermitian_norm(root_t), 1e-300);
        const double margin = min_eigenvalue(root_t - root_s) / norm;
        report.worst_margin = std::min(report.worst_margin, margin);
        if (margin < -tol) ++report.failures;
        ++report.trials;
    }
    report.passed = report.failures == 0;
    return report;
}

FieldInequalityReport field_inequality_suite(std::span<const double> omega, int N_max, int samples,
                                             std::uint64_t seed, double tol) {
    if (N_max < 2) throw std::invalid_argument("field_inequality_suite: N_max must be >= 2");
    const FockBasis basis(omega.size(), N_max);
    const auto dim = static_cast<Eigen::Index>(basis.dim());
    const RVector hf = dgamma_diagonal(basis, omega);
    const RVector hf1 = hf.array() + 1.0;

    // Sector masks: everything, below the top sector, and two below.
    auto sector_mask = [&](int top) {
        RVector mask = RVector::Zero(dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            if (basis.number(static_cast<std::size_t>(i)) <= top) mask(i) = 1.0;
        return mask;
    };
    const RVector safe1 = sector_mask(N_max - 1);
    const RVector safe2 = sector_mask(N_max - 2);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_coeffs = [&]() {
        std::vector<Complex> c(omega.size());
        for (auto& z : c) z = Complex(normal(rng), normal(rng));
        return c;
    };
    auto random_state = [&](const RVector& mask) {
        CVector v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v(i) = mask(i) * Complex(normal(rng), normal(rng));
        return CVector(v / v.norm());
    };
    auto weighted_norms = [&](const std::vector<Complex>& c) {
        double half = 0.0, one = 0.0;
        for (std::size_t m = 0; m < c.size(); ++m) {
            const double a2 = std::norm(c[m]);
            const double lift = 1.0 + 1.0 / std::sqrt(omega[m]);
            half += a2 / omega[m];
            one += lift * lift * a2;
        }
        return std::pair{std::sqrt(half), std::sqrt(one)};
    };

    FieldInequalityReport report;
    report.worst.fill(-std::numeric_limits<double>::infinity());
    report.form_bound_min_eig = std::numeric_limits<double>::infinity();
    auto record = [&](int item, double lhs, double rhs) {
        const double v = (lhs - rhs) / std::max(1.0, rhs);
        report.worst[static_cast<std::size_t>(item)] = std::max(report.worst[static_cast<std::size_t>(item)], v);
        if (v > tol) ++report.violations[static_cast<std::size_t>(item)];
    };

    const RVector all = RVector::Ones(dim);
    for (int s = 0; s < samples; ++s) {
        const auto f = random_coeffs();
        const auto g = random_coeffs();
        const auto [f_half, f_one] = weighted_norms(f);
        const auto [g_half, g_one] = weighted_norms(g);
        const CMatrix af = annihilation_sum(basis, f);
        const CMatrix ag = annihilation_sum(basis, g);
        const CMatrix field = af + af.adjoint();

        const CVector phi = random_state(all);
        const CVector phi1 = random_state(safe1);
        const CVector phi2 = random_state(safe2);
        auto hf_norm = [&](const CVector& v) { return std::sqrt(v.cwiseAbs2().dot(hf)); };
        auto hf1_norm = [&](const CVector& v) { return std::sqrt(v.cwiseAbs2().dot(hf1)); };

        record(0, (af * phi).norm(), f_half * hf_norm(phi));
        record(1, (af.adjoint() * phi1).norm(), f_one * hf1_norm(phi1));
        record(2, phi.dot(field * phi).real(), phi.cwiseAbs2().dot(hf) + f_half * f_half);
        record(3, (field * phi1).norm(), 2.0 * f_one * hf1_norm(phi1));
        const double rhs5 = f_one * g_one * phi2.cwiseAbs2().dot(hf1);
        const CMatrix af_star = af.adjoint();
        const CMatrix ag_star = ag.adjoint();
        for (const CMatrix* first : {&af, &af_star})
            for (const CMatrix* second : {&ag, &ag_star})
                record(4, std::abs(phi2.dot(*first * (*second * phi2))), rhs5);

        if (s < 32) {
            CMatrix bound = diagonal(hf);
            bound.diagonal().array() += f_half * f_half;
            report.form_bound_min_eig = std::min(report.form_bound_min_eig, min_eigenvalue(bound - field));
        }
        ++report.samples;
    }
    return report;
}

double taylor_remainder_min_eig(const FiberModel& model, double P_abs) {
    const double M = model.params.M;
    CMatrix x = -model.A0[0];
    x.diagonal() += model.Pf[0].cast<Complex>();
    const double f0 = std::hypot(P_abs, M);
    const double slope = P_abs / f0;
    const CMatrix r = hermitian_function(x, [&](double s) { return std::hypot(P_abs - s, M) - f0 + slope * s; });
    const double scale = std::max(1.0, hermitian_norm(r));
    return min_eigenvalue(r) / scale;
}

SpinlessChecks spinless_checks(const FiberModel& model, double P_abs, const BoundConstants& c) {
    const auto& p = model.params;
    const Vec3 P = P_abs * Vec3::UnitX();
    SpinlessChecks out;

    const CMatrix h_sl = build_H_SL(model, P);
    const RVector lower = (p.gamma * std::hypot(P_abs, p.M) - c.spinless) +
                          (1.0 - p.gamma - c.spinless) * model.Hf.array();
    out.spinless_lower = check_op_leq(diagonal(lower), h_sl);

    const CMatrix h = build_H(model, P).matrix;
    const RVector allowance = c.spin_diff * (model.Hf.array() + 1.0);
    const CMatrix bound = diagonal(RVector(allowance.replicate(2, 1)));
    const CMatrix diff = lift_spin(h_sl, 2) - h;
    out.diff_plus = check_op_leq(diff, bound);
    out.diff_minus = check_op_leq(-diff, bound);

    const Triple v = build_v(model, P);
    CMatrix s = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    s.diagonal().array() += p.M * p.M;
    const CMatrix abs_diff = lift_spin(op_sqrt_eig(s), 2) - abs_D(model, P);
    out.abs_diff_plus = check_op_leq(abs_diff, bound);
    out.abs_diff_minus = check_op_leq(-abs_diff, bound);
    return out;
}

double lipschitz_constant(const FiberModel& model, const Vec3& P, std::span<const Vec3> ks) {
    const CMatrix base = abs_D(model, P);
    CMatrix h = build_H(model, P).matrix;
    h.diagonal().array() += 1.0;
    const CMatrix resolvent = h.inverse();
    double worst = 0.0;
    for (const auto& k : ks) {
        const double kn = k.norm();
        if (!(kn > 0.0)) continue;
        const CMatrix diff = abs_D(model, P - k) - base;
        worst = std::max(worst, operator_norm(diff * resolvent) / kn);
    }
    return worst;
}

InteractionTrend interaction_trend(const ModelParams& params, const Vec3& P, std::span<const double> e_ladder) {
    InteractionTrend out;
    const ModeSet modes = build_mode_set(params);
    auto value_at = [&](double e) {
        ModelParams p = params;
        p.e = e;
        return interaction_norm(FiberModel::build(p, modes), P);
    };
    out.intercept = value_at(0.0);
    double num = 0.0, den = 0.0;
    for (double e : e_ladder) {
        const double v = value_at(e);
        out.e.push_back(e);
        out.norm.push_back(v);
        num += e * v;
        den += e * e;
    }
    out.slope = den > 0.0 ? num / den : 0.0;
    for (std::size_t i = 1; i < out.e.size(); ++i) {
        if (out.e[i - 1] <= 0.0 || out.norm[i - 1] <= 0.0) continue;
        const double dev = std::abs((out.norm[i] / out.norm[i - 1]) / (out.e[i] / out.e[i - 1]) - 1.0);
        out.max_ratio_deviation = std::max(out.max_ratio_deviation, dev);
    }
    return out;
}

}  // namespace fibergap
