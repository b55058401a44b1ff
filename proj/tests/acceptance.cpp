// Acceptance criteria 1-11 on the default desk model (24 modes, N_max = 1)
// and a small model (4 modes, N_max = 2). One PASS/FAIL line per criterion.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fibergap/bounds.hpp"
#include "fibergap/config.hpp"
#include "fibergap/kramers.hpp"
#include "fibergap/spectral.hpp"

using namespace fibergap;

namespace {

struct Setup {
    std::string name;
    ModelParams params;
    std::vector<double> ladder;  // |P| values along (1, 0, 0)
};

std::vector<Setup> setups() {
    const RunConfig desk = default_config();
    std::vector<double> ladder;
    for (const auto& P : desk.momenta()) ladder.push_back(P.norm());
    ModelParams small = desk.params;
    small.grid.n_shells = 1;
    small.grid.directions = DirectionSet::pair2;
    small.N_max = 2;
    return {{"desk", desk.params, ladder}, {"small", small, ladder}};
}

FiberModel at_coupling(const Setup& s, double e) {
    ModelParams p = s.params;
    p.e = e;
    return FiberModel::build(p);
}

class Criterion {
public:
    explicit Criterion(int id) : id_(id) {}
    void require(bool ok, const std::string& what) {
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        if (!ok) ++count_;
    }
    void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
    bool report() const {
        std::printf("%s %2d  %s", count_ == 0 ? "PASS" : "FAIL", id_, notes_.c_str());
        for (const auto& f : failures_) std::printf(" | %s", f.c_str());
        if (count_ > static_cast<int>(failures_.size())) std::printf(" | ... %d failures", count_);
        std::printf("\n");
        return count_ == 0;
    }

private:
    int id_;
    int count_ = 0;
    std::vector<std::string> failures_;
    std::string notes_;
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// Free spectrum by direct enumeration of occupations n_m with sum n_m <= N_max.
std::vector<double> free_oracle(const FiberModel& m, const Vec3& P) {
    const auto& p = m.params;
    const std::size_t n = m.modes.size();
    std::vector<double> out;
    std::vector<int> occ(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i == n) {
            Vec3 k = Vec3::Zero();
            double w = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                k += occ[j] * m.modes[j].k;
                w += occ[j] * dispersion(m.modes[j].k, p.m_ph);
            }
            const double level = p.gamma * std::sqrt((P - k).squaredNorm() + p.M * p.M) + w;
            out.push_back(level);
            out.push_back(level);
            return;
        }
        for (int c = 0; c <= left; ++c) {
            occ[i] = c;
            rec(i + 1, left - c);
        }
        occ[i] = 0;
    };
    rec(0, p.N_max);
    std::sort(out.begin(), out.end());
    return out;
}

bool c1_free_oracle() {
    Criterion c(1);
    double worst = 0.0;
    for (const auto& s : setups()) {
        const auto m = at_coupling(s, 0.0);
        for (double P_abs : s.ladder) {
            const Vec3 P(P_abs, 0, 0);
            const RVector ev = hermitian_eigenvalues(build_H(m, P).matrix);
            const auto oracle = free_oracle(m, P);
            c.require(static_cast<std::size_t>(ev.size()) == oracle.size(), s.name + " dimension");
            if (static_cast<std::size_t>(ev.size()) != oracle.size()) continue;
            double dev = 0.0;
            for (std::size_t i = 0; i < oracle.size(); ++i)
                dev = std::max(dev, std::abs(ev(static_cast<Eigen::Index>(i)) - oracle[i]));
            worst = std::max(worst, dev);
            c.require(dev <= 1e-10, s.name + " |P|=" + fmt(P_abs) + " dev " + fmt(dev));
            for (const auto& cl : cluster_degeneracy(std::vector<double>(ev.data(), ev.data() + ev.size())))
                c.require(cl.multiplicity % 2 == 0, s.name + " odd free multiplicity");
        }
    }
    c.note("free-theory eigenvalues vs enumeration, max dev " + fmt(worst));
    return c.report();
}

bool c2_clifford() {
    Criterion c(2);
    double worst_sq = 0.0, worst_t = 0.0;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> comp(-2.0, 2.0), coupling(0.0, 0.3);
    for (const auto& s : setups()) {
        const auto base = FiberModel::build(s.params);
        for (int draw = 0; draw < 20; ++draw) {
            ModelParams p = s.params;
            p.e = coupling(rng);
            const auto m = FiberModel::build(p, base.modes);
            const Vec3 P(comp(rng), comp(rng), comp(rng));
            const CMatrix d = build_D(m, P).matrix;
            const CMatrix t = build_T(m, P, TForm::direct).matrix;
            const CMatrix te = build_T(m, P, TForm::expanded).matrix;
            const CMatrix shifted = t + p.M * p.M * CMatrix::Identity(t.rows(), t.cols());
            const CMatrix d2 = d * d;
            const double sq = (d2 - kron(CMatrix::Identity(2, 2), shifted)).norm() / d2.norm();
            const double tt = (t - te).norm() / t.norm();
            worst_sq = std::max(worst_sq, sq);
            worst_t = std::max(worst_t, tt);
            c.require(sq <= 1e-10, s.name + " D^2 draw " + std::to_string(draw) + " " + fmt(sq));
            c.require(tt <= 1e-12, s.name + " T forms draw " + std::to_string(draw) + " " + fmt(tt));
        }
    }
    c.note("D^2 rel " + fmt(worst_sq) + ", direct vs expanded T rel " + fmt(worst_t));
    return c.report();
}

bool c3_sqrt() {
    Criterion c(3);
    double worst = 0.0;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> comp(-2.0, 2.0), coupling(0.0, 0.3);
    for (const auto& s : setups()) {
        const auto base = FiberModel::build(s.params);
        for (int draw = 0; draw < 10; ++draw) {
            ModelParams p = s.params;
            p.e = coupling(rng);
            const auto m = FiberModel::build(p, base.modes);
            const Vec3 P(comp(rng), comp(rng), comp(rng));
            const CMatrix t = build_T(m, P).matrix;
            const CMatrix x = t + p.M * p.M * CMatrix::Identity(t.rows(), t.cols());
            const double dev = (op_sqrt_quad(x, 1e-10) - op_sqrt_eig(x)).cwiseAbs().maxCoeff();
            worst = std::max(worst, dev);
            c.require(dev <= 1e-8, s.name + " draw " + std::to_string(draw) + " " + fmt(dev));
        }
    }
    c.note("quadrature vs eigen square root, max entry dev " + fmt(worst));
    return c.report();
}

bool c4_kramers() {
    Criterion c(4);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    for (int t = 0; t < 20; ++t) {
        CVector psi(40);
        for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) = Complex(g(rng), g(rng));
        c.require((apply_theta(apply_theta(psi)) + psi).cwiseAbs().maxCoeff() == 0.0, "theta^2 != -1");
    }
    double worst_comm = 0.0;
    for (const auto& s : setups()) {
        for (double e : {0.05, 0.1}) {
            const auto m = at_coupling(s, e);
            const auto k = BoundConstants::from(m.params, m.norms);
            for (double P_abs : s.ladder) {
                const Vec3 P(P_abs, 0, 0);
                const CMatrix h = build_H(m, P).matrix;
                const double comm = check_theta_commutes(h);
                worst_comm = std::max(worst_comm, comm);
                const std::string at = s.name + " e=" + fmt(e) + " |P|=" + fmt(P_abs);
                c.require(comm <= 1e-12, at + " commutation " + fmt(comm));
                const RVector ev = hermitian_eigenvalues(h);
                const auto clusters = cluster_degeneracy(std::vector<double>(ev.data(), ev.data() + ev.size()));
                for (const auto& cl : clusters) c.require(cl.multiplicity % 2 == 0, at + " odd multiplicity");
                c.require(clusters.front().multiplicity == 2, at + " ground multiplicity");
                const auto cert = kramers_certificate(m, P, k);
                c.require(cert.status == KramersCertificate::Status::certified, at + " " + to_string(cert.status));
            }
        }
    }
    c.note("theta^2 = -1, commutation <= " + fmt(worst_comm) + ", even multiplicities, ground pair certified");
    return c.report();
}

bool c5_c6_sandwich_counting(bool& c6_ok) {
    Criterion c5(5), c6(6);
    double worst_lower = 1.0, worst_upper = 1.0;
    for (const auto& s : setups()) {
        for (double e : {0.0, 0.05, 0.1}) {
            const auto m = at_coupling(s, e);
            const auto k = BoundConstants::from(m.params, m.norms);
            for (double P_abs : s.ladder) {
                const std::string at = s.name + " e=" + fmt(e) + " |P|=" + fmt(P_abs);
                const CMatrix h = build_H(m, Vec3(P_abs, 0, 0)).matrix;
                const CMatrix lm = lift_spin(build_L_minus(m, P_abs, k), 2);
                const CMatrix lp = lift_spin(build_L_plus(m, P_abs), 2);
                const double scale = std::max({operator_norm(h), operator_norm(lm), operator_norm(lp)});
                const double lo = min_eigenvalue(h - lm) / scale;
                const double up = min_eigenvalue(lp - h) / scale;
                worst_lower = std::min(worst_lower, lo);
                worst_upper = std::min(worst_upper, up);
                c5.require(lo >= -1e-9, at + " lower " + fmt(lo));
                c5.require(up >= -1e-9, at + " upper " + fmt(up));

                const RVector ev = hermitian_eigenvalues(h);
                const double sigma = k.sigma_minus(m.params, P_abs);
                const int below = static_cast<int>((ev.array() < sigma).count());
                c6.require(below == 2, at + " count " + std::to_string(below));
                const auto clusters = cluster_degeneracy(std::vector<double>(ev.data(), ev.data() + ev.size()));
                c6.require(clusters.front().value < sigma, at + " E >= sigma_minus");
                c6.require(clusters.size() > 1 && clusters[1].value >= sigma, at + " E1 < sigma_minus");
            }
        }
    }
    c5.note("min relative eig: H - L_- " + fmt(worst_lower) + ", L_+ - H " + fmt(worst_upper));
    c6.note("count_below(H, sigma_minus) = 2 and E < sigma_minus <= E1");
    const bool ok5 = c5.report();
    c6_ok = c6.report();
    return ok5;
}

bool c7_gap() {
    Criterion c(7);
    double worst = INFINITY;
    for (const auto& s : setups()) {
        for (double e : {0.0, 0.05, 0.1}) {
            const auto m = at_coupling(s, e);
            const auto k = BoundConstants::from(m.params, m.norms);
            const auto& p = m.params;
            const double bound = (1 - k.eC1 - p.gamma) * p.m_ph - k.eC2;
            if (e == 0.0) c.require(bound == (1 - p.gamma) * p.m_ph, s.name + " e=0 bound not exact");
            double min_gap = INFINITY;
            for (double P_abs : s.ladder) {
                const auto gd = ground_data(m, Vec3(P_abs, 0, 0));
                c.require(gd.E1.has_value(), s.name + " no E1");
                if (gd.E1) min_gap = std::min(min_gap, *gd.E1 - gd.E);
            }
            worst = std::min(worst, min_gap - bound);
            c.require(min_gap >= bound - 1e-9, s.name + " e=" + fmt(e) + " gap " + fmt(min_gap) + " < " + fmt(bound));
        }
    }
    c.note("min over ladder of (E1 - E) - bound = " + fmt(worst));
    return c.report();
}

bool c8_delta() {
    Criterion c(8);
    double worst_oracle = 0.0, worst_margin = INFINITY;
    for (const auto& s : setups()) {
        for (double e : {0.0, 0.05, 0.1}) {
            const auto m = at_coupling(s, e);
            const auto k = BoundConstants::from(m.params, m.norms);
            const auto& p = m.params;
            const auto trials = default_trial_set(m);
            EnergyCache cache;
            const auto report = theorem_gap_report(m, s.ladder, k, &cache);
            for (double P_abs : s.ladder) {
                const Vec3 P(P_abs, 0, 0);
                const double delta = delta_gap(m, P, trials, &cache).delta;
                const std::string at = s.name + " e=" + fmt(e) + " |P|=" + fmt(P_abs);
                c.require(delta <= p.m_ph + 1e-12, at + " delta > m_ph");
                if (e == 0.0) {
                    double oracle = INFINITY;
                    for (const auto& q : trials)
                        oracle = std::min(oracle, p.gamma * std::sqrt((P - q).squaredNorm() + p.M * p.M) +
                                                      dispersion(q, p.m_ph) -
                                                      p.gamma * std::sqrt(P.squaredNorm() + p.M * p.M));
                    worst_oracle = std::max(worst_oracle, std::abs(delta - oracle));
                    c.require(std::abs(delta - oracle) <= 1e-10, at + " oracle dev " + fmt(delta - oracle));
                }
                // (1 - gamma) m_ph minus the measured O(e) margin e c1_hat
                const double lower = (1 - p.gamma) * p.m_ph - report.e_c1_hat;
                worst_margin = std::min(worst_margin, delta - lower);
                c.require(delta >= lower - 1e-9, at + " delta below " + fmt(lower));
            }
        }
    }
    c.note("delta <= m_ph, e=0 oracle dev " + fmt(worst_oracle) + ", min margin over lower bound " +
           fmt(worst_margin));
    return c.report();
}

bool c9_envelope() {
    Criterion c(9);
    double worst = INFINITY;
    for (const auto& s : setups()) {
        for (double e : {0.0, 0.05, 0.1}) {
            const auto m = at_coupling(s, e);
            const auto k = BoundConstants::from(m.params, m.norms);
            const auto& p = m.params;
            for (double P_abs : s.ladder) {
                const double E = ground_energy(m, Vec3(P_abs, 0, 0));
                const double lo = p.gamma * std::sqrt(P_abs * P_abs + p.M * p.M) - k.eC2;
                const double hi =
                    p.gamma * std::sqrt((P_abs + k.eC3) * (P_abs + k.eC3) + p.M * p.M + k.e2C4);
                worst = std::min({worst, E - lo, hi - E});
                const std::string at = s.name + " e=" + fmt(e) + " |P|=" + fmt(P_abs);
                c.require(E >= lo - 1e-9, at + " below envelope");
                c.require(E <= hi + 1e-9, at + " above envelope");
            }
        }
    }
    c.note("min distance to envelope edge " + fmt(worst));
    return c.report();
}

bool c10_properties() {
    Criterion c(10);
    const auto desk = FiberModel::build(default_config().params);
    const std::vector<double> omega(desk.table.omega.begin(), desk.table.omega.begin() + 3);
    const auto field = field_inequality_suite(omega, 3, 1000, 23);
    int violations = 0;
    for (int i = 0; i < 5; ++i) {
        violations += field.violations[static_cast<std::size_t>(i)];
        c.require(field.violations[static_cast<std::size_t>(i)] == 0,
                  "field inequality " + std::to_string(i + 1) + " worst " +
                      fmt(field.worst[static_cast<std::size_t>(i)]));
    }
    c.require(field.samples == 1000, "field sample count");
    c.require(field.form_bound_min_eig >= -1e-10, "form bound " + fmt(field.form_bound_min_eig));

    const auto mono = sqrt_monotone_test(12, 1000, 29);
    c.require(mono.trials == 1000 && mono.failures == 0, "monotone failures " + std::to_string(mono.failures));

    const std::vector<double> es{0.0, 0.025, 0.05, 0.1, 0.2};
    const auto trend = interaction_trend(default_config().params, Vec3(0.5, 0, 0), es);
    c.require(trend.intercept <= 1e-10, "trend intercept " + fmt(trend.intercept));
    // linear to leading order: successive ratios follow e up to an O(e) correction
    c.require(trend.max_ratio_deviation <= 0.2, "trend ratio deviation " + fmt(trend.max_ratio_deviation));
    c.note("field violations " + std::to_string(violations) + "/1000, monotone worst margin " +
           fmt(mono.worst_margin) + ", trend intercept " + fmt(trend.intercept) + " slope " + fmt(trend.slope) +
           " ratio dev " + fmt(trend.max_ratio_deviation));
    return c.report();
}

bool c11_symmetry() {
    Criterion c(11);
    double worst = 0.0;
    for (const auto& s : setups()) {
        for (double e : {0.05, 0.1}) {
            const auto m = at_coupling(s, e);
            for (double P_abs : s.ladder) {
                for (const Vec3& u : {Vec3(1, 0, 0), Vec3(0.6, -0.8, 0), Vec3(0.48, 0.6, 0.64)}) {
                    const Vec3 P = P_abs * u;
                    const double d = std::abs(ground_energy(m, P) - ground_energy(m, -P));
                    worst = std::max(worst, d);
                    c.require(d <= 1e-10, s.name + " parity " + fmt(d));
                }
            }
        }
    }
    const auto m = FiberModel::build(default_config().params);
    const auto k = BoundConstants::from(m.params, m.norms);
    const auto nf = static_cast<Eigen::Index>(m.fock_dim());
    const CMatrix sigma3 = kron(pauli()[2], CMatrix::Identity(nf, nf));
    const double broken = check_theta_commutes(build_H(m, Vec3(0.6, 0, 0)).matrix + sigma3);
    c.require(broken > 1e-3, "sigma_3 control not detected");
    const auto cert = kramers_certificate(m, Vec3(0.6, 0, 0), k, sigma3);
    c.require(cert.status == KramersCertificate::Status::failed, "sigma_3 control certified");
    const double odd = position_theta_residual(build_position_toy(m, {-0.5, 0.5}, {-0.3, 0.3}));
    c.require(odd > 1e-6, "odd V control not detected");
    const double even = position_theta_residual(build_position_toy(m, {-0.5, 0.5}, {0.3, 0.3}));
    c.require(even <= 1e-12, "even V residual " + fmt(even));
    c.note("parity max dev " + fmt(worst) + ", sigma_3 residual " + fmt(broken) + ", odd-V residual " + fmt(odd));
    return c.report();
}

}  // namespace

int main() {
    bool ok = true;
    ok &= c1_free_oracle();
    ok &= c2_clifford();
    ok &= c3_sqrt();
    ok &= c4_kramers();
    bool c6 = true;
    ok &= c5_c6_sandwich_counting(c6);
    ok &= c6;
    ok &= c7_gap();
    ok &= c8_delta();
    ok &= c9_envelope();
    ok &= c10_properties();
    ok &= c11_symmetry();
    return ok ? 0 : 1;
}
