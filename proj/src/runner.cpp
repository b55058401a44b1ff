#include "fibergap/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "fibergap/kramers.hpp"

namespace fibergap {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

Vec3 vec_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

bool on_positive_axis(const Vec3& P) { return P(1) == 0.0 && P(2) == 0.0 && P(0) >= 0.0; }

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::ostream& log_of(const RunOptions& opts) {
    static std::ostringstream sink;
    if (opts.log) return *opts.log;
    sink.str("");
    return sink;
}

FiberModel model_with_e(const ModelParams& base, const ModeSet& modes, double e) {
    ModelParams p = base;
    p.e = e;
    return FiberModel::build(p, modes);
}

// min_eig relative to the operator scale; absolute when both operators vanish.
double relative(const OrderCheck& c) { return c.scale > 0.0 ? c.min_eig / c.scale : c.min_eig; }

std::string e_tag(double e) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "e=%g", e);
    return buf;
}

}  // namespace

// --- serialization -----------------------------------------------------------

json to_json(const SpectrumReport& r) {
    json j;
    j["P"] = vec_json(r.P);
    j["E"] = r.E;
    j["E1"] = r.E1 ? json(*r.E1) : json(nullptr);
    j["ground_multiplicity"] = r.ground_multiplicity;
    j["delta"] = r.delta;
    j["sigma_minus"] = r.sigma_minus;
    j["eigencount_below_sigma"] = r.eigencount_below_sigma;
    j["residuals"] = json::object();
    for (const auto& [name, value] : r.residuals) j["residuals"][name] = value;
    return j;
}

SpectrumReport spectrum_report_from_json(const json& j) {
    SpectrumReport r;
    r.P = vec_from_json(j.at("P"));
    r.E = j.at("E").get<double>();
    if (!j.at("E1").is_null()) r.E1 = j.at("E1").get<double>();
    r.ground_multiplicity = j.at("ground_multiplicity").get<int>();
    r.delta = j.at("delta").get<double>();
    r.sigma_minus = j.at("sigma_minus").get<double>();
    r.eigencount_below_sigma = j.at("eigencount_below_sigma").get<int>();
    for (const auto& [name, value] : j.at("residuals").items()) r.residuals[name] = value.get<double>();
    return r;
}

// --- cache -------------------------------------------------------------------

ResultCache::ResultCache(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.empty() || !std::filesystem::exists(path_)) return;
    std::ifstream in(path_);
    try {
        const json j = json::parse(in);
        for (const auto& [key, value] : j.at("entries").items()) entries_[key] = value;
    } catch (const json::exception& e) {
        throw ConfigError("cache file " + path_.string() + " is unreadable: " + e.what());
    }
}

std::string ResultCache::key(const ModelParams& params, const Tolerances& tol, const Vec3& P) {
    std::ostringstream s;
    s << to_json(params).dump() << '|' << format_double(tol.degeneracy);
    const auto q = EnergyCache::key(P);
    for (auto v : q) s << '|' << v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016zx", std::hash<std::string>{}(s.str()));
    return buf;
}

std::optional<SpectrumReport> ResultCache::find(const std::string& key) const {
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    ++hits_;
    return spectrum_report_from_json(it->second);
}

void ResultCache::store(const std::string& key, const SpectrumReport& report) {
    std::unique_lock lock(mutex_);
    entries_[key] = to_json(report);
}

void ResultCache::save() const {
    if (path_.empty()) return;
    json j;
    {
        std::shared_lock lock(mutex_);
        j["entries"] = json::object();
        for (const auto& [key, value] : entries_) j["entries"][key] = value;
    }
    const auto tmp = std::filesystem::path(path_.string() + ".tmp");
    write_text(tmp, j.dump() + "\n");
    std::filesystem::rename(tmp, path_);
}

std::size_t ResultCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

// --- output helpers ----------------------------------------------------------

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_sweep_csv(std::ostream& os, std::span<const SpectrumReport> rows) {
    os << "P_x,P_y,P_z,E,E1,mult,delta,sigma_minus,count_below\n";
    for (const auto& r : rows) {
        os << format_double(r.P(0)) << ',' << format_double(r.P(1)) << ',' << format_double(r.P(2)) << ','
           << format_double(r.E) << ',' << format_double(r.E1.value_or(std::numeric_limits<double>::quiet_NaN()))
           << ',' << r.ground_multiplicity << ',' << format_double(r.delta) << ',' << format_double(r.sigma_minus)
           << ',' << r.eigencount_below_sigma << '\n';
    }
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    std::vector<std::exception_ptr> errors(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        f(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// --- per-P report ------------------------------------------------------------

SpectrumReport compute_spectrum_report(const FiberModel& model, const BoundConstants& c, const Vec3& P,
                                       const Tolerances& tol, EnergyCache* energies) {
    const auto& params = model.params;
    SpectrumReport r;
    r.P = P;
    const CMatrix h = build_H(model, P).matrix;
    const RVector vals = hermitian_eigenvalues(h);
    std::vector<double> v(vals.data(), vals.data() + vals.size());
    const auto clusters = cluster_degeneracy(v, tol.degeneracy);
    r.E = clusters.front().value;
    r.ground_multiplicity = clusters.front().multiplicity;
    if (clusters.size() > 1) r.E1 = v[static_cast<std::size_t>(r.ground_multiplicity)];

    const auto trial = default_trial_set(model);
    r.delta = delta_gap(model, P, trial, energies).delta;

    BoundConstants cc = c;
    const bool axis = P(1) == 0.0 && P(2) == 0.0;
    if (!axis) cc.eC1 = cc.eC2 = c.eC_iso;
    const double P_abs = P.norm();
    r.sigma_minus = cc.sigma_minus(params, P_abs);
    r.eigencount_below_sigma = count_below(vals, r.sigma_minus);

    r.residuals["hermiticity"] = hermiticity_defect(h);
    r.residuals["theta_commutation"] = check_theta_commutes(h);
    r.residuals["parity"] = std::abs(r.E - ground_energy(model, -P, energies));
    const auto env = corollary_energy_bounds(params, P_abs, cc);
    r.residuals["envelope_lower_margin"] = r.E - env.lower;
    r.residuals["envelope_upper_margin"] = env.upper - r.E;
    if (on_positive_axis(P)) {
        const RVector lminus = L_minus_diagonal(model, P_abs, cc);
        const auto lower = check_op_leq(diagonal(RVector(lminus.replicate(2, 1))), h, tol.order);
        const auto upper =
            check_op_leq(h, diagonal(RVector(L_plus_diagonal(model, P_abs).replicate(2, 1))), tol.order);
        r.residuals["sandwich_lower_min_eig"] = relative(lower);
        r.residuals["sandwich_upper_min_eig"] = relative(upper);
    }
    return r;
}

// --- verify ------------------------------------------------------------------

bool VerifyReport::passed() const { return failures() == 0; }

int VerifyReport::failures() const {
    return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return c.hard && !c.passed; }));
}

json to_json(const VerifyReport& r) {
    json j;
    j["passed"] = r.passed();
    j["failures"] = r.failures();
    j["checks"] = json::array();
    for (const auto& c : r.checks) {
        j["checks"].push_back({{"group", c.group},
                               {"name", c.name},
                               {"hard", c.hard},
                               {"passed", c.passed},
                               {"value", std::isfinite(c.value) ? json(c.value) : json(format_double(c.value))},
                               {"limit", c.limit},
                               {"detail", c.detail}});
    }
    j["details"] = r.details;
    return j;
}

namespace {

class Recorder {
public:
    explicit Recorder(VerifyReport& rep) : rep_(rep) {}

    // passes when value <= limit (NaN fails)
    void at_most(const std::string& group, const std::string& name, double value, double limit, bool hard = true,
                 std::string detail = {}) {
        rep_.checks.push_back({group, name, hard, value <= limit, value, limit, std::move(detail)});
    }
    // passes when value >= limit (NaN fails)
    void at_least(const std::string& group, const std::string& name, double value, double limit, bool hard = true,
                  std::string detail = {}) {
        rep_.checks.push_back({group, name, hard, value >= limit, value, limit, std::move(detail)});
    }
    void flag(const std::string& group, const std::string& name, bool ok, bool hard = true, std::string detail = {},
              double value = 0.0) {
        rep_.checks.push_back({group, name, hard, ok, value, 0.0, std::move(detail)});
    }

private:
    VerifyReport& rep_;
};

struct Models {
    ModeSet modes;
    std::vector<double> e;
    std::vector<FiberModel> at;
    std::vector<BoundConstants> c;
};

Models build_models(const RunConfig& cfg) {
    Models m;
    m.modes = build_mode_set(cfg.params);
    m.e = cfg.e_ladder;
    if (m.e.empty()) m.e.push_back(cfg.params.e);
    for (double e : m.e) {
        m.at.push_back(model_with_e(cfg.params, m.modes, e));
        m.c.push_back(BoundConstants::from(m.at.back().params, m.at.back().norms));
    }
    return m;
}

std::vector<double> momentum_norms(const std::vector<Vec3>& Ps) {
    std::vector<double> out;
    for (const auto& P : Ps) out.push_back(P.norm());
    return out;
}

void spectrum_suite(const RunConfig& cfg, const Models& models, Recorder& rec, json& details) {
    const std::string g = "spectrum";
    const auto Ps = cfg.momenta();
    const FiberModel free = model_with_e(cfg.params, models.modes, 0.0);

    // Free-theory oracle and exact spin doubling at e = 0.
    double worst = 0.0;
    bool even = true;
    for (const auto& P : Ps) {
        const RVector vals = hermitian_eigenvalues(build_H(free, P).matrix);
        RVector expected = free_fiber_diagonal(free, P).replicate(2, 1);
        std::sort(expected.data(), expected.data() + expected.size());
        worst = std::max(worst, (vals - expected).cwiseAbs().maxCoeff());
        std::vector<double> v(vals.data(), vals.data() + vals.size());
        for (const auto& cl : cluster_degeneracy(v, cfg.tol.degeneracy)) even = even && cl.multiplicity % 2 == 0;
    }
    rec.at_most(g, "free_oracle_max_deviation", worst, cfg.tol.oracle);
    rec.flag(g, "free_spin_doubling_even", even);

    // Clifford and Pauli identities on random draws.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uP(-2.0, 2.0), ue(0.0, cfg.suite.algebra_e_max);
    double worst_d2 = 0.0, worst_t = 0.0, worst_sqrt = 0.0, worst_herm = 0.0;
    bool quad_ok = true;
    for (int i = 0; i < cfg.suite.algebra_draws + cfg.suite.sqrt_draws; ++i) {
        const Vec3 P(uP(rng), uP(rng), uP(rng));
        const FiberModel model = model_with_e(cfg.params, models.modes, ue(rng));
        const CMatrix t = build_T(model, P, TForm::direct).matrix;
        CMatrix tm = t;
        tm.diagonal().array() += model.params.M * model.params.M;
        if (i < cfg.suite.algebra_draws) {
            const CMatrix d = build_D(model, P).matrix;
            const CMatrix d2 = d * d;
            const CMatrix expect = kron(CMatrix::Identity(2, 2), tm);
            worst_d2 = std::max(worst_d2, (d2 - expect).norm() / d2.norm());
            const CMatrix te = build_T(model, P, TForm::expanded).matrix;
            worst_t = std::max(worst_t, (t - te).norm() / std::max(t.norm(), 1e-300));
            worst_herm = std::max(worst_herm, hermiticity_defect(build_H(model, P).matrix));
        } else {
            try {
                const CMatrix q = op_sqrt_quad(tm, cfg.tol.quad);
                worst_sqrt = std::max(worst_sqrt, (q - op_sqrt_eig(tm)).cwiseAbs().maxCoeff());
            } catch (const QuadratureNotConverged&) {
                quad_ok = false;
            }
        }
    }
    rec.at_most(g, "dirac_square_identity", worst_d2, 1e-10);
    rec.at_most(g, "pauli_direct_vs_expanded", worst_t, 1e-12);
    rec.at_most(g, "hamiltonian_hermiticity", worst_herm, 1e-12);
    rec.at_most(g, "sqrt_quadrature_vs_eigen", worst_sqrt, 1e-8);
    rec.flag(g, "sqrt_quadrature_converged", quad_ok);

    // Parity E(P) = E(-P), ladder plus one off-axis point per coupling.
    double worst_parity = 0.0;
    for (const auto& model : models.at) {
        std::vector<Vec3> pts = Ps;
        pts.emplace_back(0.3, -0.7, 0.4);
        for (const auto& P : pts)
            worst_parity = std::max(worst_parity, std::abs(ground_energy(model, P) - ground_energy(model, -P)));
    }
    rec.at_most(g, "parity_E_P_equals_E_minus_P", worst_parity, cfg.tol.oracle);

    // Reported only.
    const FiberModel model = model_with_e(cfg.params, models.modes, cfg.params.e);
    json radial = json::array();
    for (double P_abs : momentum_norms(Ps)) radial.push_back({{"P_abs", P_abs}, {"deviation", radial_deviation(model, P_abs)}});
    details["radial_deviation"] = radial;

    std::vector<Vec3> ks;
    for (double s : {0.05, 0.1, 0.2, 0.5, 1.0}) {
        ks.push_back(s * Vec3::UnitX());
        ks.push_back(s * Vec3(0.0, 0.6, 0.8));
    }
    double lip = 0.0;
    for (const auto& P : Ps) lip = std::max(lip, lipschitz_constant(model, P, ks));
    details["lipschitz_constant"] = lip;
    rec.flag(g, "lipschitz_constant_finite", std::isfinite(lip), true, "max over ladder", lip);
}

struct PointWork {
    PointAnalysis pa;
    SpinlessChecks sl;
    double taylor = 0.0;
    KramersCertificate cert;
    double commutation = 0.0;
    bool even = true;
};

void kramers_suite(const RunConfig& cfg, const Models& models, const std::vector<std::vector<PointWork>>& work,
                   Recorder& rec, json& details) {
    const std::string g = "kramers";
    const auto Ps = cfg.momenta();

    // theta^2 = -1 and isometry on random vectors.
    std::mt19937_64 rng(cfg.seed + 7);
    std::normal_distribution<double> n01;
    const auto dim = static_cast<Eigen::Index>(2 * models.at.front().fock_dim());
    double sq = 0.0, iso = 0.0, self = 0.0;
    for (int t = 0; t < 16; ++t) {
        CVector psi(dim);
        for (Eigen::Index i = 0; i < dim; ++i) psi(i) = Complex(n01(rng), n01(rng));
        const CVector tp = apply_theta(psi);
        sq = std::max(sq, (apply_theta(tp) + psi).cwiseAbs().maxCoeff());
        iso = std::max(iso, std::abs(tp.norm() - psi.norm()) / psi.norm());
        self = std::max(self, std::abs(psi.dot(tp)) / psi.squaredNorm());
    }
    rec.at_most(g, "theta_squared_is_minus_one", sq, 0.0);
    rec.at_most(g, "theta_isometric", iso, 1e-14);
    rec.at_most(g, "theta_self_orthogonal", self, 1e-14);

    for (std::size_t ie = 0; ie < models.at.size(); ++ie) {
        const auto& model = models.at[ie];
        const std::string tag = "[" + e_tag(models.e[ie]) + "]";
        const auto real = check_reality_relations(model);
        rec.at_most(g, "reality_relations" + tag, real.worst(), 1e-12 * std::max(1.0, real.scale));

        double comm = 0.0;
        bool even = true;
        int certified = 0, not_met = 0;
        double pairing = 0.0, overlap = 0.0;
        json certs = json::array();
        for (std::size_t ip = 0; ip < Ps.size(); ++ip) {
            const auto& w = work[ie][ip];
            comm = std::max(comm, w.commutation);
            even = even && w.even;
            pairing = std::max(pairing, w.cert.pairing_residual);
            overlap = std::max(overlap, w.cert.overlap);
            if (w.cert.status == KramersCertificate::Status::certified) ++certified;
            if (w.cert.status == KramersCertificate::Status::hypotheses_not_met) ++not_met;
            certs.push_back({{"P", vec_json(Ps[ip])},
                             {"status", to_string(w.cert.status)},
                             {"ground_multiplicity", w.cert.ground_multiplicity},
                             {"count_below_sigma", w.cert.count_below_sigma},
                             {"sandwich_holds", w.cert.sandwich_holds},
                             {"pairing_residual", w.cert.pairing_residual},
                             {"overlap", w.cert.overlap},
                             {"note", w.cert.note}});
        }
        details["kramers_certificates"][e_tag(models.e[ie])] = certs;
        rec.at_most(g, "theta_commutation" + tag, comm, cfg.tol.commutation);
        rec.flag(g, "even_multiplicities" + tag, even);
        if (not_met == static_cast<int>(Ps.size())) {
            rec.flag(g, "certificate" + tag, true, false, "hypotheses not met (requires gamma < 1, m_ph > 0)");
        } else {
            rec.flag(g, "certificate_exactly_two" + tag, certified == static_cast<int>(Ps.size()), true,
                     std::to_string(certified) + "/" + std::to_string(Ps.size()) + " certified");
        }

        const Vec3 P = Ps.empty() ? Vec3::Zero() : Ps.back();
        rec.at_most(g, "non_relativistic_commutation" + tag,
                    check_theta_commutes_related(RelatedModel::non_relativistic, model, P), cfg.tol.commutation);
    }

    // Position toy on the strongest coupling of the ladder.
    const auto& strong = models.at[static_cast<std::size_t>(
        std::max_element(models.e.begin(), models.e.end()) - models.e.begin())];
    const double r2 = check_theta_commutes_related(RelatedModel::position_even_V, strong, Vec3::Zero(), {-0.5, 0.5},
                                                   {0.2, 0.2});
    const double r4 = check_theta_commutes_related(RelatedModel::position_even_V, strong, Vec3::Zero(),
                                                   {-0.75, -0.25, 0.25, 0.75}, {1.0, 0.1, 0.1, 1.0});
    rec.at_most(g, "position_toy_even_V_2pt", r2, cfg.tol.commutation);
    rec.at_most(g, "position_toy_even_V_4pt", r4, cfg.tol.commutation);

    // Negative controls must be detected.
    const auto& model = models.at.back();
    CMatrix broken = build_H(model, Ps.empty() ? Vec3::Zero() : Ps.front()).matrix;
    broken += kron(pauli()[2], CMatrix::Identity(broken.rows() / 2, broken.rows() / 2));
    const double neg = check_theta_commutes(broken);
    rec.at_least(g, "negative_control_sigma3_detected", neg, 1e-3);
    const double odd = position_theta_residual(build_position_toy(strong, {-0.5, 0.5}, {-0.3, 0.3}));
    rec.at_least(g, "negative_control_odd_V_detected", odd, 1e-6);
    bool rejected = false;
    try {
        (void)check_theta_commutes_related(RelatedModel::position_even_V, strong, Vec3::Zero(), {-0.5, 0.5},
                                           {-0.3, 0.3});
    } catch (const std::invalid_argument&) {
        rejected = true;
    }
    rec.flag(g, "odd_V_rejected", rejected);
}

void bounds_suite(const RunConfig& cfg, const Models& models, const std::vector<std::vector<PointWork>>& work,
                  Recorder& rec, json& details) {
    const std::string g = "bounds";
    const auto Ps = cfg.momenta();
    const auto norms = momentum_norms(Ps);
    const double slack = cfg.tol.order;

    if (!cfg.params.gap_hypotheses()) {
        rec.flag(g, "sandwich_and_counting", true, false, "skipped: hypotheses not met (requires gamma < 1, m_ph > 0)");
    } else {
        std::vector<GapReport> gaps(models.at.size());
        parallel_for(models.at.size(), cfg.threads, [&](std::size_t ie) {
            EnergyCache cache;
            gaps[ie] = theorem_gap_report(models.at[ie], norms, models.c[ie], &cache);
        });

        for (std::size_t ie = 0; ie < models.at.size(); ++ie) {
            const auto& model = models.at[ie];
            const auto& c = models.c[ie];
            const auto& p = model.params;
            const std::string tag = "[" + e_tag(models.e[ie]) + "]";

            double lower = std::numeric_limits<double>::infinity(), upper = lower, sl = lower, absd = lower,
                   diff = lower, taylor = lower, env_lo = lower, env_hi = lower, below = lower, above = lower;
            bool count_two = true, count_L_two = true, count_order = true;
            json rows = json::array();
            for (std::size_t ip = 0; ip < Ps.size(); ++ip) {
                const auto& w = work[ie][ip];
                const auto& pa = w.pa;
                lower = std::min(lower, relative(pa.lower));
                upper = std::min(upper, relative(pa.upper));
                sl = std::min(sl, relative(w.sl.spinless_lower));
                absd = std::min({absd, relative(w.sl.abs_diff_plus),
                                 relative(w.sl.abs_diff_minus)});
                diff = std::min({diff, relative(w.sl.diff_plus),
                                 relative(w.sl.diff_minus)});
                taylor = std::min(taylor, w.taylor);
                env_lo = std::min(env_lo, pa.E - (pa.envelope.lower - 1e-9));
                env_hi = std::min(env_hi, (pa.envelope.upper + 1e-9) - pa.E);
                below = std::min(below, pa.sigma_minus - pa.E);
                above = std::min(above, pa.E1 ? *pa.E1 - pa.sigma_minus : -std::numeric_limits<double>::infinity());
                count_two = count_two && pa.count_H == 2;
                count_L_two = count_L_two && pa.count_L == 2;
                count_order = count_order && pa.count_H <= pa.count_L;
                rows.push_back({{"P_abs", pa.P_abs},
                                {"E", pa.E},
                                {"E1", pa.E1 ? json(*pa.E1) : json(nullptr)},
                                {"sigma_minus", pa.sigma_minus},
                                {"lower_min_eig", pa.lower.min_eig},
                                {"upper_min_eig", pa.upper.min_eig},
                                {"count_H", pa.count_H},
                                {"count_L", pa.count_L},
                                {"envelope", {pa.envelope.lower, pa.envelope.upper}}});
            }
            details["bounds"][e_tag(models.e[ie])] = {
                {"constants",
                 {{"eC1", c.eC1}, {"eC2", c.eC2}, {"eC3", c.eC3}, {"e2C4", c.e2C4}, {"eC_iso", c.eC_iso}}},
                {"points", rows}};

            rec.at_least(g, "sandwich_lower" + tag, lower, -slack);
            rec.at_least(g, "sandwich_upper" + tag, upper, -slack);
            rec.flag(g, "count_below_sigma_is_two" + tag, count_two);
            rec.flag(g, "count_below_sigma_L_minus_is_two" + tag, count_L_two);
            rec.flag(g, "count_H_at_most_count_L" + tag, count_order);
            rec.at_least(g, "E_below_sigma_minus" + tag, below, std::numeric_limits<double>::min(), true,
                         "min over P of sigma_minus - E (must be > 0)");
            rec.at_least(g, "E1_at_least_sigma_minus" + tag, above, -slack);
            rec.at_least(g, "energy_envelope_lower" + tag, env_lo, 0.0);
            rec.at_least(g, "energy_envelope_upper" + tag, env_hi, 0.0);
            rec.at_least(g, "spinless_lower" + tag, sl, -slack);
            rec.at_least(g, "spin_difference_abs_D" + tag, absd, -slack);
            rec.at_least(g, "spin_difference_H" + tag, diff, -slack);
            rec.at_least(g, "taylor_remainder_psd" + tag, taylor, -slack);

            const auto& gr = gaps[ie];
            rec.at_least(g, "gap_lower_bound" + tag, gr.min_margin_gap, -1e-9, true,
                         "min over P of (E1 - E) - [(1 - eC1 - gamma) m_ph - eC2]");
            rec.at_least(g, "gap_chain" + tag, gr.min_margin_chain, -1e-9, true,
                         "min over P of (E1 - E) - (sigma_minus - upper envelope)");
            double max_delta = -std::numeric_limits<double>::infinity();
            for (const auto& row : gr.rows) max_delta = std::max(max_delta, row.delta);
            rec.at_most(g, "delta_at_most_m_ph" + tag, max_delta, p.m_ph + 1e-12);
            rec.at_least(g, "delta_lower_bound" + tag, gr.min_margin_delta, -1e-9, true,
                         "min over P of delta - [(1 - gamma) m_ph - e c1_hat]");

            json curve = json::array();
            for (const auto& row : gr.rows)
                curve.push_back({{"P_abs", row.P_abs}, {"delta", row.delta}, {"gap", row.gap},
                                 {"bound_delta", row.bound_delta}, {"bound_gap", row.bound_gap},
                                 {"chain", row.chain}});
            details["gap"][e_tag(models.e[ie])] = {{"e_c1_hat", gr.e_c1_hat},
                                                   {"min_gap", gr.min_gap},
                                                   {"min_margin_gap", gr.min_margin_gap},
                                                   {"min_margin_delta", gr.min_margin_delta},
                                                   {"rows", curve}};

            // Uniformity of the measured margin across the ladder (reported).
            if (!gr.rows.empty() && gr.rows.front().margin_gap != 0.0) {
                const double single = gr.rows.front().margin_gap;
                const double rel = std::abs(gr.min_margin_gap - single) / std::abs(single);
                rec.at_most(g, "gap_margin_uniformity" + tag, rel, 0.1, false,
                            "|min_P margin - margin(P_0)| / |margin(P_0)|");
            }

            if (models.e[ie] == 0.0) {
                rec.at_least(g, "free_gap_exact_bound" + tag, gr.min_gap - (1.0 - p.gamma) * p.m_ph, -1e-9);
                const auto trial = default_trial_set(model);
                double dev = 0.0;
                for (std::size_t ip = 0; ip < Ps.size(); ++ip) {
                    const Vec3 P = norms[ip] * Vec3::UnitX();
                    const double base = p.gamma * std::hypot(norms[ip], p.M);
                    double best = std::numeric_limits<double>::infinity();
                    for (const auto& k : trial)
                        best = std::min(best, p.gamma * std::hypot((P - k).norm(), p.M) + dispersion(k, p.m_ph) - base);
                    dev = std::max(dev, std::abs(gr.rows[ip].delta - best));
                }
                rec.at_most(g, "free_delta_oracle" + tag, dev, cfg.tol.oracle);
            }
        }

        // Envelope width growth in e at P = 0 (reported).
        json width = json::array();
        for (std::size_t ie = 0; ie < models.at.size(); ++ie) {
            const auto env = corollary_energy_bounds(models.at[ie].params, 0.0, models.c[ie]);
            width.push_back({{"e", models.e[ie]}, {"upper_minus_lower", env.upper - env.lower}});
        }
        details["envelope_width"] = width;
    }

    // Property suites (independent of the gap hypotheses).
    const std::string pg = "properties";
    const auto& omega_all = models.at.front().table.omega;
    const auto n_field = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, cfg.suite.field_modes)), omega_all.size());
    const std::vector<double> omega(omega_all.begin(), omega_all.begin() + static_cast<std::ptrdiff_t>(n_field));
    const auto fr = field_inequality_suite(omega, cfg.suite.field_N_max, cfg.suite.field_samples, cfg.seed + 11);
    static const char* items[5] = {"i", "ii", "iii", "iv", "v"};
    for (int k = 0; k < 5; ++k)
        rec.at_most(pg, std::string("field_inequality_") + items[k], static_cast<double>(fr.violations[static_cast<std::size_t>(k)]), 0.0,
                    true, "worst (lhs - rhs)/max(1, rhs) = " + format_double(fr.worst[static_cast<std::size_t>(k)]));
    rec.at_least(pg, "field_form_bound", fr.form_bound_min_eig, -1e-10);

    const auto mono = sqrt_monotone_test(cfg.suite.monotone_dim, cfg.suite.monotone_trials, cfg.seed + 13);
    rec.flag(pg, "sqrt_operator_monotone", mono.passed, true,
             std::to_string(mono.failures) + " failures in " + std::to_string(mono.trials) + " trials",
             mono.worst_margin);

    const Vec3 P_trend = Ps.empty() ? Vec3::Zero() : Ps[Ps.size() / 2];
    const auto trend = interaction_trend(cfg.params, P_trend, cfg.suite.trend_e);
    rec.at_most(pg, "interaction_norm_intercept", trend.intercept, 1e-10);
    rec.flag(pg, "interaction_norm_slope_finite", std::isfinite(trend.slope), true, "", trend.slope);
    rec.at_most(pg, "interaction_norm_linearity", trend.max_ratio_deviation, 0.25, false,
                "max |ratio of norms / ratio of couplings - 1|");
    double max_norm = 0.0;
    for (double v : trend.norm) max_norm = std::max(max_norm, v);
    rec.at_most(pg, "interaction_norm_below_one", max_norm, 1.0, false);
    details["interaction_trend"] = {{"e", trend.e}, {"norm", trend.norm}, {"slope", trend.slope}};
}

void convergence_suite(const RunConfig& cfg, Recorder& rec, json& details) {
    json tables = json::array();
    for (const auto& P : cfg.convergence.P) {
        json rows = json::array();
        try {
            const auto table = convergence_study(P, cfg.params, cfg.convergence.ladder);
            bool shrinking = true;
            for (std::size_t i = 2; i < table.size(); ++i)
                shrinking = shrinking && std::abs(*table[i].change) <= std::abs(*table[i - 1].change) + 1e-15;
            for (const auto& r : table)
                rows.push_back({{"N_max", r.N_max},
                                {"n_shells", r.grid.n_shells},
                                {"directions", to_string(r.grid.directions)},
                                {"fock_dim", r.fock_dim},
                                {"E", r.E},
                                {"change", r.change ? json(*r.change) : json(nullptr)}});
            std::ostringstream name;
            name << "differences_shrinking[P=" << format_double(P(0)) << "," << format_double(P(1)) << ","
                 << format_double(P(2)) << "]";
            rec.flag("convergence", name.str(), shrinking, false);
        } catch (const std::exception& e) {
            rec.flag("convergence", "study", false, false, e.what());
        }
        tables.push_back({{"P", vec_json(P)}, {"rows", rows}});
    }
    details["convergence"] = tables;
}

}  // namespace

VerifyReport verify_suite(const RunConfig& cfg) {
    VerifyReport rep;
    Recorder rec(rep);
    const Models models = build_models(cfg);
    const auto Ps = cfg.momenta();
    const bool want_bounds = cfg.has_task("bounds");
    const bool want_kramers = cfg.has_task("kramers");

    rep.details["model"] = to_json(cfg.params);
    rep.details["n_modes"] = models.modes.size();
    rep.details["fock_dim"] = models.at.front().fock_dim();

    // Per-(e, P) eigenproblems, computed in parallel and consumed in order.
    std::vector<std::vector<PointWork>> work(models.at.size(), std::vector<PointWork>(Ps.size()));
    if (want_bounds || want_kramers) {
        const std::size_t n = models.at.size() * Ps.size();
        parallel_for(n, cfg.threads, [&](std::size_t idx) {
            const std::size_t ie = idx / Ps.size(), ip = idx % Ps.size();
            const auto& model = models.at[ie];
            const auto& c = models.c[ie];
            auto& w = work[ie][ip];
            const Vec3& P = Ps[ip];
            if (want_bounds && cfg.params.gap_hypotheses()) {
                w.pa = analyze_point(model, P.norm(), c, cfg.tol.degeneracy, cfg.tol.order);
                w.sl = spinless_checks(model, P.norm(), c);
                w.taylor = taylor_remainder_min_eig(model, P.norm());
            }
            if (want_kramers) {
                CMatrix pert;
                if (cfg.inject_symmetry_breaking)
                    pert = kron(pauli()[2], CMatrix::Identity(static_cast<Eigen::Index>(model.fock_dim()),
                                                              static_cast<Eigen::Index>(model.fock_dim())));
                w.cert = kramers_certificate(model, P, c, pert, cfg.tol.degeneracy);
                CMatrix h = build_H(model, P).matrix;
                if (pert.size()) h += pert;
                w.commutation = check_theta_commutes(h);
                const RVector vals = hermitian_eigenvalues(h);
                std::vector<double> v(vals.data(), vals.data() + vals.size());
                for (const auto& cl : cluster_degeneracy(v, cfg.tol.degeneracy))
                    w.even = w.even && cl.multiplicity % 2 == 0;
            }
        });
    }

    if (cfg.has_task("spectrum")) spectrum_suite(cfg, models, rec, rep.details);
    if (want_kramers) kramers_suite(cfg, models, work, rec, rep.details);
    if (want_bounds) bounds_suite(cfg, models, work, rec, rep.details);
    if (cfg.has_task("convergence")) convergence_suite(cfg, rec, rep.details);
    return rep;
}

// --- subcommands -------------------------------------------------------------

namespace {

struct PointResult {
    std::optional<SpectrumReport> report;
    std::string error;
};

std::vector<PointResult> spectrum_reports(const RunConfig& cfg, const RunOptions& opts) {
    const FiberModel model = FiberModel::build(cfg.params);
    const auto c = BoundConstants::from(cfg.params, model.norms);
    const auto Ps = cfg.momenta();
    EnergyCache energies;
    std::vector<PointResult> out(Ps.size());
    parallel_for(Ps.size(), cfg.threads, [&](std::size_t i) {
        const std::string key = ResultCache::key(cfg.params, cfg.tol, Ps[i]);
        if (opts.cache) {
            if (auto hit = opts.cache->find(key)) {
                out[i].report = *hit;
                return;
            }
        }
        try {
            out[i].report = compute_spectrum_report(model, c, Ps[i], cfg.tol, &energies);
            if (opts.cache) opts.cache->store(key, *out[i].report);
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    });
    if (opts.cache) opts.cache->save();
    return out;
}

std::vector<SpectrumReport> successful(const std::vector<PointResult>& results) {
    std::vector<SpectrumReport> rows;
    for (const auto& r : results)
        if (r.report) rows.push_back(*r.report);
    return rows;
}

int report_errors(const std::vector<PointResult>& results, const RunConfig& cfg, std::ostream& log) {
    const auto Ps = cfg.momenta();
    int failures = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].error.empty()) continue;
        ++failures;
        log << "P[" << i << "] = (" << format_double(Ps[i](0)) << ", " << format_double(Ps[i](1)) << ", "
            << format_double(Ps[i](2)) << "): " << results[i].error << "\n";
    }
    return failures;
}

}  // namespace

int run_spectrum(const RunConfig& cfg, const RunOptions& opts) {
    auto& log = log_of(opts);
    const auto results = spectrum_reports(cfg, opts);
    const auto rows = successful(results);

    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    write_text(opts.out_dir / "spectrum.csv", csv.str());

    std::ostringstream modes;
    write_modes_csv(modes, build_mode_set(cfg.params));
    write_text(opts.out_dir / "modes.csv", modes.str());

    for (std::size_t i = 0; i < results.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "P_%03zu.json", i);
        json j = results[i].report ? to_json(*results[i].report) : json{{"P", vec_json(cfg.momenta()[i])}};
        if (!results[i].error.empty()) j["error"] = results[i].error;
        write_json(opts.out_dir / "spectrum" / name, j);
    }
    const int failures = report_errors(results, cfg, log);
    log << "spectrum: " << rows.size() << " points written to " << opts.out_dir.string() << "\n";
    return failures ? 1 : 0;
}

int run_sweep(const RunConfig& cfg, const RunOptions& opts) {
    auto& log = log_of(opts);
    const auto results = spectrum_reports(cfg, opts);
    const auto rows = successful(results);

    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    write_text(opts.out_dir / "sweep.csv", csv.str());

    const FiberModel model = FiberModel::build(cfg.params);
    const auto c = BoundConstants::from(cfg.params, model.norms);
    json summary;
    summary["model"] = to_json(cfg.params);
    summary["constants"] = {{"eC1", c.eC1}, {"eC2", c.eC2}, {"eC3", c.eC3}, {"e2C4", c.e2C4}, {"eC_iso", c.eC_iso}};
    summary["points"] = rows.size();

    double min_gap = std::numeric_limits<double>::infinity();
    double min_delta = min_gap;
    json checks = json::array();
    for (const auto& r : rows) {
        if (r.E1) min_gap = std::min(min_gap, *r.E1 - r.E);
        min_delta = std::min(min_delta, r.delta);
        json row{{"P", vec_json(r.P)}};
        for (const auto& [name, value] : r.residuals) row[name] = value;
        checks.push_back(row);
    }
    summary["min_gap"] = rows.empty() ? json(nullptr) : json(min_gap);
    summary["min_delta"] = rows.empty() ? json(nullptr) : json(min_delta);
    summary["bound_checks"] = checks;

    std::ostringstream curve;
    curve << "P_abs,delta,gap,bound_delta,bound_gap,chain,margin_delta,margin_gap,margin_chain\n";
    if (cfg.params.gap_hypotheses() && !rows.empty()) {
        std::vector<double> norms;
        for (const auto& r : rows) norms.push_back(r.P.norm());
        EnergyCache energies;
        const auto gr = theorem_gap_report(model, norms, c, &energies);
        for (const auto& row : gr.rows) {
            curve << format_double(row.P_abs) << ',' << format_double(row.delta) << ',' << format_double(row.gap) << ','
                  << format_double(row.bound_delta) << ',' << format_double(row.bound_gap) << ','
                  << format_double(row.chain) << ',' << format_double(row.margin_delta) << ','
                  << format_double(row.margin_gap) << ',' << format_double(row.margin_chain) << '\n';
        }
        summary["margins"] = {{"e_c1_hat", gr.e_c1_hat},
                              {"min_margin_delta", gr.min_margin_delta},
                              {"min_margin_gap", gr.min_margin_gap},
                              {"min_margin_chain", gr.min_margin_chain}};
    } else {
        summary["margins"] = "skipped: hypotheses not met";
    }
    write_text(opts.out_dir / "gap_curve.csv", curve.str());
    write_json(opts.out_dir / "sweep_summary.json", summary);

    const int failures = report_errors(results, cfg, log);
    log << "sweep: " << rows.size() << " points, min(E1 - E) = " << format_double(min_gap) << "\n";
    return failures ? 1 : 0;
}

namespace {

int emit_verify(const VerifyReport& rep, const std::filesystem::path& file, std::ostream& log) {
    write_json(file, to_json(rep));
    for (const auto& c : rep.checks) {
        const char* tag = c.passed ? "PASS" : (c.hard ? "FAIL" : "WARN");
        log << tag << "  " << c.group << "/" << c.name << "  value=" << format_double(c.value);
        if (c.limit != 0.0) log << " limit=" << format_double(c.limit);
        if (!c.detail.empty()) log << "  (" << c.detail << ")";
        log << "\n";
    }
    log << (rep.passed() ? "verify: all hard checks passed" : "verify: " + std::to_string(rep.failures()) + " hard check(s) failed")
        << "\n";
    return rep.passed() ? 0 : 1;
}

}  // namespace

int run_verify(const RunConfig& cfg, const RunOptions& opts) {
    return emit_verify(verify_suite(cfg), opts.out_dir / "verify.json", log_of(opts));
}

int run_bounds(const RunConfig& cfg, const RunOptions& opts) {
    RunConfig sub = cfg;
    sub.tasks = {"bounds"};
    sub.e_ladder = {cfg.params.e};
    return emit_verify(verify_suite(sub), opts.out_dir / "bounds.json", log_of(opts));
}

int run_convergence(const RunConfig& cfg, const RunOptions& opts) {
    auto& log = log_of(opts);
    std::ostringstream csv;
    csv << "P_x,P_y,P_z,N_max,n_shells,directions,n_modes,fock_dim,E,change\n";
    json out = json::array();
    int failures = 0;
    for (const auto& P : cfg.convergence.P) {
        try {
            for (const auto& r : convergence_study(P, cfg.params, cfg.convergence.ladder)) {
                csv << format_double(P(0)) << ',' << format_double(P(1)) << ',' << format_double(P(2)) << ','
                    << r.N_max << ',' << r.grid.n_shells << ',' << to_string(r.grid.directions) << ',' << r.n_modes
                    << ',' << r.fock_dim << ',' << format_double(r.E) << ','
                    << (r.change ? format_double(*r.change) : std::string()) << '\n';
                out.push_back({{"P", vec_json(P)},
                               {"N_max", r.N_max},
                               {"n_shells", r.grid.n_shells},
                               {"directions", to_string(r.grid.directions)},
                               {"n_modes", r.n_modes},
                               {"fock_dim", r.fock_dim},
                               {"E", r.E},
                               {"change", r.change ? json(*r.change) : json(nullptr)}});
            }
        } catch (const std::exception& e) {
            ++failures;
            log << "convergence at P = (" << format_double(P(0)) << ", " << format_double(P(1)) << ", "
                << format_double(P(2)) << "): " << e.what() << "\n";
        }
    }
    write_text(opts.out_dir / "convergence.csv", csv.str());
    write_json(opts.out_dir / "convergence.json", out);
    log << "convergence: " << out.size() << " rows\n";
    return failures ? 1 : 0;
}

}  // namespace fibergap
