#include "fibergap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fibergap {

LowSpectrum low_spectrum(const CMatrix& h, std::size_t m) {
    const auto dec = hermitian_eigen(h);
    const auto n = static_cast<std::size_t>(dec.values.size());
    const auto count = static_cast<Eigen::Index>(std::min(m, n));
    LowSpectrum out;
    out.values = dec.values.head(count);
    out.vectors = dec.vectors.leftCols(count);
    const double scale = std::max(1e-300, n ? std::max(std::abs(dec.values(0)),
                                                       std::abs(dec.values(static_cast<Eigen::Index>(n) - 1)))
                                            : 1.0);
    for (Eigen::Index i = 0; i < count; ++i) {
        const double r = (h * out.vectors.col(i) - out.values(i) * out.vectors.col(i)).norm() / scale;
        out.max_residual = std::max(out.max_residual, r);
    }
    if (out.max_residual > 1e-9)
        throw EigensolverFailure("eigenpair residual " + std::to_string(out.max_residual) + " exceeds 1e-9");
    return out;
}

std::vector<Cluster> cluster_degeneracy(std::span<const double> eigenvalues, double scale_tol) {
    std::vector<Cluster> out;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        const double lam = eigenvalues[i];
        if (i > 0) {
            const double prev = eigenvalues[i - 1];
            if (lam - prev <= scale_tol * std::max(1.0, std::abs(lam))) {
                out.back().multiplicity += 1;
                continue;
            }
        }
        out.push_back({lam, 1});
    }
    return out;
}

GroundData ground_data(const FiberModel& model, const Vec3& P, const SpectralOptions& opts) {
    const CMatrix h = build_H(model, P).matrix;
    const auto dim = static_cast<std::size_t>(h.rows());
    std::size_t m = std::max<std::size_t>(2, opts.initial_count);
    for (;;) {
        const LowSpectrum low = low_spectrum(h, m);
        std::vector<double> vals(low.values.data(), low.values.data() + low.values.size());
        const auto clusters = cluster_degeneracy(vals, opts.degeneracy_tol);
        GroundData g;
        g.E = clusters.front().value;
        g.multiplicity = clusters.front().multiplicity;
        g.max_residual = low.max_residual;
        if (clusters.size() > 1) {
            g.E1 = vals[static_cast<std::size_t>(g.multiplicity)];
            return g;
        }
        if (m >= dim) return g;
        m = std::min(dim, 2 * m);
    }
}

EnergyCache::Key EnergyCache::key(const Vec3& P) {
    Key k;
    for (int j = 0; j < 3; ++j) k[static_cast<std::size_t>(j)] = std::llround(P(j) * 1e12);
    return k;
}

std::optional<double> EnergyCache::find(const Vec3& P) const {
    std::lock_guard lock(mutex_);
    const auto it = values_.find(key(P));
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

void EnergyCache::store(const Vec3& P, double E) {
    std::lock_guard lock(mutex_);
    values_[key(P)] = E;
}

std::size_t EnergyCache::size() const {
    std::lock_guard lock(mutex_);
    return values_.size();
}

double ground_energy(const FiberModel& model, const Vec3& P, EnergyCache* cache) {
    if (cache) {
        if (auto hit = cache->find(P)) return *hit;
    }
    const double E = min_eigenvalue(build_H(model, P).matrix);
    if (cache) cache->store(P, E);
    return E;
}

std::vector<Vec3> default_trial_set(const FiberModel& model, std::span<const Vec3> extra) {
    std::vector<Vec3> out{Vec3::Zero()};
    for (const auto& mode : model.modes) {
        const bool seen = std::any_of(out.begin(), out.end(), [&](const Vec3& k) { return k == mode.k; });
        if (!seen) out.push_back(mode.k);
    }
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

DeltaResult delta_gap(const FiberModel& model, const Vec3& P, std::span<const Vec3> trial_ks, EnergyCache* cache) {
    const double E = ground_energy(model, P, cache);
    DeltaResult best{std::numeric_limits<double>::infinity(), Vec3::Zero()};
    for (const auto& k : trial_ks) {
        const double value = ground_energy(model, P - k, cache) + dispersion(k, model.params.m_ph) - E;
        if (value < best.delta) best = {value, k};
    }
    return best;
}

std::vector<ConvergenceRow> convergence_study(const Vec3& P, const ModelParams& params,
                                              std::span<const ConvergenceRung> ladder) {
    std::vector<ConvergenceRow> rows;
    for (const auto& rung : ladder) {
        ModelParams p = params;
        p.N_max = rung.N_max;
        p.grid = rung.grid;
        const FiberModel model = FiberModel::build(p);
        ConvergenceRow row;
        row.N_max = rung.N_max;
        row.grid = rung.grid;
        row.n_modes = model.modes.size();
        row.fock_dim = model.fock_dim();
        row.E = ground_energy(model, P);
        if (!rows.empty()) row.change = row.E - rows.back().E;
        rows.push_back(row);
    }
    return rows;
}

double radial_deviation(const FiberModel& model, double P_abs) {
    const double c = 1.0 / std::sqrt(3.0);
    const std::array<Vec3, 4> dirs{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), Vec3(c, c, c)};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& d : dirs) {
        const double E = ground_energy(model, P_abs * d);
        lo = std::min(lo, E);
        hi = std::max(hi, E);
    }
    return hi - lo;
}

}  // namespace fibergap
