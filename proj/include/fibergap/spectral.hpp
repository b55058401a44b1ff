#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fibergap/hamiltonian.hpp"

namespace fibergap {

struct LowSpectrum {
    RVector values;   // ascending
    CMatrix vectors;  // orthonormal columns
    double max_residual = 0.0;  // max_i ||H v_i - lambda_i v_i|| / ||H||
};

/// The m smallest eigenpairs of a Hermitian matrix (dense path). Throws
/// EigensolverFailure when the solver fails or a residual exceeds 1e-9 ||H||.
LowSpectrum low_spectrum(const CMatrix& h, std::size_t m);

struct Cluster {
    double value;
    int multiplicity;
};

/// Greedy clustering of an ascending list: a value within
/// scale_tol * max(1, |lambda|) of its predecessor joins the current cluster.
std::vector<Cluster> cluster_degeneracy(std::span<const double> eigenvalues, double scale_tol = 1e-8);

struct SpectralOptions {
    double degeneracy_tol = 1e-8;
    std::size_t initial_count = 8;
};

struct GroundData {
    double E = 0.0;
    std::optional<double> E1;  // empty when the truncation holds no level above the ground cluster
    int multiplicity = 0;
    double max_residual = 0.0;
};

GroundData ground_data(const FiberModel& model, const Vec3& P, const SpectralOptions& opts = {});

/// Ground energies keyed by P quantized to 1e-12. Safe for concurrent use;
/// identical keys always map to identical values, so last writer wins.
class EnergyCache {
public:
    using Key = std::array<std::int64_t, 3>;
    static Key key(const Vec3& P);

    std::optional<double> find(const Vec3& P) const;
    void store(const Vec3& P, double E);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<Key, double> values_;
};

/// E(P) through the cache.
double ground_energy(const FiberModel& model, const Vec3& P, EnergyCache* cache = nullptr);

/// {0} followed by the distinct mode wavevectors, then `extra`.
std::vector<Vec3> default_trial_set(const FiberModel& model, std::span<const Vec3> extra = {});

struct DeltaResult {
    double delta = 0.0;
    Vec3 argmin = Vec3::Zero();
};

/// min over trial k of E(P - k) + omega(k) - E(P).
DeltaResult delta_gap(const FiberModel& model, const Vec3& P, std::span<const Vec3> trial_ks,
                      EnergyCache* cache = nullptr);

struct SpectrumReport {
    Vec3 P = Vec3::Zero();
    double E = 0.0;
    std::optional<double> E1;
    int ground_multiplicity = 0;
    double delta = 0.0;
    double sigma_minus = 0.0;
    int eigencount_below_sigma = 0;
    std::map<std::string, double> residuals;
};

struct ConvergenceRung {
    int N_max = 0;
    GridSpec grid;
};

struct ConvergenceRow {
    int N_max = 0;
    GridSpec grid;
    std::size_t n_modes = 0;
    std::size_t fock_dim = 0;
    double E = 0.0;
    std::optional<double> change;  // E minus previous rung
};

std::vector<ConvergenceRow> convergence_study(const Vec3& P, const ModelParams& params,
                                              std::span<const ConvergenceRung> ladder);

/// max - min of E over several directions with the same |P|. Reported only:
/// rotation covariance is broken by the grid.
double radial_deviation(const FiberModel& model, double P_abs);

}  // namespace fibergap
