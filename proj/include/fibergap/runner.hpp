#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fibergap/bounds.hpp"
#include "fibergap/config.hpp"
#include "fibergap/spectral.hpp"

namespace fibergap {

nlohmann::json to_json(const SpectrumReport& r);
SpectrumReport spectrum_report_from_json(const nlohmann::json& j);

/// Persistent SpectrumReport store keyed by a hash of (params, tolerances,
/// P quantized to 1e-12). Concurrent reads, exclusive writes. Reports round-trip
/// through JSON losslessly, so a hit is bit-identical to a recomputation.
class ResultCache {
public:
    ResultCache() = default;
    /// Loads `path` if it exists; save() writes back to it.
    explicit ResultCache(std::filesystem::path path);

    static std::string key(const ModelParams& params, const Tolerances& tol, const Vec3& P);

    std::optional<SpectrumReport> find(const std::string& key) const;
    void store(const std::string& key, const SpectrumReport& report);
    void save() const;

    std::size_t size() const;
    std::size_t hits() const { return hits_.load(); }

private:
    std::filesystem::path path_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, nlohmann::json> entries_;
    mutable std::atomic<std::size_t> hits_{0};
};

/// "%.17g"; NaN and infinities as nan / inf / -inf.
std::string format_double(double x);

/// Header P_x,P_y,P_z,E,E1,mult,delta,sigma_minus,count_below.
void write_sweep_csv(std::ostream& os, std::span<const SpectrumReport> rows);

/// Runs f(0..n-1) on up to `threads` workers (0: hardware concurrency).
/// Results must be written by index; the first exception by index is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

/// Full per-P record from one dense eigensolve plus the Delta trial evaluations.
/// Off-axis momenta use the direction-free constant in sigma_minus; sandwich
/// residuals are included for P = |P| u.
SpectrumReport compute_spectrum_report(const FiberModel& model, const BoundConstants& c, const Vec3& P,
                                       const Tolerances& tol, EnergyCache* energies = nullptr);

struct Check {
    std::string group;
    std::string name;
    bool hard = true;
    bool passed = false;
    double value = 0.0;
    double limit = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<Check> checks;
    nlohmann::json details = nlohmann::json::object();

    bool passed() const;  // all hard checks
    int failures() const;
};

/// Every invariant suite selected by cfg.tasks.
VerifyReport verify_suite(const RunConfig& cfg);

nlohmann::json to_json(const VerifyReport& r);

struct RunOptions {
    std::filesystem::path out_dir = "out";
    ResultCache* cache = nullptr;
    std::ostream* log = nullptr;
};

// Each returns a process exit code: 0 pass, 1 assertion or per-P failure.
int run_spectrum(const RunConfig& cfg, const RunOptions& opts);
int run_sweep(const RunConfig& cfg, const RunOptions& opts);
int run_verify(const RunConfig& cfg, const RunOptions& opts);
int run_bounds(const RunConfig& cfg, const RunOptions& opts);
int run_convergence(const RunConfig& cfg, const RunOptions& opts);

}  // namespace fibergap
