#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fibergap/modes.hpp"
#include "fibergap/spectral.hpp"

namespace fibergap {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Tolerances {
    double degeneracy = 1e-8;   // relative clustering tolerance
    double order = 1e-9;        // operator-inequality slack, relative to max norm
    double quad = 1e-10;        // square-root quadrature target
    double commutation = 1e-12; // theta commutation residual
    double pairing = 1e-8;      // Kramers eigenvector pairing
    double oracle = 1e-10;      // closed-form comparisons at e = 0
};

struct PropertySuite {
    int field_samples = 1000;
    int field_modes = 3;
    int field_N_max = 3;
    int monotone_trials = 1000;
    int monotone_dim = 12;
    int algebra_draws = 20;
    int sqrt_draws = 10;
    double algebra_e_max = 0.3;
    std::vector<double> trend_e{0.0, 0.025, 0.05, 0.1, 0.2};
};

struct ConvergencePlan {
    std::vector<Vec3> P{Vec3::Zero(), Vec3::UnitX()};
    std::vector<ConvergenceRung> ladder;
};

struct RunConfig {
    ModelParams params;
    /// Explicit momenta. When absent, a radial ladder along u = (1, 0, 0).
    std::optional<std::vector<Vec3>> P_list;
    double P_max = 2.0;
    int ladder_points = 11;
    std::vector<double> e_ladder{0.0, 0.05, 0.1};
    std::vector<std::string> tasks{"spectrum", "bounds", "kramers", "convergence"};
    Tolerances tol;
    PropertySuite suite;
    ConvergencePlan convergence;
    std::uint64_t seed = 20240611;
    int threads = 0;  // 0: hardware concurrency
    std::string cache_path;
    std::string out_dir = "out";
    /// Negative control: adds sigma_3 (x) 1 to every H(P) the Kramers checks see.
    bool inject_symmetry_breaking = false;

    std::vector<Vec3> momenta() const;
    bool has_task(const std::string& name) const;
};

RunConfig default_config();

nlohmann::json to_json(const ModelParams& p);
nlohmann::json to_json(const RunConfig& cfg);

/// Strict: unknown keys and wrong types raise ConfigError naming the key path.
RunConfig config_from_json(const nlohmann::json& j);

/// Parse errors report line and column.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace fibergap
