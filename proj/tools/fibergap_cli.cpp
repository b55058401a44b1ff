// fibergap command line: spectrum, sweep, verify, bounds, convergence, print-config.
// Exit codes: 0 pass, 1 assertion failure, 2 usage or config error.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fibergap/config.hpp"
#include "fibergap/runner.hpp"

namespace {

constexpr int kUsageError = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral toolkit for the truncated semi-relativistic fiber Hamiltonian"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir, cache_path;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON config file (defaults: print-config)")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides config out_dir)");
    app.add_option("--threads", threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "seed for the randomized property suites");
    app.add_option("--cache", cache_path, "result cache file (overrides config cache_path)");

    auto* spectrum = app.add_subcommand("spectrum", "per-P spectrum reports and aggregate CSV");
    auto* sweep = app.add_subcommand("sweep", "P sweep CSV with gap margins");
    auto* verify = app.add_subcommand("verify", "run every invariant suite; exit code encodes pass/fail");
    auto* bounds = app.add_subcommand("bounds", "operator sandwich, counting and property suites at the config coupling");
    auto* convergence = app.add_subcommand("convergence", "ground energy along the truncation ladder");
    auto* print_config = app.add_subcommand("print-config", "print the effective configuration as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    fibergap::RunConfig cfg;
    try {
        cfg = config_path.empty() ? fibergap::default_config() : fibergap::load_config(config_path);
    } catch (const fibergap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsageError;
    }
    if (threads) cfg.threads = *threads;
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!cache_path.empty()) cfg.cache_path = cache_path;

    if (print_config->parsed()) {
        std::cout << fibergap::to_json(cfg).dump(2) << "\n";
        return 0;
    }

    try {
        std::optional<fibergap::ResultCache> cache;
        if (!cfg.cache_path.empty()) cache.emplace(cfg.cache_path);
        fibergap::RunOptions opts{cfg.out_dir, cache ? &*cache : nullptr, &std::cerr};

        const auto start = std::chrono::steady_clock::now();
        int code = 0;
        if (spectrum->parsed()) code = fibergap::run_spectrum(cfg, opts);
        if (sweep->parsed()) code = fibergap::run_sweep(cfg, opts);
        if (verify->parsed()) code = fibergap::run_verify(cfg, opts);
        if (bounds->parsed()) code = fibergap::run_bounds(cfg, opts);
        if (convergence->parsed()) code = fibergap::run_convergence(cfg, opts);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        std::cerr << "elapsed " << elapsed.count() << " s";
        if (cache) std::cerr << ", cache hits " << cache->hits() << "/" << cache->size();
        std::cerr << "\n";
        return code;
    } catch (const fibergap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsageError;
    } catch (const fibergap::BasisTooLarge& e) {
        std::cerr << "truncation too large: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
