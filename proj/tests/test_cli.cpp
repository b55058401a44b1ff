#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fibergap/config.hpp"
#include "fibergap/runner.hpp"

using namespace fibergap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fibergap_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig quick(const std::string& tasks_csv = "") {
    RunConfig cfg = default_config();
    cfg.params.grid.n_shells = 1;
    cfg.params.grid.directions = DirectionSet::pair2;
    cfg.ladder_points = 3;
    cfg.P_max = 1.0;
    cfg.suite.field_samples = 40;
    cfg.suite.monotone_trials = 40;
    cfg.suite.algebra_draws = 3;
    cfg.suite.sqrt_draws = 2;
    cfg.threads = 1;
    if (!tasks_csv.empty()) cfg.tasks = {tasks_csv};
    return cfg;
}

}  // namespace

TEST_CASE("config round trip") {
    RunConfig cfg = default_config();
    cfg.params.e = 0.07;
    cfg.params.grid.directions = DirectionSet::lebedev14;
    cfg.P_list = std::vector<Vec3>{Vec3(0.1, 0.2, 0.3)};
    cfg.tasks = {"kramers"};
    cfg.seed = 7;
    const auto j = to_json(cfg);
    const RunConfig back = config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.params.e == 0.07);
    REQUIRE(back.P_list);
    CHECK(back.momenta().size() == 1);
    CHECK(parse_config(j.dump()).seed == 7);
}

TEST_CASE("strict config errors") {
    CHECK_THROWS_AS(parse_config(R"({"model": {"colour": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"e": "x"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"tasks": ["dance"]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"gamma": 1.5}})"), ConfigError);
    try {
        parse_config("{\n  \"seed\": 1,\n  oops\n}");
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    try {
        parse_config(R"({"model": {"grid": {"shells": 1}}})");
        FAIL("expected an unknown key");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("model.grid.shells") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/fibergap.json"), ConfigError);
}

TEST_CASE("momenta ladder") {
    RunConfig cfg = default_config();
    const auto P = cfg.momenta();
    REQUIRE(P.size() == 11);
    CHECK(P.front() == Vec3::Zero());
    CHECK(P.back() == Vec3(2, 0, 0));
    cfg.P_list = std::vector<Vec3>{};
    CHECK(cfg.momenta().empty());
}

TEST_CASE("format_double") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
    CHECK(std::stod(format_double(M_PI)) == M_PI);
}

TEST_CASE("sweep csv") {
    std::ostringstream empty;
    write_sweep_csv(empty, {});
    CHECK(empty.str() == "P_x,P_y,P_z,E,E1,mult,delta,sigma_minus,count_below\n");

    SpectrumReport r;
    r.P = Vec3(1, 0, 0);
    r.E = 0.5;
    r.ground_multiplicity = 2;
    r.delta = 0.25;
    r.sigma_minus = 0.75;
    r.eigencount_below_sigma = 2;
    std::ostringstream os;
    write_sweep_csv(os, std::vector<SpectrumReport>{r});
    CHECK(os.str().find("\n1,0,0,0.5,nan,2,0.25,0.75,2\n") != std::string::npos);
}

TEST_CASE("result cache") {
    const auto dir = scratch("cache");
    ModelParams p;
    p.e = 0.1;
    const auto model = FiberModel::build(p);
    const auto c = BoundConstants::from(p, model.norms);
    const Vec3 P(0.4, 0, 0);
    const Tolerances tol;
    const auto fresh = compute_spectrum_report(model, c, P, tol);

    const auto k = ResultCache::key(p, tol, P);
    CHECK(k == ResultCache::key(p, tol, P + Vec3(1e-14, 0, 0)));
    CHECK(k != ResultCache::key(p, tol, P + Vec3(1e-9, 0, 0)));
    auto p2 = p;
    p2.e = 0.05;
    CHECK(k != ResultCache::key(p2, tol, P));

    {
        ResultCache cache(dir / "cache.json");
        CHECK_FALSE(cache.find(k));
        cache.store(k, fresh);
        cache.save();
    }
    ResultCache loaded(dir / "cache.json");
    CHECK(loaded.size() == 1);
    const auto hit = loaded.find(k);
    REQUIRE(hit);
    CHECK(loaded.hits() == 1);
    CHECK(to_json(*hit) == to_json(fresh));
    CHECK(hit->E == fresh.E);
    CHECK(hit->E1 == fresh.E1);
    CHECK(hit->residuals == fresh.residuals);
}

TEST_CASE("parallel_for is deterministic") {
    std::vector<double> a(200), b(200);
    parallel_for(a.size(), 4, [&](std::size_t i) { a[i] = std::sin(static_cast<double>(i)); });
    parallel_for(b.size(), 1, [&](std::size_t i) { b[i] = std::sin(static_cast<double>(i)); });
    CHECK(a == b);
    std::atomic<int> calls{0};
    parallel_for(0, 4, [&](std::size_t) { ++calls; });
    CHECK(calls == 0);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) { if (i == 5) throw std::runtime_error("x"); }),
                    std::runtime_error);
}

TEST_CASE("spectrum run at e = 0 reproduces the free dispersion") {
    const auto dir = scratch("spectrum");
    RunConfig cfg = quick();
    cfg.params.e = 0.0;
    CHECK(run_spectrum(cfg, RunOptions{dir, nullptr, nullptr}) == 0);
    std::istringstream csv(slurp(dir / "spectrum.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "P_x,P_y,P_z,E,E1,mult,delta,sigma_minus,count_below");
    int rows = 0;
    while (std::getline(csv, line)) {
        std::vector<double> f;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(std::stod(cell));
        REQUIRE(f.size() == 9);
        CHECK(f[3] == doctest::Approx(cfg.params.gamma * std::hypot(f[0], cfg.params.M)).epsilon(1e-14));
        CHECK(f[5] == 2);
        ++rows;
    }
    CHECK(rows == 3);
    CHECK(fs::exists(dir / "modes.csv"));
    CHECK(slurp(dir / "modes.csv").rfind("k_x,k_y,k_z,lambda,eps_x,eps_y,eps_z,weight\n", 0) == 0);
    CHECK(fs::exists(dir / "spectrum" / "P_002.json"));
}

TEST_CASE("sweep: cache reuse and ladder extension") {
    const auto dir = scratch("sweep");
    RunConfig cfg = quick();
    cfg.P_max = 2.0;
    cfg.ladder_points = 5;
    ResultCache cache(dir / "cache.json");
    CHECK(run_sweep(cfg, RunOptions{dir / "a", &cache, nullptr}) == 0);
    CHECK(cache.size() == 5);
    CHECK(run_sweep(cfg, RunOptions{dir / "b", &cache, nullptr}) == 0);
    CHECK(cache.hits() == 5);
    CHECK(slurp(dir / "a" / "sweep.csv") == slurp(dir / "b" / "sweep.csv"));

    cfg.P_max = 4.0;
    cfg.ladder_points = 9;
    CHECK(run_sweep(cfg, RunOptions{dir / "c", nullptr, nullptr}) == 0);
    std::istringstream small(slurp(dir / "a" / "sweep.csv"));
    std::istringstream big(slurp(dir / "c" / "sweep.csv"));
    std::string ls, lb;
    int shared = 0;
    while (std::getline(small, ls) && std::getline(big, lb)) {
        CHECK(ls == lb);
        ++shared;
    }
    CHECK(shared == 6);

    cfg.P_list = std::vector<Vec3>{};
    CHECK(run_sweep(cfg, RunOptions{dir / "d", nullptr, nullptr}) == 0);
    CHECK(slurp(dir / "d" / "sweep.csv") == "P_x,P_y,P_z,E,E1,mult,delta,sigma_minus,count_below\n");
}

TEST_CASE("verify exit codes") {
    const auto dir = scratch("verify");
    RunConfig cfg = quick();
    cfg.tasks = {"spectrum", "kramers", "bounds"};
    CHECK(run_verify(cfg, RunOptions{dir / "pass", nullptr, nullptr}) == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "pass" / "verify.json"));
    CHECK(report["passed"] == true);

    cfg.params.gamma = 1.0;
    CHECK(run_verify(cfg, RunOptions{dir / "gamma_one", nullptr, nullptr}) == 0);

    cfg.params.gamma = 0.5;
    cfg.tasks = {"kramers"};
    cfg.inject_symmetry_breaking = true;
    const auto broken = verify_suite(cfg);
    CHECK_FALSE(broken.passed());
    CHECK(broken.failures() > 0);
    CHECK(run_verify(cfg, RunOptions{dir / "broken", nullptr, nullptr}) == 1);
}

TEST_CASE("convergence outputs") {
    const auto dir = scratch("convergence");
    RunConfig cfg = quick();
    cfg.convergence.ladder = {{0, cfg.params.grid}, {1, cfg.params.grid}, {2, cfg.params.grid}};
    CHECK(run_convergence(cfg, RunOptions{dir, nullptr, nullptr}) == 0);
    const std::string csv = slurp(dir / "convergence.csv");
    CHECK(csv.rfind("P_x,P_y,P_z,N_max,n_shells,directions,n_modes,fock_dim,E,change\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}
