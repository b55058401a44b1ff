#include "fibergap/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace fibergap {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

json rung_json(const ConvergenceRung& r) {
    return {{"N_max", r.N_max},
            {"n_shells", r.grid.n_shells},
            {"directions", to_string(r.grid.directions)},
            {"radial_floor", r.grid.radial_floor}};
}

// Reads keys of one JSON object, remembering which were consumed so that
// leftovers (typos) can be reported.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        read(j_.at(key), where(key), out);
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    const json& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }
    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            (void)value;
            if (!seen_.count(key)) fail(where(key), "unknown key");
        }
    }

    [[noreturn]] static void fail(const std::string& where, const std::string& what) {
        throw ConfigError(where + ": " + what);
    }

    static void read(const json& v, const std::string& w, double& out) {
        if (!v.is_number()) fail(w, "expected a number");
        out = v.get<double>();
    }
    static void read(const json& v, const std::string& w, int& out) {
        if (!v.is_number_integer()) fail(w, "expected an integer");
        out = v.get<int>();
    }
    static void read(const json& v, const std::string& w, std::uint64_t& out) {
        if (!v.is_number_unsigned()) fail(w, "expected a non-negative integer");
        out = v.get<std::uint64_t>();
    }
    static void read(const json& v, const std::string& w, bool& out) {
        if (!v.is_boolean()) fail(w, "expected true or false");
        out = v.get<bool>();
    }
    static void read(const json& v, const std::string& w, std::string& out) {
        if (!v.is_string()) fail(w, "expected a string");
        out = v.get<std::string>();
    }
    static void read(const json& v, const std::string& w, Vec3& out) {
        if (!v.is_array() || v.size() != 3) fail(w, "expected a 3-vector [x, y, z]");
        for (int i = 0; i < 3; ++i) read(v[static_cast<std::size_t>(i)], w + "[" + std::to_string(i) + "]", out(i));
    }
    template <class T>
    static void read(const json& v, const std::string& w, std::vector<T>& out) {
        if (!v.is_array()) fail(w, "expected an array");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            T item{};
            if constexpr (std::is_same_v<T, Vec3>) item = Vec3::Zero();
            read(v[i], w + "[" + std::to_string(i) + "]", item);
            out.push_back(item);
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

GridSpec read_grid(const json& j, const std::string& path, GridSpec grid) {
    ObjectReader r(j, path);
    r.get("n_shells", grid.n_shells);
    std::string dirs = to_string(grid.directions);
    r.get("directions", dirs);
    try {
        grid.directions = direction_set_from_string(dirs);
    } catch (const std::exception& e) {
        ObjectReader::fail(r.where("directions"), e.what());
    }
    r.get("radial_floor", grid.radial_floor);
    r.get("smooth_envelope", grid.smooth_envelope);
    r.finish();
    return grid;
}

ModelParams read_params(const json& j, const std::string& path) {
    ModelParams p;
    ObjectReader r(j, path);
    r.get("e", p.e);
    r.get("gamma", p.gamma);
    r.get("M", p.M);
    r.get("m_ph", p.m_ph);
    r.get("Lambda", p.Lambda);
    r.get("N_max", p.N_max);
    r.get("max_fock_dim", p.max_fock_dim);
    if (r.has("grid")) p.grid = read_grid(r.at("grid"), r.where("grid"), p.grid);
    r.finish();
    return p;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

std::vector<Vec3> RunConfig::momenta() const {
    if (P_list) return *P_list;
    std::vector<Vec3> out;
    if (ladder_points == 1) out.push_back(Vec3::Zero());
    for (int i = 0; ladder_points > 1 && i < ladder_points; ++i)
        out.push_back(P_max * static_cast<double>(i) / static_cast<double>(ladder_points - 1) * Vec3::UnitX());
    return out;
}

bool RunConfig::has_task(const std::string& name) const {
    return std::find(tasks.begin(), tasks.end(), name) != tasks.end();
}

RunConfig default_config() {
    RunConfig cfg;
    for (int n = 0; n <= 2; ++n) cfg.convergence.ladder.push_back({n, cfg.params.grid});
    return cfg;
}

json to_json(const ModelParams& p) {
    return {{"e", p.e},
            {"gamma", p.gamma},
            {"M", p.M},
            {"m_ph", p.m_ph},
            {"Lambda", p.Lambda},
            {"N_max", p.N_max},
            {"max_fock_dim", p.max_fock_dim},
            {"grid",
             {{"n_shells", p.grid.n_shells},
              {"directions", to_string(p.grid.directions)},
              {"radial_floor", p.grid.radial_floor},
              {"smooth_envelope", p.grid.smooth_envelope}}}};
}

json to_json(const RunConfig& cfg) {
    json j;
    j["model"] = to_json(cfg.params);
    if (cfg.P_list) {
        j["P_list"] = json::array();
        for (const auto& P : *cfg.P_list) j["P_list"].push_back(vec_json(P));
    } else {
        j["ladder"] = {{"P_max", cfg.P_max}, {"points", cfg.ladder_points}};
    }
    j["e_ladder"] = cfg.e_ladder;
    j["tasks"] = cfg.tasks;
    j["tolerances"] = {{"degeneracy", cfg.tol.degeneracy}, {"order", cfg.tol.order},
                       {"quad", cfg.tol.quad},             {"commutation", cfg.tol.commutation},
                       {"pairing", cfg.tol.pairing},       {"oracle", cfg.tol.oracle}};
    const auto& s = cfg.suite;
    j["property_suite"] = {{"field_samples", s.field_samples},     {"field_modes", s.field_modes},
                           {"field_N_max", s.field_N_max},         {"monotone_trials", s.monotone_trials},
                           {"monotone_dim", s.monotone_dim},       {"algebra_draws", s.algebra_draws},
                           {"sqrt_draws", s.sqrt_draws},           {"algebra_e_max", s.algebra_e_max},
                           {"trend_e", s.trend_e}};
    json conv_P = json::array();
    for (const auto& P : cfg.convergence.P) conv_P.push_back(vec_json(P));
    json ladder = json::array();
    for (const auto& r : cfg.convergence.ladder) ladder.push_back(rung_json(r));
    j["convergence"] = {{"P", conv_P}, {"ladder", ladder}};
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["cache_path"] = cfg.cache_path;
    j["out_dir"] = cfg.out_dir;
    j["inject_symmetry_breaking"] = cfg.inject_symmetry_breaking;
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig cfg = default_config();
    ObjectReader r(j, "");
    if (r.has("model")) {
        cfg.params = read_params(r.at("model"), "model");
        for (auto& rung : cfg.convergence.ladder) rung.grid = cfg.params.grid;
    }

    if (r.has("P_list") && r.has("ladder")) ObjectReader::fail("P_list", "give either P_list or ladder, not both");
    if (r.has("P_list")) {
        std::vector<Vec3> list;
        ObjectReader::read(r.at("P_list"), "P_list", list);
        cfg.P_list = std::move(list);
    }
    if (r.has("ladder")) {
        ObjectReader lr(r.at("ladder"), "ladder");
        lr.get("P_max", cfg.P_max);
        lr.get("points", cfg.ladder_points);
        lr.finish();
        if (cfg.ladder_points < 1) ObjectReader::fail("ladder.points", "must be >= 1");
        if (cfg.P_max < 0.0) ObjectReader::fail("ladder.P_max", "must be >= 0");
    }
    r.get("e_ladder", cfg.e_ladder);
    r.get("tasks", cfg.tasks);
    static const std::set<std::string> known_tasks{"spectrum", "bounds", "kramers", "convergence", "verify"};
    for (std::size_t i = 0; i < cfg.tasks.size(); ++i)
        if (!known_tasks.count(cfg.tasks[i]))
            ObjectReader::fail("tasks[" + std::to_string(i) + "]", "unknown task '" + cfg.tasks[i] + "'");

    if (r.has("tolerances")) {
        ObjectReader t(r.at("tolerances"), "tolerances");
        t.get("degeneracy", cfg.tol.degeneracy);
        t.get("order", cfg.tol.order);
        t.get("quad", cfg.tol.quad);
        t.get("commutation", cfg.tol.commutation);
        t.get("pairing", cfg.tol.pairing);
        t.get("oracle", cfg.tol.oracle);
        t.finish();
    }
    if (r.has("property_suite")) {
        auto& s = cfg.suite;
        ObjectReader t(r.at("property_suite"), "property_suite");
        t.get("field_samples", s.field_samples);
        t.get("field_modes", s.field_modes);
        t.get("field_N_max", s.field_N_max);
        t.get("monotone_trials", s.monotone_trials);
        t.get("monotone_dim", s.monotone_dim);
        t.get("algebra_draws", s.algebra_draws);
        t.get("sqrt_draws", s.sqrt_draws);
        t.get("algebra_e_max", s.algebra_e_max);
        t.get("trend_e", s.trend_e);
        t.finish();
        if (s.monotone_dim < 1 || s.monotone_dim > 32)
            ObjectReader::fail("property_suite.monotone_dim", "must be in [1, 32]");
        if (s.field_N_max < 2) ObjectReader::fail("property_suite.field_N_max", "must be >= 2");
    }
    if (r.has("convergence")) {
        ObjectReader c(r.at("convergence"), "convergence");
        c.get("P", cfg.convergence.P);
        if (c.has("ladder")) {
            const json& lad = c.at("ladder");
            if (!lad.is_array()) ObjectReader::fail("convergence.ladder", "expected an array");
            cfg.convergence.ladder.clear();
            for (std::size_t i = 0; i < lad.size(); ++i) {
                const std::string w = "convergence.ladder[" + std::to_string(i) + "]";
                ObjectReader rr(lad[i], w);
                ConvergenceRung rung{cfg.params.N_max, cfg.params.grid};
                rr.get("N_max", rung.N_max);
                json grid_part = json::object();
                for (const char* key : {"n_shells", "directions", "radial_floor", "smooth_envelope"}) {
                    if (rr.has(key)) grid_part[key] = rr.at(key);
                }
                rung.grid = read_grid(grid_part, w, rung.grid);
                rr.finish();
                cfg.convergence.ladder.push_back(rung);
            }
        }
        c.finish();
    }
    r.get("seed", cfg.seed);
    r.get("threads", cfg.threads);
    r.get("cache_path", cfg.cache_path);
    r.get("out_dir", cfg.out_dir);
    r.get("inject_symmetry_breaking", cfg.inject_symmetry_breaking);
    r.finish();

    try {
        cfg.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    if (cfg.threads < 0) ObjectReader::fail("threads", "must be >= 0");
    return cfg;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
    }
    return config_from_json(j);
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace fibergap
