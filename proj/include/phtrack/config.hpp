#pragma once
// Run and sweep configuration: strict JSON parsing with dotted-path
// diagnostics, canonical serialization, bundled presets, and a stable
// config hash.

#include "phtrack/pera.hpp"
#include "phtrack/simulate.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>

namespace phtrack {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& msg)
        : std::runtime_error(path + ": " + msg) {}
};

namespace cfgdetail {

inline void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(path, "unknown key '" + it.key() + "'");
    }
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(path, std::string("missing required key '") + key + "'");
    return *it;
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

inline double number_or(const json& obj, const std::string& path, const char* key, double dflt) {
    auto it = obj.find(key);
    return it == obj.end() ? dflt : as_number(*it, path + "." + key);
}

inline Vec as_vec(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    Vec out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "[" + std::to_string(i) + "]");
    return out;
}

/// Array of numbers -> diagonal matrix; array of arrays -> full matrix.
inline Mat as_mat(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array");
    if (v[0].is_number()) {
        const Vec d = as_vec(v, path);
        return Mat(d.asDiagonal());
    }
    const size_t rows = v.size();
    Mat out;
    for (size_t i = 0; i < rows; ++i) {
        const Vec row = as_vec(v[i], path + "[" + std::to_string(i) + "]");
        if (i == 0) out.resize(static_cast<Eigen::Index>(rows), row.size());
        if (row.size() != out.cols()) throw ConfigError(path, "ragged matrix rows");
        out.row(static_cast<Eigen::Index>(i)) = row;
    }
    return out;
}

inline json vec_to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline json mat_to_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_to_json(m.row(i).transpose()));
    return a;
}

}  // namespace cfgdetail

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

struct TrajectorySpec {
    std::string kind = "circle";  // "circle" | "setpoint"
    double r = 0.2;
    double period = 10.0;
    Vec setpoint;
    std::optional<double> blend_t_ramp;
    Vec blend_from;
};

struct GainSpec {
    std::string type = "saturated";  // "saturated" | "unsaturated" | "none"
    Vec alpha, beta;
    Mat Kc, Rc, Ki;
};

struct OutputSpec {
    std::string trace = "trace.csv";
    std::string metrics = "metrics.txt";
};

struct RunConfig {
    std::string model_name = "pera";
    PeraParams pera;
    TrajectorySpec trajectory;
    GainSpec gains;
    SimConfig sim;
    ActuatorLimits limits;
    double t_settle = 0.0;
    OutputSpec output;

    MechModel build_model() const {
        if (model_name != "pera") throw ConfigError("model.name", "unknown model '" + model_name + "'");
        return pera_model(pera);
    }

    std::shared_ptr<const Trajectory> build_trajectory() const {
        std::shared_ptr<const Trajectory> inner;
        if (trajectory.kind == "circle") {
            const double L2 = pera.L2;
            inner = std::make_shared<CircleTrajectory>(trajectory.r, trajectory.period, L2);
        } else if (trajectory.kind == "setpoint") {
            inner = std::make_shared<ConstantSetpoint>(trajectory.setpoint);
        } else {
            throw ConfigError("trajectory.kind", "unknown kind '" + trajectory.kind + "'");
        }
        if (trajectory.blend_t_ramp) {
            inner = std::make_shared<ApproachBlend>(inner, *trajectory.blend_t_ramp, trajectory.blend_from);
        }
        return inner;
    }

    GainProfile build_profile() const {
        if (gains.type == "saturated") return SaturatedGains(gains.alpha, gains.beta, gains.Kc, gains.Rc);
        if (gains.type == "unsaturated") return UnsaturatedGains(gains.Ki, gains.Kc, gains.Rc);
        if (gains.type == "none") return std::monostate{};
        throw ConfigError("gains.type", "unknown type '" + gains.type + "'");
    }
};

inline RunConfig parse_run_config(const json& j) {
    namespace cd = cfgdetail;
    cd::check_keys(j, "config",
                   {"model", "trajectory", "gains", "sim", "limits", "t_settle", "monitors", "output"});
    RunConfig c;

    const json& jm = cd::require(j, "config", "model");
    cd::check_keys(jm, "model", {"name", "params"});
    c.model_name = cd::require(jm, "model", "name").get<std::string>();
    if (jm.contains("params")) {
        const json& jp = jm["params"];
        cd::check_keys(jp, "model.params", {"g", "L1", "L2", "m1", "m2", "I1", "I2", "I3"});
        c.pera.g = cd::number_or(jp, "model.params", "g", c.pera.g);
        c.pera.L1 = cd::number_or(jp, "model.params", "L1", c.pera.L1);
        c.pera.L2 = cd::number_or(jp, "model.params", "L2", c.pera.L2);
        c.pera.m1 = cd::number_or(jp, "model.params", "m1", c.pera.m1);
        c.pera.m2 = cd::number_or(jp, "model.params", "m2", c.pera.m2);
        c.pera.I1 = cd::number_or(jp, "model.params", "I1", c.pera.I1);
        c.pera.I2 = cd::number_or(jp, "model.params", "I2", c.pera.I2);
        c.pera.I3 = cd::number_or(jp, "model.params", "I3", c.pera.I3);
    }

    const json& jt = cd::require(j, "config", "trajectory");
    cd::check_keys(jt, "trajectory", {"kind", "r", "period", "q", "blend"});
    c.trajectory.kind = cd::require(jt, "trajectory", "kind").get<std::string>();
    if (c.trajectory.kind == "circle") {
        c.trajectory.r = cd::number_or(jt, "trajectory", "r", 0.2);
        c.trajectory.period = cd::number_or(jt, "trajectory", "period", 10.0);
    } else if (c.trajectory.kind == "setpoint") {
        c.trajectory.setpoint = cd::as_vec(cd::require(jt, "trajectory", "q"), "trajectory.q");
    } else {
        throw ConfigError("trajectory.kind", "unknown kind '" + c.trajectory.kind + "'");
    }
    if (jt.contains("blend")) {
        const json& jb = jt["blend"];
        cd::check_keys(jb, "trajectory.blend", {"t_ramp", "from"});
        c.trajectory.blend_t_ramp = cd::as_number(cd::require(jb, "trajectory.blend", "t_ramp"), "trajectory.blend.t_ramp");
        c.trajectory.blend_from = cd::as_vec(cd::require(jb, "trajectory.blend", "from"), "trajectory.blend.from");
    }

    const json& jg = cd::require(j, "config", "gains");
    cd::check_keys(jg, "gains", {"type", "alpha", "beta", "Kc", "Rc", "Ki"});
    c.gains.type = cd::require(jg, "gains", "type").get<std::string>();
    if (c.gains.type == "saturated") {
        c.gains.alpha = cd::as_vec(cd::require(jg, "gains", "alpha"), "gains.alpha");
        c.gains.beta = cd::as_vec(cd::require(jg, "gains", "beta"), "gains.beta");
        c.gains.Kc = cd::as_mat(cd::require(jg, "gains", "Kc"), "gains.Kc");
        c.gains.Rc = cd::as_mat(cd::require(jg, "gains", "Rc"), "gains.Rc");
    } else if (c.gains.type == "unsaturated") {
        c.gains.Ki = cd::as_mat(cd::require(jg, "gains", "Ki"), "gains.Ki");
        c.gains.Kc = cd::as_mat(cd::require(jg, "gains", "Kc"), "gains.Kc");
        c.gains.Rc = cd::as_mat(cd::require(jg, "gains", "Rc"), "gains.Rc");
    } else if (c.gains.type != "none") {
        throw ConfigError("gains.type", "unknown type '" + c.gains.type + "'");
    }

    const json& js = cd::require(j, "config", "sim");
    cd::check_keys(js, "sim",
                   {"dt", "t_end", "integrator", "record_stride", "q0", "p0", "xc0", "control_hold_dt"});
    c.sim.dt = cd::as_number(cd::require(js, "sim", "dt"), "sim.dt");
    c.sim.t_end = cd::as_number(cd::require(js, "sim", "t_end"), "sim.t_end");
    const std::string integ = js.contains("integrator") ? js["integrator"].get<std::string>() : "rk4";
    if (integ == "rk4") c.sim.integrator = Integrator::Rk4;
    else if (integ == "heun") c.sim.integrator = Integrator::Heun;
    else throw ConfigError("sim.integrator", "unknown integrator '" + integ + "'");
    c.sim.record_stride = static_cast<int>(cd::number_or(js, "sim", "record_stride", 1));
    if (js.contains("q0")) c.sim.q0 = cd::as_vec(js["q0"], "sim.q0");
    if (js.contains("p0")) c.sim.p0 = cd::as_vec(js["p0"], "sim.p0");
    if (js.contains("xc0")) c.sim.xc0 = cd::as_vec(js["xc0"], "sim.xc0");
    c.sim.control_hold_dt = cd::number_or(js, "sim", "control_hold_dt", 0.0);

    const json& jl = cd::require(j, "config", "limits");
    cd::check_keys(jl, "limits", {"u_min", "u_max"});
    c.limits.u_min = cd::as_vec(cd::require(jl, "limits", "u_min"), "limits.u_min");
    c.limits.u_max = cd::as_vec(cd::require(jl, "limits", "u_max"), "limits.u_max");

    c.t_settle = cd::as_number(cd::require(j, "config", "t_settle"), "t_settle");

    if (j.contains("monitors")) {
        const json& jmon = j["monitors"];
        cd::check_keys(jmon, "monitors", {"q_norm", "p_err_norm", "xc_norm", "dpsi_dt"});
        c.sim.caps.q_norm = cd::number_or(jmon, "monitors", "q_norm", c.sim.caps.q_norm);
        c.sim.caps.p_err_norm = cd::number_or(jmon, "monitors", "p_err_norm", c.sim.caps.p_err_norm);
        c.sim.caps.xc_norm = cd::number_or(jmon, "monitors", "xc_norm", c.sim.caps.xc_norm);
        c.sim.caps.dpsi_dt = cd::number_or(jmon, "monitors", "dpsi_dt", c.sim.caps.dpsi_dt);
    }

    if (j.contains("output")) {
        const json& jo = j["output"];
        cd::check_keys(jo, "output", {"trace", "metrics"});
        if (jo.contains("trace")) c.output.trace = jo["trace"].get<std::string>();
        if (jo.contains("metrics")) c.output.metrics = jo["metrics"].get<std::string>();
    }

    // Cross-field dimension checks against the model.
    const MechModel model = c.build_model();
    const auto expect_dim = [&](const Vec& v, const char* what) {
        if (v.size() != 0 && v.size() != model.n)
            throw ConfigError(what, "expected " + std::to_string(model.n) + " entries, got " + std::to_string(v.size()));
    };
    expect_dim(c.trajectory.setpoint, "trajectory.q");
    expect_dim(c.trajectory.blend_from, "trajectory.blend.from");
    expect_dim(c.gains.alpha, "gains.alpha");
    expect_dim(c.gains.beta, "gains.beta");
    expect_dim(c.sim.q0, "sim.q0");
    expect_dim(c.sim.p0, "sim.p0");
    expect_dim(c.sim.xc0, "sim.xc0");
    expect_dim(c.limits.u_min, "limits.u_min");
    expect_dim(c.limits.u_max, "limits.u_max");
    return c;
}

/// Canonical form: every default materialized, matrices as row arrays.
inline json to_json(const RunConfig& c) {
    namespace cd = cfgdetail;
    json j;
    j["model"]["name"] = c.model_name;
    j["model"]["params"] = {{"g", c.pera.g}, {"L1", c.pera.L1}, {"L2", c.pera.L2}, {"m1", c.pera.m1},
                            {"m2", c.pera.m2}, {"I1", c.pera.I1}, {"I2", c.pera.I2}, {"I3", c.pera.I3}};
    json jt;
    jt["kind"] = c.trajectory.kind;
    if (c.trajectory.kind == "circle") {
        jt["r"] = c.trajectory.r;
        jt["period"] = c.trajectory.period;
    } else {
        jt["q"] = cd::vec_to_json(c.trajectory.setpoint);
    }
    if (c.trajectory.blend_t_ramp) {
        jt["blend"]["t_ramp"] = *c.trajectory.blend_t_ramp;
        jt["blend"]["from"] = cd::vec_to_json(c.trajectory.blend_from);
    }
    j["trajectory"] = jt;

    json jg;
    jg["type"] = c.gains.type;
    if (c.gains.type == "saturated") {
        jg["alpha"] = cd::vec_to_json(c.gains.alpha);
        jg["beta"] = cd::vec_to_json(c.gains.beta);
        jg["Kc"] = cd::mat_to_json(c.gains.Kc);
        jg["Rc"] = cd::mat_to_json(c.gains.Rc);
    } else if (c.gains.type == "unsaturated") {
        jg["Ki"] = cd::mat_to_json(c.gains.Ki);
        jg["Kc"] = cd::mat_to_json(c.gains.Kc);
        jg["Rc"] = cd::mat_to_json(c.gains.Rc);
    }
    j["gains"] = jg;

    json js;
    js["dt"] = c.sim.dt;
    js["t_end"] = c.sim.t_end;
    js["integrator"] = integrator_name(c.sim.integrator);
    js["record_stride"] = c.sim.record_stride;
    js["q0"] = cd::vec_to_json(c.sim.q0.size() ? c.sim.q0 : Vec::Zero(3).eval());
    js["p0"] = cd::vec_to_json(c.sim.p0.size() ? c.sim.p0 : Vec::Zero(3).eval());
    js["xc0"] = cd::vec_to_json(c.sim.xc0.size() ? c.sim.xc0 : Vec::Zero(3).eval());
    js["control_hold_dt"] = c.sim.control_hold_dt;
    j["sim"] = js;

    j["limits"]["u_min"] = cd::vec_to_json(c.limits.u_min);
    j["limits"]["u_max"] = cd::vec_to_json(c.limits.u_max);
    j["t_settle"] = c.t_settle;
    j["monitors"] = {{"q_norm", c.sim.caps.q_norm}, {"p_err_norm", c.sim.caps.p_err_norm},
                     {"xc_norm", c.sim.caps.xc_norm}, {"dpsi_dt", c.sim.caps.dpsi_dt}};
    j["output"]["trace"] = c.output.trace;
    j["output"]["metrics"] = c.output.metrics;
    return j;
}

inline std::string canonical_dump(const RunConfig& c) { return to_json(c).dump(2); }

/// FNV-1a 64-bit over the canonical serialization.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t config_hash(const RunConfig& c) { return fnv1a(canonical_dump(c)); }

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// JSON text of a bundled preset; throws on unknown names.
inline std::string builtin_preset_text(const std::string& name) {
    if (name == "pera-sim") {
        return R"({
  "model": {"name": "pera"},
  "trajectory": {"kind": "circle", "r": 0.2, "period": 10.0,
                 "blend": {"t_ramp": 5.0, "from": [0.0, 0.0, 0.0]}},
  "gains": {"type": "saturated",
            "alpha": [11.0, 1.7, 6.0],
            "beta": [40.0, 30.0, 30.0],
            "Kc": [1.0, 2.0, 0.1],
            "Rc": [0.4, 0.11, 0.5]},
  "sim": {"dt": 0.001, "t_end": 40.0, "integrator": "rk4", "record_stride": 10,
          "q0": [0.0, 0.0, 0.0], "p0": [0.0, 0.0, 0.0], "xc0": [0.0, 0.0, 0.0]},
  "limits": {"u_min": [-18.77, -3.32, -7.72], "u_max": [18.77, 3.32, 7.72]},
  "t_settle": 30.0,
  "output": {"trace": "pera-sim-trace.csv", "metrics": "pera-sim-metrics.txt"}
})";
    }
    if (name == "pera-exp") {
        return R"({
  "model": {"name": "pera"},
  "trajectory": {"kind": "circle", "r": 0.2, "period": 10.0,
                 "blend": {"t_ramp": 5.0, "from": [0.0, 0.0, 0.0]}},
  "gains": {"type": "saturated",
            "alpha": [11.0, 2.0, 6.0],
            "beta": [400.0, 100.0, 120.0],
            "Kc": [30.0, 20.0, 200.0],
            "Rc": [0.0001, 0.00001, 0.45]},
  "sim": {"dt": 0.001, "t_end": 40.0, "integrator": "rk4", "record_stride": 10,
          "q0": [0.0, 0.0, 0.0], "p0": [0.0, 0.0, 0.0], "xc0": [0.0, 0.0, 0.0],
          "control_hold_dt": 0.01},
  "limits": {"u_min": [-18.77, -3.32, -7.72], "u_max": [18.77, 3.32, 7.72]},
  "t_settle": 30.0,
  "output": {"trace": "pera-exp-trace.csv", "metrics": "pera-exp-metrics.txt"}
})";
    }
    if (name == "setpoint-trivial") {
        return R"({
  "model": {"name": "pera"},
  "trajectory": {"kind": "setpoint", "q": [0.4, 0.3, 0.8]},
  "gains": {"type": "saturated",
            "alpha": [11.0, 1.7, 6.0],
            "beta": [40.0, 30.0, 30.0],
            "Kc": [1.0, 2.0, 0.1],
            "Rc": [0.4, 0.11, 0.5]},
  "sim": {"dt": 0.001, "t_end": 10.0, "integrator": "rk4", "record_stride": 10,
          "q0": [0.4, 0.3, 0.8], "p0": [0.0, 0.0, 0.0], "xc0": [0.0, 0.0, 0.0]},
  "limits": {"u_min": [-18.77, -3.32, -7.72], "u_max": [18.77, 3.32, 7.72]},
  "t_settle": 5.0,
  "output": {"trace": "setpoint-trivial-trace.csv", "metrics": "setpoint-trivial-metrics.txt"}
})";
    }
    throw ConfigError("preset", "unknown preset '" + name + "'");
}

inline bool is_builtin_preset(const std::string& name) {
    return name == "pera-sim" || name == "pera-exp" || name == "setpoint-trivial";
}

inline RunConfig load_run_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("JSON parse error: ") + e.what());
    }
    return parse_run_config(j);
}

/// Loads a run configuration from a bundled preset name or a file path.
inline RunConfig load_run_config(const std::string& path_or_preset) {
    if (is_builtin_preset(path_or_preset)) return load_run_config_text(builtin_preset_text(path_or_preset));
    std::ifstream in(path_or_preset);
    if (!in) throw ConfigError("config", "cannot open '" + path_or_preset + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_run_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// SweepSpec
// ---------------------------------------------------------------------------

/// Per-axis uniform sampling range for one gain vector.
struct GainRange {
    Vec min, max;
};

struct SweepSpec {
    RunConfig base;
    // Candidate diagonal-gain vectors; the Cartesian product forms the grid.
    std::vector<Vec> grid_alpha, grid_beta, grid_kc, grid_rc;
    std::optional<GainRange> rand_alpha, rand_beta, rand_kc, rand_rc;
    int random_count = 0;
    int budget = 64;
    std::string objective = "settled_error";
};

inline SweepSpec parse_sweep_spec(const json& j) {
    namespace cd = cfgdetail;
    cd::check_keys(j, "sweep", {"base", "base_preset", "grid", "random", "budget", "objective"});
    SweepSpec s;
    if (j.contains("base_preset")) {
        s.base = load_run_config(j["base_preset"].get<std::string>());
    } else if (j.contains("base")) {
        s.base = parse_run_config(j["base"]);
    } else {
        throw ConfigError("sweep", "one of 'base' or 'base_preset' is required");
    }
    if (s.base.gains.type != "saturated") {
        throw ConfigError("sweep.base", "sweeps operate on the saturated gain profile");
    }

    const auto parse_grid_list = [&](const json& arr, const std::string& path) {
        std::vector<Vec> out;
        if (!arr.is_array() || arr.empty()) throw ConfigError(path, "expected a non-empty array of gain vectors");
        for (size_t i = 0; i < arr.size(); ++i) out.push_back(cd::as_vec(arr[i], path + "[" + std::to_string(i) + "]"));
        return out;
    };
    if (j.contains("grid")) {
        const json& jg = j["grid"];
        cd::check_keys(jg, "sweep.grid", {"alpha", "beta", "Kc", "Rc"});
        if (jg.contains("alpha")) s.grid_alpha = parse_grid_list(jg["alpha"], "sweep.grid.alpha");
        if (jg.contains("beta")) s.grid_beta = parse_grid_list(jg["beta"], "sweep.grid.beta");
        if (jg.contains("Kc")) s.grid_kc = parse_grid_list(jg["Kc"], "sweep.grid.Kc");
        if (jg.contains("Rc")) s.grid_rc = parse_grid_list(jg["Rc"], "sweep.grid.Rc");
    }
    if (j.contains("random")) {
        const json& jr = j["random"];
        cd::check_keys(jr, "sweep.random", {"count", "alpha", "beta", "Kc", "Rc"});
        s.random_count = static_cast<int>(cd::as_number(cd::require(jr, "sweep.random", "count"), "sweep.random.count"));
        const auto parse_range = [&](const json& r, const std::string& path) {
            cd::check_keys(r, path, {"min", "max"});
            GainRange gr;
            gr.min = cd::as_vec(cd::require(r, path, "min"), path + ".min");
            gr.max = cd::as_vec(cd::require(r, path, "max"), path + ".max");
            return gr;
        };
        if (jr.contains("alpha")) s.rand_alpha = parse_range(jr["alpha"], "sweep.random.alpha");
        if (jr.contains("beta")) s.rand_beta = parse_range(jr["beta"], "sweep.random.beta");
        if (jr.contains("Kc")) s.rand_kc = parse_range(jr["Kc"], "sweep.random.Kc");
        if (jr.contains("Rc")) s.rand_rc = parse_range(jr["Rc"], "sweep.random.Rc");
    }
    s.budget = static_cast<int>(cd::number_or(j, "sweep", "budget", 64));
    if (s.budget < 1) throw ConfigError("sweep.budget", "budget must be >= 1");
    if (j.contains("objective")) s.objective = j["objective"].get<std::string>();
    if (s.objective != "settled_error") throw ConfigError("sweep.objective", "unsupported objective '" + s.objective + "'");
    const bool any_grid = !s.grid_alpha.empty() || !s.grid_beta.empty() || !s.grid_kc.empty() || !s.grid_rc.empty();
    if (!any_grid && s.random_count == 0) throw ConfigError("sweep", "no grid values and no random candidates");
    return s;
}

inline SweepSpec load_sweep_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("sweep", "cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("sweep", std::string("JSON parse error: ") + e.what());
    }
    return parse_sweep_spec(j);
}

}  // namespace phtrack
