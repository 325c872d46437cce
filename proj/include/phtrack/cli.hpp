#pragma once
// Command entry points shared by the CLI binary and the tests.
// Exit codes: 0 success, 1 error (bad config, I/O, diverged run),
// 2 monitor violation or no feasible sweep candidate.

#include "phtrack/sweep.hpp"
#include "phtrack/verify.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace phtrack {

/// Output directory precedence: PHTRACK_OUT_DIR env var, then --out, then ".".
inline std::filesystem::path resolve_out_dir(const std::string& out_flag) {
    if (const char* env = std::getenv("PHTRACK_OUT_DIR"); env && *env) return env;
    if (!out_flag.empty()) return out_flag;
    return ".";
}

inline int cmd_run(const std::string& config_path_or_preset, const std::string& out_flag,
                   std::ostream& log = std::cout) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path_or_preset);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        const MechModel model = cfg.build_model();
        const auto traj = cfg.build_trajectory();
        const GainProfile profile = cfg.build_profile();

        SimTrace trace = simulate(model, profile, *traj, cfg.sim);
        trace.config_hash = config_hash(cfg);
        const Metrics m = metrics(trace, cfg.t_settle, cfg.limits);
        const BoundednessReport bounds = boundedness_check(model, trace, cfg.sim.caps);

        const auto dir = resolve_out_dir(out_flag);
        std::filesystem::create_directories(dir);
        write_trace_csv(trace, (dir / cfg.output.trace).string());
        write_metrics_report(trace, m, cfg.t_settle, (dir / cfg.output.metrics).string());

        log << "run: " << trace.rows.size() << " rows, profile " << trace.gain_profile_name << "\n";
        for (int i = 0; i < trace.n; ++i) {
            log << "  axis " << (i + 1) << ": settled error " << m.settled_error[i] << " rad, peak |u| "
                << m.peak_control[i] << " N m\n";
        }

        bool violated = false;
        if (m.lyap_violations > 0) {
            log << "monitor: " << m.lyap_violations << " storage-function violations\n";
            violated = true;
        }
        if (!bounds.within_caps) {
            log << "monitor: boundedness caps exceeded (sup |q| " << bounds.sup_q << ", sup |P~| "
                << bounds.sup_p_err << ", sup |x_c| " << bounds.sup_xc << ", sup |dPsi/dt| "
                << bounds.sup_dpsi_dt << ")\n";
            violated = true;
        }
        if (!m.within_limits) {
            log << "monitor: peak control exceeds actuator limits\n";
            violated = true;
        }
        return violated ? 2 : 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

inline int cmd_sweep(const std::string& spec_path, std::uint64_t seed, const std::string& out_flag,
                     std::ostream& log = std::cout) {
    SweepSpec spec;
    try {
        spec = load_sweep_spec(spec_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        const SweepOutcome outcome = run_sweep(spec, seed);
        const auto dir = resolve_out_dir(out_flag);
        std::filesystem::create_directories(dir);
        write_leaderboard_csv(outcome, (dir / "leaderboard.csv").string());

        log << "sweep: " << outcome.ranked.size() << " candidates, " << outcome.feasible_count
            << " feasible\n";
        const int shown = std::min<int>(5, static_cast<int>(outcome.ranked.size()));
        for (int i = 0; i < shown; ++i) {
            const auto& r = outcome.ranked[static_cast<size_t>(i)];
            log << "  #" << (i + 1) << (r.feasible ? "  feasible" : "  infeasible") << "  settled error "
                << r.objective << "  alpha " << format_vec(r.candidate.alpha) << "\n";
        }
        if (outcome.feasible_count == 0) {
            std::cerr << "no feasible candidate: " << outcome.diagnosis << "\n";
            return 2;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

inline int cmd_verify(bool fast, const std::string& fault_name = "", std::ostream& log = std::cout) {
    try {
        const FaultInjection fault = fault_from_name(fault_name);
        const auto checks = run_verification(fast, fault);
        size_t width = 0;
        for (const auto& c : checks) width = std::max(width, c.name.size());
        bool all_pass = true;
        for (const auto& c : checks) {
            char line[256];
            std::snprintf(line, sizeof(line), "%-*s  %s  worst %.3g (bound %.3g)  %s",
                          static_cast<int>(width), c.name.c_str(), c.pass ? "PASS" : "FAIL", c.worst,
                          c.bound, c.detail.c_str());
            log << line << "\n";
            all_pass = all_pass && c.pass;
        }
        log << (all_pass ? "all checks passed" : "CHECKS FAILED") << "\n";
        return all_pass ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace phtrack
