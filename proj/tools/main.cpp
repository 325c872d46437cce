// phtrack command-line tool: run closed-loop simulations, sweep controller
// gains, and execute the built-in verification suite.

#include "phtrack/cli.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"Saturated position-feedback trajectory tracking for port-Hamiltonian arms"};
    app.require_subcommand(1);

    std::string config, out_dir;
    auto* run = app.add_subcommand("run", "Simulate one configuration and write trace + metrics");
    run->add_option("--config", config, "Config file path or bundled preset (pera-sim, pera-exp, setpoint-trivial)")
        ->required();
    run->add_option("--out", out_dir, "Output directory (PHTRACK_OUT_DIR overrides)");

    std::string spec;
    std::uint64_t seed = 0;
    auto* sweep = app.add_subcommand("sweep", "Evaluate a gain grid/random sweep and write a leaderboard");
    sweep->add_option("--spec", spec, "Sweep specification file")->required();
    sweep->add_option("--seed", seed, "Seed for random candidates")->required();
    sweep->add_option("--out", out_dir, "Output directory (PHTRACK_OUT_DIR overrides)");

    bool fast = false;
    std::string fault;
    auto* verify = app.add_subcommand("verify", "Run the built-in property checks");
    verify->add_flag("--fast", fast, "Reduced sample counts and horizons");
    verify->add_option("--inject-fault", fault, "Self-test hook: gyro-sign or drop-jd")
        ->default_val("");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return phtrack::cmd_run(config, out_dir);
    if (sweep->parsed()) return phtrack::cmd_sweep(spec, seed, out_dir);
    return phtrack::cmd_verify(fast, fault);
}
