#pragma once
// Gain sweep: evaluates candidate saturated-gain sets concurrently on a
// benchmark run, keeps the ones whose saturation budget fits the actuator
// limits, and ranks them by settled tracking error.

#include "phtrack/config.hpp"
#include "phtrack/trace_io.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <random>
#include <thread>

namespace phtrack {

struct SweepCandidate {
    Vec alpha, beta, kc_diag, rc_diag;
    std::uint64_t hash = 0;
};

struct SweepResult {
    SweepCandidate candidate;
    bool feasible = false;
    double objective = std::numeric_limits<double>::infinity();  ///< max-axis settled error
    Vec settled_error, peak_control, budget_bound;
    std::vector<int> flagged_axes;
    std::string error;  ///< non-empty when the evaluation itself failed
};

struct SweepOutcome {
    std::vector<SweepResult> ranked;  ///< feasible first, by objective then hash
    int feasible_count = 0;
    std::string diagnosis;  ///< binding constraint when nothing is feasible
};

namespace detail {

inline RunConfig with_gains(const RunConfig& base, const SweepCandidate& c) {
    RunConfig cfg = base;
    cfg.gains.type = "saturated";
    cfg.gains.alpha = c.alpha;
    cfg.gains.beta = c.beta;
    cfg.gains.Kc = Mat(c.kc_diag.asDiagonal());
    cfg.gains.Rc = Mat(c.rc_diag.asDiagonal());
    return cfg;
}

inline SweepResult evaluate_candidate(const RunConfig& base, const SweepCandidate& c) {
    SweepResult r;
    r.candidate = c;
    try {
        const RunConfig cfg = with_gains(base, c);
        const MechModel model = cfg.build_model();
        const auto traj = cfg.build_trajectory();
        const SaturatedGains gains(cfg.gains.alpha, cfg.gains.beta, cfg.gains.Kc, cfg.gains.Rc);

        const SaturationBudget budget =
            saturation_budget(model, gains, *traj, cfg.sim.t_end, cfg.limits);
        r.budget_bound = budget.bound;
        r.flagged_axes = budget.flagged;
        r.feasible = budget.certified();

        const SimTrace trace = simulate(model, GainProfile(gains), *traj, cfg.sim);
        const Metrics m = metrics(trace, cfg.t_settle, cfg.limits);
        r.settled_error = m.settled_error;
        r.peak_control = m.peak_control;
        r.objective = m.settled_error.maxCoeff();
    } catch (const std::exception& e) {
        r.feasible = false;
        r.error = e.what();
    }
    return r;
}

}  // namespace detail

/// Deterministic candidate list: grid Cartesian product first (lexicographic),
/// then seeded random draws, truncated to the sample budget.
inline std::vector<SweepCandidate> enumerate_candidates(const SweepSpec& spec, std::uint64_t seed) {
    const auto base_alpha = spec.base.gains.alpha;
    const auto base_beta = spec.base.gains.beta;
    const Vec base_kc = spec.base.gains.Kc.diagonal();
    const Vec base_rc = spec.base.gains.Rc.diagonal();

    const auto& ga = spec.grid_alpha.empty() ? std::vector<Vec>{base_alpha} : spec.grid_alpha;
    const auto& gb = spec.grid_beta.empty() ? std::vector<Vec>{base_beta} : spec.grid_beta;
    const auto& gk = spec.grid_kc.empty() ? std::vector<Vec>{base_kc} : spec.grid_kc;
    const auto& gr = spec.grid_rc.empty() ? std::vector<Vec>{base_rc} : spec.grid_rc;

    std::vector<SweepCandidate> out;
    const bool has_grid = !spec.grid_alpha.empty() || !spec.grid_beta.empty() ||
                          !spec.grid_kc.empty() || !spec.grid_rc.empty();
    if (has_grid) {
        for (const Vec& a : ga)
            for (const Vec& b : gb)
                for (const Vec& kc : gk)
                    for (const Vec& rc : gr) out.push_back({a, b, kc, rc, 0});
    }

    if (spec.random_count > 0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const auto draw = [&](const std::optional<GainRange>& range, const Vec& dflt) {
            if (!range) return dflt;
            Vec v(dflt.size());
            for (Eigen::Index i = 0; i < v.size(); ++i)
                v[i] = range->min[i] + (range->max[i] - range->min[i]) * unit(rng);
            return v;
        };
        for (int k = 0; k < spec.random_count; ++k) {
            SweepCandidate c;
            c.alpha = draw(spec.rand_alpha, base_alpha);
            c.beta = draw(spec.rand_beta, base_beta);
            c.kc_diag = draw(spec.rand_kc, base_kc);
            c.rc_diag = draw(spec.rand_rc, base_rc);
            out.push_back(std::move(c));
        }
    }

    if (static_cast<int>(out.size()) > spec.budget) out.resize(static_cast<size_t>(spec.budget));
    for (auto& c : out) {
        c.hash = fnv1a(canonical_dump(detail::with_gains(spec.base, c)));
    }
    return out;
}

inline SweepOutcome run_sweep(const SweepSpec& spec, std::uint64_t seed, unsigned parallelism = 0) {
    const std::vector<SweepCandidate> candidates = enumerate_candidates(spec, seed);
    std::vector<SweepResult> results(candidates.size());

    if (parallelism == 0) parallelism = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= candidates.size()) return;
            results[i] = detail::evaluate_candidate(spec.base, candidates[i]);
        }
    };
    std::vector<std::future<void>> pool;
    const unsigned jobs = std::min<unsigned>(parallelism, static_cast<unsigned>(candidates.size()));
    for (unsigned j = 0; j + 1 < jobs; ++j) pool.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& f : pool) f.get();

    SweepOutcome outcome;
    outcome.ranked = std::move(results);
    // Order is independent of evaluation scheduling: feasible first, then by
    // objective, with the config hash as the final tiebreaker.
    std::sort(outcome.ranked.begin(), outcome.ranked.end(), [](const SweepResult& a, const SweepResult& b) {
        if (a.feasible != b.feasible) return a.feasible;
        if (a.objective != b.objective) return a.objective < b.objective;
        return a.candidate.hash < b.candidate.hash;
    });
    for (const auto& r : outcome.ranked)
        if (r.feasible) ++outcome.feasible_count;

    if (outcome.feasible_count == 0) {
        std::vector<int> flag_count(static_cast<size_t>(spec.base.build_model().n), 0);
        int failures = 0;
        for (const auto& r : outcome.ranked) {
            if (!r.error.empty()) ++failures;
            for (int ax : r.flagged_axes) ++flag_count[static_cast<size_t>(ax)];
        }
        std::ostringstream os;
        os << "no feasible candidate out of " << outcome.ranked.size() << ";";
        for (size_t i = 0; i < flag_count.size(); ++i) {
            if (flag_count[i] > 0)
                os << " axis " << (i + 1) << " budget exceeded in " << flag_count[i] << " candidates;";
        }
        if (failures > 0) os << " " << failures << " candidates failed to evaluate;";
        outcome.diagnosis = os.str();
    }
    return outcome;
}

inline void write_leaderboard_csv(const SweepOutcome& outcome, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_leaderboard_csv: cannot open " + path);
    const int n = outcome.ranked.empty() ? 0 : static_cast<int>(outcome.ranked.front().candidate.alpha.size());
    out << "rank,config_hash,feasible,settled_error";
    const auto head = [&](const char* stem) {
        for (int i = 1; i <= n; ++i) out << "," << stem << i;
    };
    head("peak_u");
    head("budget_u");
    head("alpha");
    head("beta");
    head("kc");
    head("rc");
    out << ",error\n";
    int rank = 1;
    for (const auto& r : outcome.ranked) {
        char hash[24];
        std::snprintf(hash, sizeof(hash), "0x%016llx", static_cast<unsigned long long>(r.candidate.hash));
        out << rank++ << "," << hash << "," << (r.feasible ? 1 : 0) << ","
            << (std::isfinite(r.objective) ? format_full(r.objective) : "inf");
        const auto block = [&](const Vec& v) {
            for (int i = 0; i < n; ++i) out << "," << (v.size() == n ? format_full(v[i]) : "");
        };
        block(r.peak_control);
        block(r.budget_bound);
        block(r.candidate.alpha);
        block(r.candidate.beta);
        block(r.candidate.kc_diag);
        block(r.candidate.rc_diag);
        out << "," << r.error << "\n";
    }
}

}  // namespace phtrack
