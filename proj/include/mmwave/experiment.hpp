#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mmwave/metrics.hpp"
#include "mmwave/numfmt.hpp"
#include "mmwave/optimal.hpp"
#include "mmwave/scenario.hpp"
#include "mmwave/sigma_table.hpp"

namespace mmwave {

enum class Scheme { Optimal, BeamAlign, Snr1, SnrDynamic };

inline std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Optimal: return "optimal";
        case Scheme::BeamAlign: return "beam-align";
        case Scheme::Snr1: return "snr-1";
        case Scheme::SnrDynamic: return "snr-dynamic";
    }
    return "unknown";
}

inline std::optional<Scheme> parse_scheme(const std::string& name) {
    if (name == "optimal") return Scheme::Optimal;
    if (name == "beam-align" || name == "beam_align") return Scheme::BeamAlign;
    if (name == "snr-1" || name == "snr1") return Scheme::Snr1;
    if (name == "snr-dynamic" || name == "snr_dynamic") return Scheme::SnrDynamic;
    return std::nullopt;
}

struct ConnectGridConfig {
    int focal_bs = 0;
    double resolution_m = 1.0;
};

struct ExperimentConfig {
    std::vector<Scheme> schemes{Scheme::BeamAlign, Scheme::Snr1, Scheme::SnrDynamic};
    SolverConfig solver;
    /// (theta_b_deg, sigma_deg) overrides; unlisted beamwidths fall back to
    /// the calibrated defaults shipped with the library.
    std::vector<std::pair<double, double>> sigma_overrides;
    std::optional<ConnectGridConfig> connect_grid;
    int workers = 0;  // 0: MMWAVE_WORKERS env var, then hardware concurrency
};

inline double sigma_for_beamwidth(const ExperimentConfig& cfg, double theta_b_deg) {
    for (const auto& [theta, sigma] : cfg.sigma_overrides)
        if (std::abs(theta - theta_b_deg) < 1e-9) return sigma;
    if (const auto builtin = default_sigma_deg(theta_b_deg)) return *builtin;
    throw std::runtime_error("no misalignment threshold for theta_b=" + format_double(theta_b_deg) +
                             "; provide beam_align_sigma_deg in the config or run calibrate");
}

/// Raised when a scheme fails inside an experiment; carries what is needed to
/// reproduce the failing iteration.
struct SchemeFailure : std::runtime_error {
    SchemeFailure(const std::string& scheme, long iteration, std::uint64_t seed,
                  const std::string& what)
        : std::runtime_error("scheme " + scheme + " failed at iteration " +
                             std::to_string(iteration) + " (seed " + std::to_string(seed) +
                             "): " + what),
          scheme_name(scheme),
          iteration(iteration),
          seed(seed) {}
    std::string scheme_name;
    long iteration;
    std::uint64_t seed;
};

/// Iterations to run: either the configured count, or as many as needed for
/// the cumulative number of drawn users to reach the target.
inline std::vector<long> plan_iterations(const ScenarioConfig& cfg) {
    std::vector<long> plan;
    if (cfg.iterations > 0) {
        for (long k = 0; k < cfg.iterations; ++k) plan.push_back(k);
        return plan;
    }
    long total = 0;
    for (long k = 0; total < cfg.target_total_users; ++k) {
        if (k > 100000000L) throw std::runtime_error("iteration plan does not converge");
        plan.push_back(k);
        total += users_in_iteration(cfg, k);
    }
    return plan;
}

inline Association run_scheme(Scheme scheme, const Instance& inst, const ExperimentConfig& cfg) {
    switch (scheme) {
        case Scheme::Optimal: return solve_optimal(inst, cfg.solver);
        case Scheme::BeamAlign:
            return beam_align(inst, sigma_for_beamwidth(cfg, inst.radio().bs_beamwidth_deg));
        case Scheme::Snr1: return snr_one(inst);
        case Scheme::SnrDynamic: return snr_dynamic(inst);
    }
    throw std::logic_error("unknown scheme");
}

struct ExperimentTimings {
    double realize_s = 0.0;
    std::vector<std::pair<std::string, double>> per_scheme_s;
    double total_s = 0.0;
};

namespace detail {

struct IterationResult {
    long n_users = 0;
    std::vector<RunSummary> summaries;
    std::vector<MisalignmentHistogram> histograms;
    std::vector<ConnectProbabilityGrid> grids;
    std::vector<SchemeMetrics::IterationRow> rows;
    double realize_s = 0.0;
    std::vector<double> scheme_s;
};

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MMWAVE_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

inline IterationResult run_iteration(const ScenarioConfig& scenario, const ExperimentConfig& cfg,
                                     long iteration) {
    using clock = std::chrono::steady_clock;
    IterationResult res;
    const auto t0 = clock::now();
    const ScenarioRealization real = realize(scenario, iteration);
    res.realize_s = std::chrono::duration<double>(clock::now() - t0).count();
    res.n_users = real.instance.n_users();

    for (const Scheme scheme : cfg.schemes) {
        const auto ts = clock::now();
        Association assoc;
        try {
            assoc = run_scheme(scheme, real.instance, cfg);
        } catch (const std::exception& e) {
            throw SchemeFailure(scheme_name(scheme), iteration, scenario.seed, e.what());
        }
        if (scheme != Scheme::Optimal)
            assoc.objective = association_objective(real.instance, assoc, cfg.solver.penalty_m);
        res.scheme_s.push_back(std::chrono::duration<double>(clock::now() - ts).count());

        const RunSummary summary = summarize(real.instance, assoc, real.eval_budgets);
        MisalignmentHistogram hist;
        hist.add(real.instance, assoc);
        ConnectProbabilityGrid grid;
        if (cfg.connect_grid) {
            grid.focal_bs = cfg.connect_grid->focal_bs;
            grid.resolution_m = cfg.connect_grid->resolution_m;
            if (grid.focal_bs >= 0 && grid.focal_bs < real.instance.n_bs())
                grid.add_run(real.instance, assoc);
        }

        SchemeMetrics::IterationRow row;
        row.iteration = iteration;
        row.n_users = summary.n_users;
        row.mean_capacity_bps = summary.mean_capacity_bps();
        row.mean_satisfaction = summary.mean_satisfaction();
        row.disconnected_fraction = summary.disconnected_fraction();
        row.objective = assoc.objective;
        row.proven_optimal = scheme != Scheme::Optimal || assoc.proven_optimal;

        res.summaries.push_back(summary);
        res.histograms.push_back(std::move(hist));
        res.grids.push_back(std::move(grid));
        res.rows.push_back(row);
    }
    return res;
}

} // namespace detail

/// Run every scheme on identical realizations and pool the metrics. The
/// iterations are independent (each owns its random substreams) and may run
/// on several workers; results merge in iteration order, so the report is
/// identical regardless of scheduling.
inline MetricsReport run_experiment(const ScenarioConfig& scenario, const ExperimentConfig& cfg,
                                    ExperimentTimings* timings = nullptr) {
    if (cfg.schemes.empty()) throw std::invalid_argument("run_experiment: no schemes requested");
    {
        const auto errors = validate_config(scenario);
        if (!errors.empty()) {
            std::string msg = "invalid scenario config:";
            for (const auto& e : errors) msg += "\n  " + e;
            throw std::invalid_argument(msg);
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<long> plan = plan_iterations(scenario);
    std::vector<detail::IterationResult> results(plan.size());

    const int workers =
        std::min<int>(detail::resolve_workers(cfg.workers), static_cast<int>(plan.size()));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= plan.size()) return;
            try {
                results[idx] = detail::run_iteration(scenario, cfg, plan[idx]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(plan.size());
                return;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    MetricsReport report;
    report.iterations = static_cast<long>(plan.size());
    for (std::size_t s = 0; s < cfg.schemes.size(); ++s) {
        SchemeMetrics m;
        m.scheme = scheme_name(cfg.schemes[s]);
        if (cfg.connect_grid) {
            ConnectProbabilityGrid g;
            g.focal_bs = cfg.connect_grid->focal_bs;
            g.resolution_m = cfg.connect_grid->resolution_m;
            m.grids.push_back(g);
        }
        for (const auto& r : results) {
            m.pooled.merge(r.summaries[s]);
            m.misalignment.merge(r.histograms[s]);
            if (cfg.connect_grid) m.grids[0].merge(r.grids[s]);
            m.per_iteration.push_back(r.rows[s]);
        }
        report.schemes.push_back(std::move(m));
    }
    for (const auto& r : results) report.total_users += r.n_users;

    if (timings != nullptr) {
        timings->realize_s = 0.0;
        timings->per_scheme_s.assign(cfg.schemes.size(), {"", 0.0});
        for (std::size_t s = 0; s < cfg.schemes.size(); ++s)
            timings->per_scheme_s[s].first = scheme_name(cfg.schemes[s]);
        for (const auto& r : results) {
            timings->realize_s += r.realize_s;
            for (std::size_t s = 0; s < r.scheme_s.size(); ++s)
                timings->per_scheme_s[s].second += r.scheme_s[s];
        }
        timings->total_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return report;
}

} // namespace mmwave
