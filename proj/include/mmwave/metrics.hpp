#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mmwave/association.hpp"
#include "mmwave/scenario.hpp"

namespace mmwave {

struct UserOutcome {
    double capacity_bps = 0.0;
    double satisfaction = 0.0;
    int degree = 0;
};

/// Per-user outcomes of an association evaluated against the given budgets.
/// Active links whose evaluated SNR falls below the decodability floor are
/// failed links and contribute nothing.
inline std::vector<UserOutcome> evaluate_users(const Instance& inst, const Association& a,
                                               const std::vector<LinkBudget>& eval_budgets) {
    const double gamma_min = inst.radio().min_snr_linear();
    std::vector<UserOutcome> out(static_cast<std::size_t>(inst.n_users()));
    for (int i = 0; i < inst.n_users(); ++i) {
        std::vector<ServedLink> links;
        for (int j = 0; j < inst.n_bs(); ++j) {
            const double share = a.time_share[a.idx(i, j)];
            if (share <= 0.0) continue;
            const LinkBudget& b = eval_budgets[inst.link_index(i, j)];
            if (b.snr < gamma_min) continue;  // link failure under degradation
            links.push_back({share, b.snr});
        }
        out[i].capacity_bps = user_capacity_bps(inst.radio(), links);
        out[i].satisfaction = satisfaction(out[i].capacity_bps, inst.radio().min_rate_bps);
        out[i].degree = a.degree(i);
    }
    return out;
}

/// Aggregated statistics; merging is commutative so iteration results can be
/// combined in any grouping (the pooled means weight every user equally).
struct RunSummary {
    long n_users = 0;
    double capacity_sum = 0.0;
    double satisfaction_sum = 0.0;
    long disconnected = 0;
    long served = 0;
    double served_capacity_sum = 0.0;
    long degree_sum = 0;
    std::map<int, long> degree_counts;

    void merge(const RunSummary& other) {
        n_users += other.n_users;
        capacity_sum += other.capacity_sum;
        satisfaction_sum += other.satisfaction_sum;
        disconnected += other.disconnected;
        served += other.served;
        served_capacity_sum += other.served_capacity_sum;
        degree_sum += other.degree_sum;
        for (const auto& [deg, count] : other.degree_counts) degree_counts[deg] += count;
    }

    double mean_capacity_bps() const { return n_users ? capacity_sum / n_users : 0.0; }
    double mean_satisfaction() const { return n_users ? satisfaction_sum / n_users : 0.0; }
    double disconnected_fraction() const {
        return n_users ? static_cast<double>(disconnected) / n_users : 0.0;
    }
    double served_mean_capacity_bps() const { return served ? served_capacity_sum / served : 0.0; }
    double mean_degree() const { return n_users ? static_cast<double>(degree_sum) / n_users : 0.0; }
};

inline RunSummary summarize(const Instance& inst, const Association& a,
                            const std::vector<LinkBudget>& eval_budgets) {
    RunSummary s;
    const auto outcomes = evaluate_users(inst, a, eval_budgets);
    s.n_users = inst.n_users();
    for (const auto& o : outcomes) {
        s.capacity_sum += o.capacity_bps;
        s.satisfaction_sum += o.satisfaction;
        s.degree_sum += o.degree;
        ++s.degree_counts[o.degree];
        if (o.degree == 0) {
            ++s.disconnected;
        } else {
            ++s.served;
            s.served_capacity_sum += o.capacity_bps;
        }
    }
    return s;
}

/// Histogram of the signed BS-side misalignment over active links, with the
/// running moments used to cross-check the calibration threshold.
struct MisalignmentHistogram {
    double bin_width_deg = 0.5;
    std::map<long, long> bins;  // key: floor(alpha / bin_width)
    long n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(const Instance& inst, const Association& a) {
        for (int i = 0; i < inst.n_users(); ++i) {
            for (int j = 0; j < inst.n_bs(); ++j) {
                if (a.x[a.idx(i, j)] < 1) continue;
                const double alpha = inst.geometry(i, j).misalign_bs;
                ++bins[static_cast<long>(std::floor(alpha / bin_width_deg))];
                ++n;
                sum += alpha;
                sum_sq += alpha * alpha;
            }
        }
    }

    void merge(const MisalignmentHistogram& other) {
        for (const auto& [k, c] : other.bins) bins[k] += c;
        n += other.n;
        sum += other.sum;
        sum_sq += other.sum_sq;
    }

    double population_stddev() const {
        if (n == 0) return 0.0;
        const double mean = sum / n;
        const double var = sum_sq / n - mean * mean;
        return std::sqrt(var > 0.0 ? var : 0.0);
    }

    /// Normalized frequency per bin; keys are bin lower edges in degrees.
    std::vector<std::pair<double, double>> frequencies() const {
        std::vector<std::pair<double, double>> out;
        for (const auto& [k, c] : bins)
            out.push_back({k * bin_width_deg, n ? static_cast<double>(c) / n : 0.0});
        return out;
    }
};

/// Probability that a user standing at a rounded grid position connects to
/// the focal BS, accumulated over runs. Cells count runs, not users: a run
/// contributes one trial per occupied cell.
struct ConnectProbabilityGrid {
    int focal_bs = 0;
    double resolution_m = 1.0;

    struct Cell {
        long occupied = 0;
        long connected = 0;
    };
    std::map<std::pair<long, long>, Cell> cells;

    void add_run(const Instance& inst, const Association& a) {
        std::map<std::pair<long, long>, bool> seen;
        for (int i = 0; i < inst.n_users(); ++i) {
            const Vec2 pos = inst.users().positions[i];
            const std::pair<long, long> key{static_cast<long>(std::lround(pos.x / resolution_m)),
                                            static_cast<long>(std::lround(pos.y / resolution_m))};
            const bool connected = a.x[a.idx(i, focal_bs)] >= 1;
            auto [it, inserted] = seen.emplace(key, connected);
            if (!inserted) it->second = it->second || connected;
        }
        for (const auto& [key, connected] : seen) {
            Cell& c = cells[key];
            ++c.occupied;
            if (connected) ++c.connected;
        }
    }

    void merge(const ConnectProbabilityGrid& other) {
        for (const auto& [key, cell] : other.cells) {
            Cell& c = cells[key];
            c.occupied += cell.occupied;
            c.connected += cell.connected;
        }
    }
};

/// Everything recorded for one scheme across an experiment.
struct SchemeMetrics {
    std::string scheme;
    RunSummary pooled;
    MisalignmentHistogram misalignment;
    std::vector<ConnectProbabilityGrid> grids;  // at most one in practice

    struct IterationRow {
        long iteration = 0;
        long n_users = 0;
        double mean_capacity_bps = 0.0;
        double mean_satisfaction = 0.0;
        double disconnected_fraction = 0.0;
        double objective = 0.0;
        bool proven_optimal = true;
    };
    std::vector<IterationRow> per_iteration;
};

struct MetricsReport {
    std::vector<SchemeMetrics> schemes;
    long iterations = 0;
    long total_users = 0;
};

} // namespace mmwave
