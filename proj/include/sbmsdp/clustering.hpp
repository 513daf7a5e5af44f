#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "sbmsdp/sdp.hpp"

namespace sbmsdp {

enum class BlockClass { AllOne, Critical, Zero };

inline const char* block_class_name(BlockClass c) {
    switch (c) {
        case BlockClass::AllOne: return "all-one";
        case BlockClass::Critical: return "critical";
        default: return "zero";
    }
}

struct RecoveredCluster {
    std::vector<int> nodes;  // ascending
    BlockClass cls = BlockClass::Zero;
    std::optional<Eigen::VectorXd> factor;  // rank-one factor of the block, if any
};

struct ClusterReport {
    std::vector<RecoveredCluster> clusters;
    std::vector<int> unassigned;  // ascending

    int recovered_node_count() const {
        int c = 0;
        for (const auto& cl : clusters) c += static_cast<int>(cl.nodes.size());
        return c;
    }
};

/// Thresholds the solution at entry_threshold, takes connected components of
/// size >= 2 as clusters, and classifies each block: AllOne when every
/// within-block entry is >= 1 - 1e-2, Critical otherwise. Nodes outside any
/// component are unassigned.
inline ClusterReport extract_clusters(const SymMatrix& y, double entry_threshold = 0.25) {
    const int n = y.size();
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    const auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (y(i, j) >= entry_threshold) parent[find(i)] = find(j);

    std::vector<std::vector<int>> groups(n);
    for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);

    ClusterReport report;
    for (auto& g : groups) {
        if (g.size() < 2) {
            if (g.size() == 1) report.unassigned.push_back(g.front());
            continue;
        }
        RecoveredCluster cl;
        cl.nodes = std::move(g);
        bool all_one = true;
        for (std::size_t a = 0; a < cl.nodes.size() && all_one; ++a)
            for (std::size_t b = a; b < cl.nodes.size(); ++b)
                if (y(cl.nodes[a], cl.nodes[b]) < 1.0 - 1e-2) {
                    all_one = false;
                    break;
                }
        cl.cls = all_one ? BlockClass::AllOne : BlockClass::Critical;
        if (!all_one) cl.factor = rank_one_factor_of(y.submatrix(cl.nodes), 1e-2);
        report.clusters.push_back(std::move(cl));
    }
    std::sort(report.clusters.begin(), report.clusters.end(),
              [](const RecoveredCluster& a, const RecoveredCluster& b) {
                  return a.nodes.front() < b.nodes.front();
              });
    std::sort(report.unassigned.begin(), report.unassigned.end());
    return report;
}

namespace detail {

inline SymMatrix shifted_full(const SymMatrix& a, double p, double q,
                              const SolverConfig& cfg) {
    const double center = cfg.center_shift >= 0.0 ? cfg.center_shift : 0.5 * (p + q);
    const int n = a.size();
    SymMatrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) out.set(i, j, a(i, j) - center);
    return out;
}

}  // namespace detail

/// Recovery with the gap-mode penalty: lambda = kappa sqrt(p n log n) +
/// ((p-q)/2) s_small_guess. Correct recovery of the clusters above the gap
/// is only promised when the gap condition holds.
inline ClusterReport recover_with_gap(const AdjacencySample& sample, double p, double q,
                                      int s_small_guess, const SolverConfig& cfg) {
    const int n = sample.a.size();
    SdpProblem prob{detail::shifted_full(sample.a, p, q, cfg),
                    make_lambda_gap(p, q, n, s_small_guess, cfg),
                    BoxConstraint::FullBox01};
    const SdpSolution sol = solve(prob, cfg);
    if (!sol.converged) throw NotConvergedError("recover_with_gap: solver did not converge");
    return extract_clusters(sol.y);
}

struct RecursionRound {
    std::vector<int> active;  // node ids entering the round
    double lambda = 0.0;
    std::vector<int> recovered_sizes;  // sizes of clusters removed this round
};

enum class RecursionStop { NoneRecovered, MaxRounds };

struct RecursionTrace {
    std::vector<RecursionRound> rounds;
    RecursionStop terminated_reason = RecursionStop::NoneRecovered;
};

/// Recursive clustering: repeatedly solve the recovery SDP on the active
/// principal submatrix with lambda = kappa sqrt(p n_round log n) + jitter,
/// then remove recovered all-one clusters of size >= c_prime sqrt(n_round
/// log n). Critical clusters are reported but never removed. Stops when a
/// round removes nothing or after max_rounds.
inline std::pair<ClusterReport, RecursionTrace> recursive_cluster(
    const AdjacencySample& sample, double p, double q, const SolverConfig& cfg,
    double c_prime, int max_rounds) {
    if (!(c_prime > 0.0)) throw ModelError("recursive_cluster: need c_prime > 0");
    const int n = sample.a.size();
    const double log_n = std::log(static_cast<double>(n));

    SolverConfig round_cfg = cfg;
    if (round_cfg.m_param == 0) round_cfg.m_param = n;

    std::vector<int> active(n);
    std::iota(active.begin(), active.end(), 0);

    ClusterReport cumulative;
    RecursionTrace trace;
    ClusterReport last_round_report;  // in global ids, minus removed clusters

    for (int round = 0; round < max_rounds; ++round) {
        RecursionRound rec;
        rec.active = active;
        const int n_round = static_cast<int>(active.size());
        if (n_round == 0) {
            trace.terminated_reason = RecursionStop::NoneRecovered;
            break;
        }
        rec.lambda = make_lambda(p, n_round, round_cfg);
        const SymMatrix abar =
            detail::shifted_full(sample.a.submatrix(active), p, q, round_cfg);
        const SdpSolution sol =
            solve(SdpProblem{abar, rec.lambda, BoxConstraint::FullBox01}, round_cfg);
        if (!sol.converged)
            throw NotConvergedError("recursive_cluster: round " + std::to_string(round) +
                                    " did not converge");
        const ClusterReport local = extract_clusters(sol.y);

        const double removal_size = c_prime * std::sqrt(n_round * log_n);
        std::vector<char> removed_mask(n_round, 0);
        last_round_report = ClusterReport{};
        bool removed_any = false;
        for (const auto& cl : local.clusters) {
            RecoveredCluster global_cl;
            global_cl.cls = cl.cls;
            global_cl.factor = cl.factor;
            for (int local_id : cl.nodes) global_cl.nodes.push_back(active[local_id]);
            if (cl.cls == BlockClass::AllOne &&
                static_cast<double>(cl.nodes.size()) >= removal_size) {
                for (int local_id : cl.nodes) removed_mask[local_id] = 1;
                rec.recovered_sizes.push_back(static_cast<int>(cl.nodes.size()));
                cumulative.clusters.push_back(std::move(global_cl));
                removed_any = true;
            } else {
                last_round_report.clusters.push_back(std::move(global_cl));
            }
        }
        trace.rounds.push_back(std::move(rec));
        if (!removed_any) {
            trace.terminated_reason = RecursionStop::NoneRecovered;
            break;
        }
        std::vector<int> next;
        for (int i = 0; i < n_round; ++i)
            if (!removed_mask[i]) next.push_back(active[i]);
        active = std::move(next);
        trace.terminated_reason = RecursionStop::MaxRounds;  // until proven otherwise
    }

    // Cumulative view: removed all-one clusters plus whatever the final round
    // still reported; everything else is unassigned.
    for (auto& cl : last_round_report.clusters) cumulative.clusters.push_back(std::move(cl));
    std::vector<char> covered(n, 0);
    for (const auto& cl : cumulative.clusters)
        for (int node : cl.nodes) covered[node] = 1;
    for (int i = 0; i < n; ++i)
        if (!covered[i]) cumulative.unassigned.push_back(i);
    std::sort(cumulative.clusters.begin(), cumulative.clusters.end(),
              [](const RecoveredCluster& a, const RecoveredCluster& b) {
                  return a.nodes.front() < b.nodes.front();
              });
    return {std::move(cumulative), std::move(trace)};
}

}  // namespace sbmsdp
