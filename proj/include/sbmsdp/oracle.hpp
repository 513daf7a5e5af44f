#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sbmsdp/clustering.hpp"
#include "sbmsdp/rng.hpp"
#include "sbmsdp/sdp.hpp"

namespace sbmsdp {

struct SelfQueryError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyVotersError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NoClusterFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pairwise same-cluster oracle with bias delta: a first query of (i,j) is
/// Bernoulli(1/2 + delta/2) for same-cluster pairs and Bernoulli(1/2 -
/// delta/2) otherwise; repeated queries replay the first answer. The query
/// counter counts distinct unordered pairs. Mutation of the cache is
/// serialized, so algorithm drivers may ask from several threads.
class OracleSession {
public:
    OracleSession(std::vector<int> membership, double delta, std::uint64_t seed)
        : membership_(std::move(membership)), delta_(delta), seed_(seed) {
        if (!(delta > 0.0 && delta <= 1.0))
            throw ModelError("OracleSession: need delta in (0,1]");
        if (membership_.empty()) throw ModelError("OracleSession: empty ground truth");
    }

    static OracleSession from_sizes(const ClusterSpec& spec, double delta,
                                    std::uint64_t seed) {
        spec.validate();
        std::vector<int> membership;
        for (int k = 0; k < spec.count(); ++k)
            membership.insert(membership.end(), spec.sizes[k], k);
        return OracleSession(std::move(membership), delta, seed);
    }

    int n() const { return static_cast<int>(membership_.size()); }
    double delta() const { return delta_; }
    std::uint64_t seed() const { return seed_; }

    int query(int i, int j) {
        if (i == j) throw SelfQueryError("oracle query with i == j");
        if (i < 0 || j < 0 || i >= n() || j >= n())
            throw ModelError("oracle query out of range");
        const std::uint64_t key = pair_key(i, j);
        std::lock_guard<std::mutex> lock(mu_);
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const bool same = membership_[i] == membership_[j];
        const double prob = same ? 0.5 + 0.5 * delta_ : 0.5 - 0.5 * delta_;
        const int bit = rng::pair_u01(seed_, i, j) < prob ? 1 : 0;
        cache_.emplace(key, bit);
        ++count_;
        return bit;
    }

    long long query_count() const {
        std::lock_guard<std::mutex> lock(mu_);
        return count_;
    }

    // Ground truth access for the analysis harness.
    int true_cluster_of(int i) const { return membership_.at(i); }

private:
    static std::uint64_t pair_key(int i, int j) {
        const std::uint64_t a = static_cast<std::uint64_t>(i < j ? i : j);
        const std::uint64_t b = static_cast<std::uint64_t>(i < j ? j : i);
        return (a << 32) | b;
    }

    std::vector<int> membership_;
    double delta_;
    std::uint64_t seed_;
    mutable std::mutex mu_;
    std::map<std::uint64_t, int> cache_;
    long long count_ = 0;
};

inline int oracle_query(OracleSession& session, int i, int j) {
    return session.query(i, j);
}

/// Queries (candidate, v) for every voter and accepts on mean >= 1/2.
inline bool majority_vote_membership(OracleSession& session, int candidate,
                                     const std::vector<int>& voters) {
    if (voters.empty()) throw EmptyVotersError("majority vote with no voters");
    long long ones = 0;
    for (int v : voters) ones += session.query(candidate, v);
    return 2 * ones >= static_cast<long long>(voters.size());
}

struct FaultyConfig {
    double c1 = 10.0;  // voter count multiplier: |S'| = ceil(c1 log n / delta^2)
    double c2 = 2.0;   // subsampling rate multiplier
    double c3 = 4.0;   // adaptive recovery slack (reporting only)
    SolverConfig solver;
};

struct QueryBudgetReport {
    long long queries_subsampling = 0;
    long long queries_voting = 0;
    long long total = 0;
    int rounds = 0;
};

inline bool size_param_within_guarantee(int n, int s, double delta, double c2) {
    return s >= c2 * std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(n))) /
                    delta;
}

namespace detail {

inline int voter_count(int n, const FaultyConfig& cfg, double delta) {
    return static_cast<int>(
        std::ceil(cfg.c1 * std::log(static_cast<double>(n)) / (delta * delta)));
}

// Independent Bernoulli(gamma) inclusion per node, in node order, from the
// session seed; `salt` separates rounds.
inline std::vector<int> draw_subsample(const OracleSession& session, double gamma,
                                       std::uint64_t salt,
                                       const std::vector<int>& candidates) {
    std::vector<int> t;
    for (int node : candidates)
        if (rng::keyed_u01(session.seed() ^ 0x5355424dULL, salt, node) < gamma)
            t.push_back(node);
    return t;
}

// Queries all pairs of T and assembles the fully observed subgraph. Diagonal
// entries are synthetic same-cluster draws so that the matrix is distributed
// exactly as an SBM sample with p = (1+delta)/2, q = (1-delta)/2.
inline SymMatrix subgraph_matrix(OracleSession& session, const std::vector<int>& t) {
    const int m = static_cast<int>(t.size());
    SymMatrix a(m);
    for (int x = 0; x < m; ++x) {
        const double diag_prob = 0.5 + 0.5 * session.delta();
        if (rng::keyed_u01(session.seed() ^ 0x44494147ULL, 0, t[x]) < diag_prob)
            a.set(x, x, 1.0);
        for (int y = x + 1; y < m; ++y)
            if (session.query(t[x], t[y])) a.set(x, y, 1.0);
    }
    return a;
}

// Recovery SDP on the subgraph; lambda per the main solution-structure
// theorem with m = n (the full population size).
inline ClusterReport recover_subclusters(OracleSession& session, const SymMatrix& a,
                                         const FaultyConfig& cfg) {
    const double p = 0.5 + 0.5 * session.delta();
    const double q = 0.5 - 0.5 * session.delta();
    SolverConfig sc = cfg.solver;
    if (sc.m_param == 0) sc.m_param = session.n();
    const double lambda = make_lambda(p, a.size(), sc);
    const double center = sc.center_shift >= 0.0 ? sc.center_shift : 0.5 * (p + q);
    SymMatrix abar(a.size());
    for (int i = 0; i < a.size(); ++i)
        for (int j = i; j < a.size(); ++j) abar.set(i, j, a(i, j) - center);
    const SdpSolution sol = solve(SdpProblem{abar, lambda, BoxConstraint::FullBox01}, sc);
    if (!sol.converged)
        throw NotConvergedError("faulty oracle: recovery SDP did not converge");
    return extract_clusters(sol.y);
}

// Majority voting of every candidate against each cluster's voter panel.
// A candidate joins the best-scoring cluster among those with mean >= 1/2,
// which keeps the reported clusters disjoint.
inline void vote_in_candidates(OracleSession& session,
                               std::vector<std::vector<int>>& clusters,
                               const std::vector<std::vector<int>>& panels,
                               const std::vector<int>& candidates) {
    for (int cand : candidates) {
        int best = -1;
        double best_mean = -1.0;
        for (std::size_t c = 0; c < panels.size(); ++c) {
            if (panels[c].empty()) continue;
            long long ones = 0;
            for (int v : panels[c]) ones += session.query(cand, v);
            const double mean = static_cast<double>(ones) / panels[c].size();
            if (mean >= 0.5 && mean > best_mean) {
                best_mean = mean;
                best = static_cast<int>(c);
            }
        }
        if (best >= 0) clusters[best].push_back(cand);
    }
    for (auto& c : clusters) std::sort(c.begin(), c.end());
}

}  // namespace detail

/// Algorithm for a target cluster size s: subsample T with rate gamma =
/// c2 n log n / (s^2 delta^2), query all pairs of T, recover subclusters with
/// the recovery SDP, then vote the remaining nodes into every recovered
/// subcluster of size >= ceil(c1 log n / delta^2).
inline std::pair<ClusterReport, QueryBudgetReport> cluster_by_size_param(
    OracleSession& session, int s, const FaultyConfig& cfg) {
    const int n = session.n();
    if (s < 1) throw ModelError("cluster_by_size_param: need s >= 1");
    const double delta = session.delta();
    const double gamma = std::min(
        1.0, cfg.c2 * n * std::log(static_cast<double>(n)) / (static_cast<double>(s) * s * delta * delta));

    std::vector<int> everyone(n);
    std::iota(everyone.begin(), everyone.end(), 0);
    const std::vector<int> t = detail::draw_subsample(session, gamma, 1, everyone);

    ClusterReport report;
    QueryBudgetReport budget;
    budget.rounds = 1;
    if (t.size() < 2) {
        report.unassigned = everyone;
        return {std::move(report), std::move(budget)};
    }

    const long long before = session.query_count();
    const SymMatrix a = detail::subgraph_matrix(session, t);
    budget.queries_subsampling = session.query_count() - before;

    const ClusterReport sub = detail::recover_subclusters(session, a, cfg);

    const int votes_needed = detail::voter_count(n, cfg, delta);
    std::vector<std::vector<int>> clusters;
    std::vector<std::vector<int>> panels;
    for (const auto& cl : sub.clusters) {
        if (static_cast<int>(cl.nodes.size()) < votes_needed) continue;
        std::vector<int> global;
        for (int local : cl.nodes) global.push_back(t[local]);
        panels.emplace_back(global.begin(), global.begin() + votes_needed);
        clusters.push_back(std::move(global));
    }

    std::vector<char> in_t(n, 0);
    for (int node : t) in_t[node] = 1;
    std::vector<int> outside;
    for (int i = 0; i < n; ++i)
        if (!in_t[i]) outside.push_back(i);

    const long long before_vote = session.query_count();
    detail::vote_in_candidates(session, clusters, panels, outside);
    budget.queries_voting = session.query_count() - before_vote;
    budget.total = budget.queries_subsampling + budget.queries_voting;

    std::vector<char> assigned(n, 0);
    for (auto& c : clusters) {
        RecoveredCluster rc;
        rc.nodes = std::move(c);
        rc.cls = BlockClass::AllOne;
        for (int node : rc.nodes) assigned[node] = 1;
        report.clusters.push_back(std::move(rc));
    }
    for (int i = 0; i < n; ++i)
        if (!assigned[i]) report.unassigned.push_back(i);
    return {std::move(report), std::move(budget)};
}

/// Instance-adaptive variant: geometric size guesses s_r = n / 2^{r-1} with
/// gamma_r = c2 n log n / (s_r^2 delta^2); stops at the first round that
/// recovers a subcluster large enough to vote with, then votes out that one
/// cluster. The budget's `rounds` field reports the terminating round.
inline std::pair<ClusterReport, QueryBudgetReport> cluster_adaptive(
    OracleSession& session, const FaultyConfig& cfg) {
    const int n = session.n();
    const double delta = session.delta();
    const int votes_needed = detail::voter_count(n, cfg, delta);
    std::vector<int> everyone(n);
    std::iota(everyone.begin(), everyone.end(), 0);

    QueryBudgetReport budget;
    double s_guess = n;
    for (int round = 1; s_guess >= 1.0; ++round, s_guess *= 0.5) {
        budget.rounds = round;
        const double gamma =
            std::min(1.0, cfg.c2 * n * std::log(static_cast<double>(n)) /
                              (s_guess * s_guess * delta * delta));
        const std::vector<int> t =
            detail::draw_subsample(session, gamma, 100 + round, everyone);
        if (t.size() < 2) continue;

        const long long before = session.query_count();
        const SymMatrix a = detail::subgraph_matrix(session, t);
        budget.queries_subsampling += session.query_count() - before;

        const ClusterReport sub = detail::recover_subclusters(session, a, cfg);
        const RecoveredCluster* chosen = nullptr;
        for (const auto& cl : sub.clusters)
            if (static_cast<int>(cl.nodes.size()) >= votes_needed &&
                (!chosen || cl.nodes.size() > chosen->nodes.size()))
                chosen = &cl;
        if (!chosen) continue;

        std::vector<std::vector<int>> clusters(1);
        for (int local : chosen->nodes) clusters[0].push_back(t[local]);
        std::vector<std::vector<int>> panels{
            {clusters[0].begin(), clusters[0].begin() + votes_needed}};

        std::vector<char> in_t(n, 0);
        for (int node : t) in_t[node] = 1;
        std::vector<int> outside;
        for (int i = 0; i < n; ++i)
            if (!in_t[i]) outside.push_back(i);

        const long long before_vote = session.query_count();
        detail::vote_in_candidates(session, clusters, panels, outside);
        budget.queries_voting += session.query_count() - before_vote;
        budget.total = budget.queries_subsampling + budget.queries_voting;

        ClusterReport report;
        RecoveredCluster rc;
        rc.nodes = std::move(clusters[0]);
        rc.cls = BlockClass::AllOne;
        std::vector<char> assigned(n, 0);
        for (int node : rc.nodes) assigned[node] = 1;
        report.clusters.push_back(std::move(rc));
        for (int i = 0; i < n; ++i)
            if (!assigned[i]) report.unassigned.push_back(i);
        return {std::move(report), std::move(budget)};
    }
    throw NoClusterFoundError("cluster_adaptive: size guesses exhausted");
}

/// Known-K variant: rounds with gamma_r = c2 K_r^2 log n / (n_r delta^2).
/// Clusters voted out at size >= n_r/K_r are removed; smaller ones are
/// remembered without removal and removed in the first later round whose
/// n_r/K_r they clear (each cluster is voted at most once). Runs at most K
/// rounds.
inline std::pair<ClusterReport, QueryBudgetReport> cluster_small_k(
    OracleSession& session, int k_total, const FaultyConfig& cfg) {
    const int n = session.n();
    if (k_total < 1) throw ModelError("cluster_small_k: need K >= 1");
    const double delta = session.delta();
    const double log_n = std::log(static_cast<double>(n));
    const int votes_needed = detail::voter_count(n, cfg, delta);

    std::vector<int> active(n);
    std::iota(active.begin(), active.end(), 0);
    int k_remaining = k_total;

    ClusterReport report;
    QueryBudgetReport budget;
    std::vector<std::vector<int>> remembered;  // voted but not yet removed

    for (int round = 1; round <= k_total; ++round) {
        const int n_round = static_cast<int>(active.size());
        if (k_remaining < 1 ||
            n_round < cfg.c2 * k_remaining * k_remaining * log_n / (delta * delta))
            break;
        budget.rounds = round;
        const double gamma =
            std::min(1.0, cfg.c2 * k_remaining * k_remaining * log_n /
                              (n_round * delta * delta));
        const std::vector<int> t =
            detail::draw_subsample(session, gamma, 200 + round, active);
        if (t.size() < 2) continue;

        const long long before = session.query_count();
        const SymMatrix a = detail::subgraph_matrix(session, t);
        budget.queries_subsampling += session.query_count() - before;

        const ClusterReport sub = detail::recover_subclusters(session, a, cfg);

        // Full node sets discovered this round (each voted at most once).
        std::vector<std::vector<int>> found;
        std::vector<std::vector<int>> fresh_clusters;
        std::vector<std::vector<int>> fresh_panels;
        for (const auto& cl : sub.clusters) {
            std::vector<int> global;
            for (int local : cl.nodes) global.push_back(t[local]);
            // A re-recovered subcluster of a remembered set replays it.
            bool replayed = false;
            for (const auto& rem : remembered) {
                if (std::includes(rem.begin(), rem.end(), global.begin(), global.end())) {
                    found.push_back(rem);
                    replayed = true;
                    break;
                }
            }
            if (replayed) continue;
            if (static_cast<int>(global.size()) < votes_needed) continue;
            fresh_panels.emplace_back(global.begin(), global.begin() + votes_needed);
            fresh_clusters.push_back(std::move(global));
        }

        if (!fresh_clusters.empty()) {
            std::vector<char> in_t(n, 0);
            for (int node : t) in_t[node] = 1;
            std::vector<int> candidates;
            for (int node : active)
                if (!in_t[node]) candidates.push_back(node);
            const long long before_vote = session.query_count();
            detail::vote_in_candidates(session, fresh_clusters, fresh_panels, candidates);
            budget.queries_voting += session.query_count() - before_vote;
            for (auto& c : fresh_clusters) found.push_back(std::move(c));
        }

        // Remove the sets that clear n_r/K_r; remember the rest.
        const double removal_size = static_cast<double>(n_round) / k_remaining;
        std::set<int> to_remove;
        std::vector<std::vector<int>> still_remembered;
        for (auto& f : found) {
            if (static_cast<double>(f.size()) >= removal_size) {
                RecoveredCluster rc;
                rc.nodes = f;
                rc.cls = BlockClass::AllOne;
                report.clusters.push_back(std::move(rc));
                to_remove.insert(f.begin(), f.end());
                --k_remaining;
            } else {
                still_remembered.push_back(f);
            }
        }
        // Keep previously remembered sets that were not replayed this round.
        for (auto& rem : remembered) {
            bool seen = false;
            for (const auto& f : found)
                if (f == rem) seen = true;
            if (!seen) still_remembered.push_back(std::move(rem));
        }
        remembered = std::move(still_remembered);

        if (!to_remove.empty()) {
            std::vector<int> next;
            for (int node : active)
                if (!to_remove.count(node)) next.push_back(node);
            active = std::move(next);
        }
    }
    budget.total = budget.queries_subsampling + budget.queries_voting;

    // Remembered-but-never-removed clusters are still known; report them.
    for (auto& rem : remembered) {
        RecoveredCluster rc;
        rc.nodes = std::move(rem);
        rc.cls = BlockClass::AllOne;
        report.clusters.push_back(std::move(rc));
    }
    std::vector<char> assigned(n, 0);
    for (const auto& cl : report.clusters)
        for (int node : cl.nodes) assigned[node] = 1;
    for (int i = 0; i < n; ++i)
        if (!assigned[i]) report.unassigned.push_back(i);
    std::sort(report.clusters.begin(), report.clusters.end(),
              [](const RecoveredCluster& a, const RecoveredCluster& b) {
                  return a.nodes.front() < b.nodes.front();
              });
    return {std::move(report), std::move(budget)};
}

}  // namespace sbmsdp
