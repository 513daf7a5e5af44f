#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbmsdp/rng.hpp"
#include "sbmsdp/sym_matrix.hpp"

namespace sbmsdp {

struct ModelError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IllegalEditError : std::invalid_argument {
    IllegalEditError(int i_, int j_, const std::string& rule)
        : std::invalid_argument("illegal adversary edit at (" + std::to_string(i_) +
                                "," + std::to_string(j_) + "): " + rule),
          i(i_),
          j(j_) {}
    int i;
    int j;
};

/// Cluster sizes s_1 >= s_2 >= ... >= s_K, all positive.
struct ClusterSpec {
    std::vector<int> sizes;

    int total() const { return std::accumulate(sizes.begin(), sizes.end(), 0); }
    int count() const { return static_cast<int>(sizes.size()); }

    void validate() const {
        if (sizes.empty()) throw ModelError("ClusterSpec: need at least one cluster");
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            if (sizes[k] < 1) throw ModelError("ClusterSpec: sizes must be positive");
            if (k > 0 && sizes[k] > sizes[k - 1])
                throw ModelError("ClusterSpec: sizes must be non-increasing");
        }
    }
};

/// SBM instance with canonical node ordering: cluster k occupies a contiguous
/// index range, so the ground truth Y* is block-diagonal.
class SbmInstance {
public:
    SbmInstance(ClusterSpec spec, double p, double q)
        : spec_(std::move(spec)), p_(p), q_(q) {
        spec_.validate();
        const int n = spec_.total();
        if (!(p > 0.0 && p <= 1.0)) throw ModelError("SbmInstance: need p in (0,1]");
        if (!(q >= 0.0 && q < 1.0)) throw ModelError("SbmInstance: need q in [0,1)");
        if (!(q < p)) throw ModelError("SbmInstance: need q < p");
        if (p < std::log(static_cast<double>(n)) / n)
            throw ModelError("SbmInstance: need p >= log(n)/n");
        membership_.resize(n);
        offsets_.resize(spec_.count() + 1, 0);
        int node = 0;
        for (int k = 0; k < spec_.count(); ++k) {
            offsets_[k] = node;
            for (int c = 0; c < spec_.sizes[k]; ++c) membership_[node++] = k;
        }
        offsets_[spec_.count()] = node;
    }

    const ClusterSpec& spec() const { return spec_; }
    double p() const { return p_; }
    double q() const { return q_; }
    int n() const { return static_cast<int>(membership_.size()); }
    int cluster_of(int node) const { return membership_.at(node); }
    bool same_cluster(int i, int j) const { return membership_[i] == membership_[j]; }

    // Nodes of cluster k (1-based to match the s_k convention).
    std::vector<int> cluster_nodes(int k) const {
        if (k < 1 || k > spec_.count()) throw ModelError("cluster index out of range");
        std::vector<int> out(spec_.sizes[k - 1]);
        std::iota(out.begin(), out.end(), offsets_[k - 1]);
        return out;
    }

    SymMatrix y_star() const {
        SymMatrix y(n());
        for (int i = 0; i < n(); ++i)
            for (int j = i; j < n(); ++j)
                if (same_cluster(i, j)) y.set(i, j, 1.0);
        return y;
    }

private:
    ClusterSpec spec_;
    double p_;
    double q_;
    std::vector<int> membership_;
    std::vector<int> offsets_;
};

struct AdjacencySample {
    SymMatrix a;
    std::uint64_t rng_seed = 0;
};

/// Bernoulli(p) within clusters (diagonal included), Bernoulli(q) across.
inline AdjacencySample generate_sbm(const SbmInstance& inst, std::uint64_t seed) {
    const int n = inst.n();
    SymMatrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double prob = inst.same_cluster(i, j) ? inst.p() : inst.q();
            if (rng::pair_u01(seed, i, j) < prob) a.set(i, j, 1.0);
        }
    return {std::move(a), seed};
}

/// Heterogeneous variant: inter-cluster pair (i,j) is Bernoulli(q_ij) with
/// q_ij <= q. Shares the per-pair uniform stream with generate_sbm, so equal
/// parameters give the identical matrix.
inline AdjacencySample generate_heterogeneous(const SbmInstance& inst,
                                              const SymMatrix& q_matrix,
                                              std::uint64_t seed) {
    const int n = inst.n();
    if (q_matrix.size() != n) throw DimensionError("generate_heterogeneous: q size");
    SymMatrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double prob;
            if (inst.same_cluster(i, j)) {
                prob = inst.p();
            } else {
                prob = q_matrix(i, j);
                if (prob < 0.0 || prob > inst.q())
                    throw ModelError("generate_heterogeneous: need 0 <= q_ij <= q");
            }
            if (rng::pair_u01(seed, i, j) < prob) a.set(i, j, 1.0);
        }
    return {std::move(a), seed};
}

/// Returns (Abar, W): the shifted matrix A - ((p+q)/2) J and the noise
/// A - E[A] with E[A] = (p-q) Y* + q J.
inline std::pair<SymMatrix, SymMatrix> shift_and_noise(const AdjacencySample& sample,
                                                       const SbmInstance& inst) {
    const int n = inst.n();
    if (sample.a.size() != n) throw DimensionError("shift_and_noise: size mismatch");
    SymMatrix abar(n);
    SymMatrix w(n);
    const double center = 0.5 * (inst.p() + inst.q());
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double aij = sample.a(i, j);
            abar.set(i, j, aij - center);
            const double mean = inst.same_cluster(i, j) ? inst.p() : inst.q();
            w.set(i, j, aij - mean);
        }
    return {std::move(abar), std::move(w)};
}

struct AdversaryEdit {
    int i;
    int j;
    int new_value;  // 0 or 1
};

/// Signal threshold below which a cluster may not receive edge additions;
/// defaults to (3/2) kappa sqrt(p n log n).
inline double default_threshold_signal(const SbmInstance& inst, double kappa) {
    const double n = inst.n();
    return 1.5 * kappa * std::sqrt(inst.p() * n * std::log(n));
}

/// Large-cluster semirandom adversary. Inter-cluster entries may only
/// decrease; intra-cluster entries may only increase, and only in clusters
/// whose signal ((p-q)/2) s_k reaches threshold_signal.
inline AdjacencySample apply_semirandom_adversary(const AdjacencySample& sample,
                                                  const SbmInstance& inst,
                                                  const std::vector<AdversaryEdit>& edits,
                                                  double threshold_signal) {
    const int n = inst.n();
    if (sample.a.size() != n) throw DimensionError("adversary: size mismatch");
    AdjacencySample out{sample.a, sample.rng_seed};
    const double half_gap = 0.5 * (inst.p() - inst.q());
    for (const auto& e : edits) {
        if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
            throw IllegalEditError(e.i, e.j, "node index out of range");
        if (e.new_value != 0 && e.new_value != 1)
            throw IllegalEditError(e.i, e.j, "entries must stay in {0,1}");
        const double old = out.a(e.i, e.j);
        if (inst.same_cluster(e.i, e.j)) {
            if (e.new_value < old)
                throw IllegalEditError(e.i, e.j, "intra-cluster entries may only increase");
            const int k = inst.cluster_of(e.i);
            if (e.new_value > old && half_gap * inst.spec().sizes[k] < threshold_signal)
                throw IllegalEditError(e.i, e.j, "cluster signal below addition threshold");
        } else {
            if (e.new_value > old)
                throw IllegalEditError(e.i, e.j, "inter-cluster entries may only decrease");
        }
        out.a.set(e.i, e.j, e.new_value);
    }
    return out;
}

/// Re-checks the two semirandom rules between an original sample and an
/// edited one. Returns true iff every changed entry is a legal edit.
inline bool audit_semirandom(const AdjacencySample& original,
                             const AdjacencySample& edited, const SbmInstance& inst,
                             double threshold_signal) {
    const int n = inst.n();
    if (original.a.size() != n || edited.a.size() != n) return false;
    const double half_gap = 0.5 * (inst.p() - inst.q());
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double before = original.a(i, j);
            const double after = edited.a(i, j);
            if (after != 0.0 && after != 1.0) return false;
            if (before == after) continue;
            if (inst.same_cluster(i, j)) {
                if (after < before) return false;
                if (half_gap * inst.spec().sizes[inst.cluster_of(i)] < threshold_signal)
                    return false;
            } else if (after > before) {
                return false;
            }
        }
    return true;
}

}  // namespace sbmsdp
