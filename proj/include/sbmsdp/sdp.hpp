#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbmsdp/model.hpp"
#include "sbmsdp/rng.hpp"
#include "sbmsdp/sym_matrix.hpp"

namespace sbmsdp {

enum class BoxConstraint {
    FullBox01,  // 0 <= Y_ij <= 1 for all entries
    DiagOnly,   // Y_ii <= 1 only
};

struct SdpProblem {
    SymMatrix c;            // objective matrix (shifted adjacency or a block of it)
    double lambda = 0.0;    // trace penalty, >= 0
    BoxConstraint box = BoxConstraint::FullBox01;
};

struct SolverConfig {
    double kappa = 3.0;        // multiplier in lambda = kappa sqrt(p n log m)
    int m_param = 0;           // failure-probability parameter; 0 means "use n"
    std::uint64_t jitter_seed = 0;
    int max_iter = 5000;
    double tol_primal = 1e-6;
    double tol_dual = 1e-6;
    double penalty_rho = 1.0;
    double over_relaxation = 1.6;
    double b8 = 1.0;           // penalty reduction multiplier for leave-one-out solves
    double center_shift = -1;  // shift used in place of (p+q)/2 when >= 0
    bool record_trace = false;
};

struct SdpSolution {
    SymMatrix y;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    SymMatrix dual_u;
    SymMatrix dual_l;
    std::vector<double> best_objective_trace;  // filled when config.record_trace
    std::optional<Eigen::VectorXd> rank_one_factor;
};

struct NotConvergedError : std::runtime_error {
    explicit NotConvergedError(const std::string& what) : std::runtime_error(what) {}
};

/// lambda = kappa sqrt(p n log m) + jitter, jitter ~ Uniform[0, 0.1] drawn
/// once from jitter_seed. m defaults to n when config.m_param is 0.
inline double make_lambda(double p, int n, const SolverConfig& cfg) {
    const int m = cfg.m_param == 0 ? n : cfg.m_param;
    if (m < n) throw ModelError("make_lambda: need m >= n");
    const double arg = p * n * std::log(static_cast<double>(m));
    if (!(arg > 0.0)) throw ModelError("make_lambda: need p*n*log(m) > 0");
    const double jitter = 0.1 * rng::keyed_u01(cfg.jitter_seed, 0x6a69747465ULL, 0);
    return cfg.kappa * std::sqrt(arg) + jitter;
}

/// Gap-mode penalty: kappa sqrt(p n log n) + ((p-q)/2) s_small. No jitter.
inline double make_lambda_gap(double p, double q, int n, int s_small,
                              const SolverConfig& cfg) {
    if (s_small < 0) throw ModelError("make_lambda_gap: need s_small >= 0");
    const double nn = static_cast<double>(n);
    return cfg.kappa * std::sqrt(p * nn * std::log(nn)) + 0.5 * (p - q) * s_small;
}

namespace detail {

inline void psd_project_inplace(Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    std::vector<double> a(m.data(), m.data() + static_cast<std::size_t>(n) * n);
    std::vector<double> w(n);
    dsyevd_ascending(n, a, w);
    int first_pos = n;
    for (int i = 0; i < n; ++i)
        if (w[i] > 0.0) {
            first_pos = i;
            break;
        }
    const int npos = n - first_pos;
    if (npos == 0) {
        m.setZero();
        return;
    }
    Eigen::Map<const Eigen::MatrixXd> evec(a.data(), n, n);
    const Eigen::MatrixXd u = evec.rightCols(npos);
    Eigen::VectorXd lam(npos);
    for (int i = 0; i < npos; ++i) lam[i] = w[first_pos + i];
    m.noalias() = u * lam.asDiagonal() * u.transpose();
}

inline void box_project_inplace(Eigen::MatrixXd& m, BoxConstraint box) {
    if (box == BoxConstraint::FullBox01) {
        m = m.cwiseMax(0.0).cwiseMin(1.0);
    } else {
        const int n = static_cast<int>(m.rows());
        for (int i = 0; i < n; ++i) m(i, i) = std::min(m(i, i), 1.0);
    }
}

}  // namespace detail

/// Maximizes <Y, C> - lambda tr(Y) over the PSD cone intersected with the box
/// by two-block operator splitting: a PSD projection step and a box
/// projection step on a consensus copy, with scaled dual updates and
/// over-relaxation. The returned iterate is the PSD-side one, so its minimum
/// eigenvalue is nonnegative and box violations are bounded by the primal
/// residual.
inline SdpSolution solve(const SdpProblem& problem, const SolverConfig& cfg,
                         const SymMatrix* warm_start = nullptr) {
    const int n = problem.c.size();
    if (!(problem.lambda >= 0.0) || !std::isfinite(problem.lambda))
        throw ModelError("solve: lambda must be finite and nonnegative");
    if (!problem.c.all_finite()) throw NonFiniteError("solve: non-finite objective");

    const double rho = cfg.penalty_rho;
    const double alpha = cfg.over_relaxation;
    Eigen::MatrixXd g = problem.c.to_eigen();
    g.diagonal().array() -= problem.lambda;
    const Eigen::MatrixXd g_over_rho = g / rho;

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd z = warm_start ? warm_start->to_eigen() : Eigen::MatrixXd::Zero(n, n);
    detail::box_project_inplace(z, problem.box);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd z_prev(n, n);

    SdpSolution out;
    double best_obj = -std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < cfg.max_iter; ++iter) {
        x = z - s + g_over_rho;
        detail::psd_project_inplace(x);
        z_prev = z;
        z = alpha * x + (1.0 - alpha) * z_prev + s;
        detail::box_project_inplace(z, problem.box);
        s += alpha * x + (1.0 - alpha) * z_prev - z;

        const double r_primal = (x - z).cwiseAbs().maxCoeff();
        const double r_dual = rho * (z - z_prev).cwiseAbs().maxCoeff();
        out.primal_residual = r_primal;
        out.dual_residual = r_dual;
        if (cfg.record_trace) {
            best_obj = std::max(best_obj, (g.array() * z.array()).sum());
            out.best_objective_trace.push_back(best_obj);
        }
        if (r_primal <= cfg.tol_primal && r_dual <= cfg.tol_dual) {
            out.converged = true;
            ++iter;
            break;
        }
    }
    out.iterations = iter;

    out.y = SymMatrix::from_eigen(x);
    out.objective = (g.array() * x.array()).sum();

    // Multiplier of the consensus constraint splits into the box duals.
    const Eigen::MatrixXd v = rho * s;
    if (problem.box == BoxConstraint::FullBox01) {
        out.dual_u = SymMatrix::from_eigen(v.cwiseMax(0.0));
        out.dual_l = SymMatrix::from_eigen((-v).cwiseMax(0.0));
    } else {
        SymMatrix u(n);
        for (int i = 0; i < n; ++i) u.set(i, i, std::max(v(i, i), 0.0));
        out.dual_u = std::move(u);
        out.dual_l = SymMatrix(n);
    }
    return out;
}

/// Numeric rank-one test: lambda_2 <= 1e-4 max(lambda_1, 1). When it holds
/// and the matrix is nonzero, returns the factor y with Y ~= y y^T and
/// 1^T y >= 0.
inline std::optional<Eigen::VectorXd> rank_one_factor_of(const SymMatrix& y,
                                                         double ratio_tol = 1e-4) {
    const EigenSystem es = eig_sym(y);
    const double lam1 = es.values[0];
    if (y.size() > 1 && es.values[1] > ratio_tol * std::max(lam1, 1.0))
        return std::nullopt;
    if (lam1 <= 0.0) return Eigen::VectorXd::Zero(y.size()).eval();
    Eigen::VectorXd f = std::sqrt(lam1) * es.vectors.col(0);
    if (f.sum() < 0.0) f = -f;
    return f;
}

namespace detail {

inline SymMatrix shifted_block(const AdjacencySample& sample, const SbmInstance& inst,
                               const std::vector<int>& nodes, const SolverConfig& cfg) {
    const double center =
        cfg.center_shift >= 0.0 ? cfg.center_shift : 0.5 * (inst.p() + inst.q());
    SymMatrix block = sample.a.submatrix(nodes);
    SymMatrix out(block.size());
    for (int i = 0; i < block.size(); ++i)
        for (int j = i; j < block.size(); ++j) out.set(i, j, block(i, j) - center);
    return out;
}

}  // namespace detail

/// Oracle SDP for cluster k (1-based): the recovery SDP restricted to the
/// cluster's principal submatrix, same lambda as the full problem. Needs
/// ground truth, so it is an analysis tool.
inline SdpSolution solve_oracle_block(const AdjacencySample& sample,
                                      const SbmInstance& inst, int k,
                                      const SolverConfig& cfg) {
    const auto nodes = inst.cluster_nodes(k);
    SdpProblem prob{detail::shifted_block(sample, inst, nodes, cfg),
                    make_lambda(inst.p(), inst.n(), cfg), BoxConstraint::FullBox01};
    SdpSolution sol = solve(prob, cfg);
    sol.rank_one_factor = rank_one_factor_of(sol.y);
    return sol;
}

/// Relaxed oracle SDP: lower bound constraints dropped, only Y_ii <= 1 kept.
inline SdpSolution solve_relaxed_oracle(const AdjacencySample& sample,
                                        const SbmInstance& inst, int k,
                                        const SolverConfig& cfg) {
    const auto nodes = inst.cluster_nodes(k);
    SdpProblem prob{detail::shifted_block(sample, inst, nodes, cfg),
                    make_lambda(inst.p(), inst.n(), cfg), BoxConstraint::DiagOnly};
    SdpSolution sol = solve(prob, cfg);
    sol.rank_one_factor = rank_one_factor_of(sol.y);
    return sol;
}

struct LooResult {
    SdpSolution solution;
    double lambda_loo = 0.0;        // reduced penalty lambda^k
    double noise_correlation = 0.0; // |<w^{k,j}, y>| of the rank-one factor
    double eig_drift = 0.0;         // |lambda_1(Abar^(k)) - lambda_1(Abar^(k,j))|
    double drift_bound = 0.0;       // b8 sqrt(p log m) / sqrt(s_k)
};

/// Leave-one-out relaxed oracle SDP for node j (global index) of cluster k:
/// noise in row/column j is zeroed and the penalty is reduced to
/// lambda - b8 sqrt(p log m)/sqrt(s_k).
inline LooResult solve_loo_relaxed(const AdjacencySample& sample, const SbmInstance& inst,
                                   int k, int j, const SolverConfig& cfg) {
    const auto nodes = inst.cluster_nodes(k);
    if (inst.cluster_of(j) != k - 1)
        throw ModelError("solve_loo_relaxed: node not in cluster");
    const int s_k = static_cast<int>(nodes.size());
    const int j_local = j - nodes.front();

    // w^{k,j} is column j of the block noise with the diagonal entry halved.
    auto [abar_full, w_full] = shift_and_noise(sample, inst);
    SymMatrix abar_k = abar_full.submatrix(nodes);
    Eigen::VectorXd w_col(s_k);
    for (int i = 0; i < s_k; ++i) w_col[i] = w_full(nodes[i], j);
    w_col[j_local] *= 0.5;

    SymMatrix abar_loo = abar_k;
    for (int i = 0; i < s_k; ++i) abar_loo.add(i, j_local, -w_col[i]);
    abar_loo.add(j_local, j_local, -w_col[j_local]);  // e w^T + w e^T doubles the corner

    const int m = cfg.m_param == 0 ? inst.n() : cfg.m_param;
    const double lambda = make_lambda(inst.p(), inst.n(), cfg);
    LooResult res;
    res.drift_bound = cfg.b8 * std::sqrt(inst.p() * std::log(static_cast<double>(m)) /
                                         static_cast<double>(s_k));
    res.lambda_loo = lambda - res.drift_bound;

    SdpProblem prob{abar_loo, res.lambda_loo, BoxConstraint::DiagOnly};
    res.solution = solve(prob, cfg);
    res.solution.rank_one_factor = rank_one_factor_of(res.solution.y);
    if (res.solution.rank_one_factor)
        res.noise_correlation = std::abs(w_col.dot(*res.solution.rank_one_factor));
    res.eig_drift = std::abs(eig_sym(abar_k).values[0] - eig_sym(abar_loo).values[0]);
    return res;
}

struct KktReport {
    double box_violation = 0.0;
    double min_eigenvalue = 0.0;       // of Y; pass needs >= -tol
    double comp_slack_lower = 0.0;     // max |L_ij Y_ij|
    double comp_slack_upper = 0.0;     // max |U_ij (Y_ij - 1)|
    double stationarity = 0.0;         // ||(C - lambda I - U + L) Y||_max
    double dual_feasibility = 0.0;     // lambda_max(C - lambda I - U + L); pass needs <= tol
    double dual_negativity = 0.0;      // most negative dual entry, as a magnitude
    double tol = 0.0;
    bool pass = false;
};

inline KktReport check_kkt(const SdpProblem& problem, const SdpSolution& sol,
                           double tol) {
    const int n = problem.c.size();
    KktReport rep;
    rep.tol = tol;

    const Eigen::MatrixXd y = sol.y.to_eigen();
    if (problem.box == BoxConstraint::FullBox01) {
        rep.box_violation = std::max(0.0, std::max((-y).maxCoeff(), (y.array() - 1.0).maxCoeff()));
    } else {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v = std::max(v, y(i, i) - 1.0);
        rep.box_violation = v;
    }

    const EigenSystem es_y = eig_sym(sol.y);
    rep.min_eigenvalue = es_y.values[n - 1];

    const Eigen::MatrixXd u = sol.dual_u.to_eigen();
    const Eigen::MatrixXd l = sol.dual_l.to_eigen();
    rep.dual_negativity = std::max(0.0, std::max((-u).maxCoeff(), (-l).maxCoeff()));
    rep.comp_slack_lower = (l.array() * y.array()).abs().maxCoeff();
    if (problem.box == BoxConstraint::FullBox01) {
        rep.comp_slack_upper = (u.array() * (y.array() - 1.0)).abs().maxCoeff();
    } else {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v = std::max(v, std::abs(u(i, i) * (y(i, i) - 1.0)));
        rep.comp_slack_upper = v;
    }

    Eigen::MatrixXd slack = problem.c.to_eigen() - u + l;
    slack.diagonal().array() -= problem.lambda;
    rep.stationarity = (slack * y).cwiseAbs().maxCoeff();
    rep.dual_feasibility = eig_sym(SymMatrix::from_eigen(slack)).values[0];

    rep.pass = rep.box_violation <= tol && rep.min_eigenvalue >= -tol &&
               rep.comp_slack_lower <= tol && rep.comp_slack_upper <= tol &&
               rep.stationarity <= tol && rep.dual_feasibility <= tol &&
               rep.dual_negativity <= tol;
    return rep;
}

}  // namespace sbmsdp
