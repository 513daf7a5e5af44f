#include <catch2/catch_amalgamated.hpp>

#include "pg_reference.hpp"
#include "sbmsdp/sdp.hpp"

using namespace sbmsdp;

namespace {

SymMatrix random_sym(int n, rng::Stream& st, double scale = 1.0) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m.set(i, j, scale * st.next_normal());
    return m;
}

SolverConfig tight_config() {
    SolverConfig cfg;
    cfg.tol_primal = 1e-8;
    cfg.tol_dual = 1e-8;
    cfg.max_iter = 20000;
    return cfg;
}

}  // namespace

TEST_CASE("make_lambda with zero kappa is pure jitter") {
    SolverConfig cfg;
    cfg.kappa = 0.0;
    cfg.jitter_seed = 42;
    cfg.m_param = 100;
    const double v = make_lambda(0.5, 100, cfg);
    CHECK(v >= 0.0);
    CHECK(v <= 0.1);
    CHECK(make_lambda(0.5, 100, cfg) == v);  // deterministic per seed
}

TEST_CASE("make_lambda matches the direct formula") {
    SolverConfig jitter_only;
    jitter_only.kappa = 0.0;
    jitter_only.jitter_seed = 7;
    jitter_only.m_param = 100;
    const double jitter = make_lambda(1.0, 100, jitter_only);

    SolverConfig cfg;
    cfg.kappa = 2.0;
    cfg.jitter_seed = 7;
    cfg.m_param = 100;
    CHECK(make_lambda(1.0, 100, cfg) ==
          Catch::Approx(2.0 * std::sqrt(100.0 * std::log(100.0)) + jitter));
    CHECK_THROWS_AS(make_lambda(0.0, 100, cfg), ModelError);
    SolverConfig bad = cfg;
    bad.m_param = 50;
    CHECK_THROWS_AS(make_lambda(1.0, 100, bad), ModelError);
}

TEST_CASE("jitter is uniform on [0, 0.1]") {
    double sum = 0.0;
    SolverConfig cfg;
    cfg.kappa = 0.0;
    cfg.m_param = 10;
    for (int s = 0; s < 100000; ++s) {
        cfg.jitter_seed = s;
        sum += make_lambda(1.0, 10, cfg);
    }
    CHECK(std::abs(sum / 100000.0 - 0.05) < 0.001);
}

TEST_CASE("make_lambda_gap formula and monotonicity") {
    SolverConfig cfg;
    cfg.kappa = 1.0;
    CHECK(make_lambda_gap(0.6, 0.2, 400, 0, cfg) ==
          Catch::Approx(std::sqrt(0.6 * 400 * std::log(400.0))));
    CHECK(make_lambda_gap(0.6, 0.2, 400, 10, cfg) ==
          Catch::Approx(std::sqrt(240.0 * std::log(400.0)) + 2.0));
    double prev = -1.0;
    for (int s = 0; s <= 50; s += 5) {
        const double v = make_lambda_gap(0.6, 0.2, 400, s, cfg);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("clique objective beats zero when lambda is below n/2") {
    SymMatrix c = SymMatrix::from_eigen(0.5 * SymMatrix::ones(4).to_eigen());
    const SdpSolution sol =
        solve(SdpProblem{c, 1.0, BoxConstraint::FullBox01}, tight_config());
    REQUIRE(sol.converged);
    CHECK(max_abs_diff(sol.y, SymMatrix::ones(4)) < 1e-5);
    CHECK(sol.objective == Catch::Approx(4.0).margin(1e-4));
}

TEST_CASE("large lambda forces the zero solution") {
    SymMatrix c = SymMatrix::from_eigen(0.5 * SymMatrix::ones(4).to_eigen());
    const SdpSolution sol =
        solve(SdpProblem{c, 3.0, BoxConstraint::FullBox01}, tight_config());
    REQUIRE(sol.converged);
    CHECK(sol.y.max_abs() < 1e-7);
}

TEST_CASE("objective matches a long projected-gradient reference run") {
    rng::Stream st(12);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 6 + 2 * trial;
        const SymMatrix c = random_sym(n, st);
        const double lambda = 0.3 + st.next_u01();
        const SdpSolution sol =
            solve(SdpProblem{c, lambda, BoxConstraint::FullBox01}, tight_config());
        REQUIRE(sol.converged);
        const double ref = pg_reference_objective(c, lambda, 200000);
        CHECK(std::abs(sol.objective - ref) < 1e-5);
    }
}

TEST_CASE("recorded best objective is non-decreasing") {
    rng::Stream st(5);
    SolverConfig cfg = tight_config();
    cfg.record_trace = true;
    const SymMatrix c = random_sym(10, st);
    const SdpSolution sol = solve(SdpProblem{c, 0.5, BoxConstraint::FullBox01}, cfg);
    REQUIRE(!sol.best_objective_trace.empty());
    for (std::size_t i = 1; i < sol.best_objective_trace.size(); ++i)
        CHECK(sol.best_objective_trace[i] >= sol.best_objective_trace[i - 1] - 1e-9);
}

TEST_CASE("solution feasibility within tolerances") {
    rng::Stream st(8);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 5 + trial;
        const SymMatrix c = random_sym(n, st);
        const SdpSolution sol =
            solve(SdpProblem{c, 0.7, BoxConstraint::FullBox01}, tight_config());
        REQUIRE(sol.converged);
        CHECK(eig_sym(sol.y).values[n - 1] >= -1e-8);
        CHECK(sol.y.to_eigen().maxCoeff() <= 1.0 + 1e-7);
        CHECK(sol.y.to_eigen().minCoeff() >= -1e-7);
    }
}

TEST_CASE("restarts from random initializations agree") {
    rng::Stream st(21);
    const SymMatrix c = random_sym(9, st);
    const SdpProblem prob{c, 0.8, BoxConstraint::FullBox01};
    const SdpSolution base = solve(prob, tight_config());
    for (int r = 0; r < 3; ++r) {
        SymMatrix init(9);
        for (int i = 0; i < 9; ++i)
            for (int j = i; j < 9; ++j) init.set(i, j, st.next_u01());
        const SdpSolution sol = solve(prob, tight_config(), &init);
        REQUIRE(sol.converged);
        CHECK(max_abs_diff(sol.y, base.y) < 1e-4);
    }
}

TEST_CASE("kkt check passes on the clique and fails on a perturbed iterate") {
    SymMatrix c = SymMatrix::from_eigen(0.5 * SymMatrix::ones(4).to_eigen());
    const SdpProblem prob{c, 1.0, BoxConstraint::FullBox01};
    const SdpSolution sol = solve(prob, tight_config());
    const KktReport ok = check_kkt(prob, sol, 1e-5);
    CHECK(ok.pass);

    SdpSolution bad = sol;
    SymMatrix y = bad.y;
    y.set(0, 1, y(0, 1) + 0.1);
    bad.y = y;
    const KktReport rep = check_kkt(prob, bad, 1e-5);
    CHECK_FALSE(rep.pass);
    CHECK(rep.stationarity > 1e-5);
}

TEST_CASE("kkt self-consistency on random problems") {
    rng::Stream st(33);
    int pass = 0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        const int n = 6 + static_cast<int>(st.next_u01() * 34);
        const SymMatrix c = random_sym(n, st);
        const SdpProblem prob{c, 0.5 + st.next_u01(), BoxConstraint::FullBox01};
        const SdpSolution sol = solve(prob, tight_config());
        REQUIRE(sol.converged);
        pass += check_kkt(prob, sol, 1e-4).pass;
    }
    CHECK(pass == trials);
}

TEST_CASE("oracle blocks land in the three regimes") {
    // Signals 0.4 s_k against lambda ~ 46.4: 200 all-one, 116 critical, rest zero.
    const SbmInstance inst(ClusterSpec{{200, 116, 40, 30, 14}}, 0.9, 0.1);
    const AdjacencySample sample = generate_sbm(inst, 4242);
    SolverConfig cfg;
    cfg.kappa = 1.0;
    cfg.jitter_seed = 1;

    const SdpSolution big = solve_oracle_block(sample, inst, 1, cfg);
    REQUIRE(big.converged);
    CHECK(max_abs_diff(big.y, SymMatrix::ones(200)) < 1e-3);

    const SdpSolution small = solve_oracle_block(sample, inst, 4, cfg);
    REQUIRE(small.converged);
    CHECK(small.y.max_abs() < 1e-3);

    const SdpSolution critical = solve_oracle_block(sample, inst, 2, cfg);
    REQUIRE(critical.converged);
    const EigenSystem es = eig_sym(critical.y);
    CHECK(es.values[1] <= 1e-4 * std::max(es.values[0], 1.0));
    if (critical.y.max_abs() > 1e-3) {
        REQUIRE(critical.rank_one_factor.has_value());
        CHECK(critical.rank_one_factor->minCoeff() >= 0.5 - 1e-2);
    }
}

TEST_CASE("relaxed oracle agrees with the boxed oracle on nonzero blocks") {
    const SbmInstance inst(ClusterSpec{{200, 116, 40, 30, 14}}, 0.9, 0.1);
    const AdjacencySample sample = generate_sbm(inst, 4242);
    SolverConfig cfg;
    cfg.kappa = 1.0;
    cfg.jitter_seed = 1;
    for (int k : {1, 2}) {
        const SdpSolution boxed = solve_oracle_block(sample, inst, k, cfg);
        const SdpSolution relaxed = solve_relaxed_oracle(sample, inst, k, cfg);
        REQUIRE(boxed.converged);
        REQUIRE(relaxed.converged);
        if (boxed.y.max_abs() > 1e-3) CHECK(max_abs_diff(boxed.y, relaxed.y) < 1e-4);
        // rank-one law for the relaxed program
        const EigenSystem es = eig_sym(relaxed.y);
        CHECK(es.values[1] < 1e-6 * std::max(es.values[0] + es.values[1], 1e-12) + 1e-7);
    }
}

TEST_CASE("relaxed oracle with lambda above the top eigenvalue is zero") {
    const SbmInstance inst(ClusterSpec{{20, 10}}, 0.9, 0.1);
    const AdjacencySample sample = generate_sbm(inst, 5);
    SolverConfig cfg;
    cfg.kappa = 10.0;  // far above any block signal
    cfg.jitter_seed = 2;
    const SdpSolution sol = solve_relaxed_oracle(sample, inst, 1, cfg);
    REQUIRE(sol.converged);
    CHECK(sol.y.max_abs() < 1e-6);
}

TEST_CASE("noiseless leave-one-out equals the original problem minus the shift") {
    const SbmInstance inst(ClusterSpec{{12}}, 1.0, 0.0);
    const AdjacencySample sample = generate_sbm(inst, 3);  // p = 1: W = 0
    SolverConfig cfg;
    cfg.kappa = 0.2;
    cfg.jitter_seed = 3;
    const LooResult loo = solve_loo_relaxed(sample, inst, 1, 4, cfg);
    REQUIRE(loo.solution.converged);
    CHECK(loo.eig_drift == Catch::Approx(0.0).margin(1e-12));
    CHECK(loo.noise_correlation == Catch::Approx(0.0).margin(1e-12));
    CHECK(loo.lambda_loo == Catch::Approx(make_lambda(1.0, 12, cfg) - loo.drift_bound));
}

TEST_CASE("leave-one-out diagnostics on a critical cluster") {
    const SbmInstance inst(ClusterSpec{{116, 84}}, 0.9, 0.1);
    const AdjacencySample sample = generate_sbm(inst, 99);
    SolverConfig cfg;
    cfg.kappa = 1.0;
    cfg.jitter_seed = 9;
    cfg.m_param = 200;
    const LooResult loo = solve_loo_relaxed(sample, inst, 1, 10, cfg);
    REQUIRE(loo.solution.converged);
    CHECK(loo.drift_bound > 0.0);
    CHECK(loo.eig_drift >= 0.0);
    const EigenSystem es = eig_sym(loo.solution.y);
    CHECK(es.values[1] <= 1e-4 * std::max(es.values[0], 1.0));
}

TEST_CASE("loo rejects nodes outside the cluster") {
    const SbmInstance inst(ClusterSpec{{8, 6}}, 0.9, 0.1);
    const AdjacencySample sample = generate_sbm(inst, 1);
    SolverConfig cfg;
    CHECK_THROWS_AS(solve_loo_relaxed(sample, inst, 1, 10, cfg), ModelError);
}
