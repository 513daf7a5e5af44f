#pragma once

#include <Eigen/Dense>

#include "sbmsdp/sym_matrix.hpp"

// Test-only reference solver: projected gradient ascent on
//   max <Y, C> - lambda tr(Y)  s.t.  Y PSD, 0 <= Y_ij <= 1.
// The feasible-set projection is computed by Dykstra's algorithm between the
// PSD cone and the box, run to convergence from a cold start at every step.
// With an exact projection every fixed point of the iteration is an exact
// optimum regardless of step size, so accuracy is limited only by the
// projection tolerance. Slow but independent of the operator-splitting
// implementation under test.

namespace pg_ref {

inline void project_psd(Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    m = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

inline void project_box(Eigen::MatrixXd& m) { m = m.cwiseMax(0.0).cwiseMin(1.0); }

inline void project_intersection(Eigen::MatrixXd& y, int max_sweeps = 400,
                                 double tol = 1e-12) {
    Eigen::MatrixXd corr_psd = Eigen::MatrixXd::Zero(y.rows(), y.cols());
    Eigen::MatrixXd corr_box = corr_psd;
    for (int it = 0; it < max_sweeps; ++it) {
        const Eigen::MatrixXd prev = y;
        Eigen::MatrixXd w = y + corr_psd;
        project_psd(w);
        corr_psd = y + corr_psd - w;
        y = w + corr_box;
        project_box(y);
        corr_box = w + corr_box - y;
        if ((y - prev).cwiseAbs().maxCoeff() < tol && it > 2) break;
    }
}

}  // namespace pg_ref

inline double pg_reference_objective(const sbmsdp::SymMatrix& c, double lambda,
                                     long long steps, double step_size = 0.02) {
    Eigen::MatrixXd g = c.to_eigen();
    g.diagonal().array() -= lambda;
    const int n = static_cast<int>(g.rows());
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, n);
    for (long long k = 0; k < steps; ++k) {
        y += step_size * g;
        pg_ref::project_intersection(y);
    }
    return (g.array() * y.array()).sum();
}
