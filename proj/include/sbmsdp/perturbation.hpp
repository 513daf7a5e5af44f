#pragma once

#include <optional>

#include "sbmsdp/sym_matrix.hpp"

// Upper bounds on eigenvalues of M + H given the spectrum of M and norms of
// the perturbation H. Indices follow the usual convention lambda_1 >= ... >=
// lambda_n, i.e. `t` and `top` are 1-based. Bounds that require a spectral
// gap return nullopt when the gap condition fails; inapplicability is an
// expected outcome that callers count, not an error.

namespace sbmsdp {

namespace detail {

inline double compressed_quadratic_norm(const Eigen::MatrixXd& basis,
                                        const Eigen::MatrixXd& h) {
    // max over unit x in Col(basis) of |x^T H x| = op norm of basis^T H basis
    const Eigen::MatrixXd c = basis.transpose() * h * basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (c + c.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues()(0)),
                    std::abs(es.eigenvalues()(c.rows() - 1)));
}

inline void check_pair(const SymMatrix& m, const SymMatrix& h) {
    if (m.size() != h.size())
        throw DimensionError("perturbation bound: dimension mismatch");
}

inline void check_indices(int n, int t, int top) {
    if (t < 1 || top < t || top > n - 1)
        throw DimensionError("perturbation bound: need 1 <= t <= top <= n-1");
}

}  // namespace detail

/// |lambda_t(M+H) - lambda_t(M)| <= ||H||_op, any t.
inline double weyl_bound(const SymMatrix& m, const SymMatrix& h, int t) {
    detail::check_pair(m, h);
    if (t < 1 || t > m.size()) throw DimensionError("weyl_bound: index out of range");
    return operator_norm(h);
}

/// Prior bound: with h = max |x^T H x| over unit x in the span of the top
/// `top` eigenvectors of M, requires lambda_t - lambda_{top+1} > 2||H|| - h
/// and then
///   lambda_t(M+H) <= lambda_t + h + ||H||^2 / (lambda_t - lambda_{top+1} + h - ||H||).
inline std::optional<double> eldridge_bound(const SymMatrix& m, const SymMatrix& h,
                                            int t, int top) {
    detail::check_pair(m, h);
    detail::check_indices(m.size(), t, top);
    const EigenSystem es = eig_sym(m);
    const double lam_t = es.values[t - 1];
    const double lam_next = es.values[top];
    const double h_op = operator_norm(h);
    const double h_quad =
        detail::compressed_quadratic_norm(es.vectors.leftCols(top), h.to_eigen());
    if (!(lam_t - lam_next > 2.0 * h_op - h_quad)) return std::nullopt;
    return lam_t + h_quad + h_op * h_op / (lam_t - lam_next + h_quad - h_op);
}

/// Improved bound: h is taken over Col(U_{t:top}) only, and ||H U_{t:top}||
/// replaces ||H|| in the numerator. Requires
///   lambda_t - lambda_{top+1} > ||H|| - h - 2||H U_{t:top}||.
inline std::optional<double> improved_bound(const SymMatrix& m, const SymMatrix& h,
                                            int t, int top) {
    detail::check_pair(m, h);
    detail::check_indices(m.size(), t, top);
    const EigenSystem es = eig_sym(m);
    const double lam_t = es.values[t - 1];
    const double lam_next = es.values[top];
    const double h_op = operator_norm(h);
    const Eigen::MatrixXd basis = es.vectors.middleCols(t - 1, top - t + 1);
    const Eigen::MatrixXd he = h.to_eigen();
    const double h_quad = detail::compressed_quadratic_norm(basis, he);
    const double hu_op = (he * basis).jacobiSvd().singularValues()(0);
    if (!(lam_t - lam_next > h_op - h_quad - 2.0 * hu_op)) return std::nullopt;
    return lam_t + h_quad +
           hu_op * hu_op / (lam_t - lam_next - h_op + h_quad + 2.0 * hu_op);
}

}  // namespace sbmsdp
