#pragma once

#include <Eigen/Dense>
#include <lapacke.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sbmsdp {

struct NonFiniteError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Dense symmetric real matrix, row-major storage. Construction symmetrizes
/// the payload as (M + M^T)/2, so instances are symmetric by invariant.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(int n) : n_(n), data_(static_cast<std::size_t>(n) * n, 0.0) {
        if (n < 1) throw DimensionError("SymMatrix: dimension must be positive");
    }

    static SymMatrix from_rowmajor(int n, std::vector<double> data) {
        if (static_cast<std::size_t>(n) * n != data.size())
            throw DimensionError("SymMatrix: payload size does not match dimension");
        SymMatrix m;
        m.n_ = n;
        m.data_ = std::move(data);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double v = 0.5 * (m.data_[idx(n, i, j)] + m.data_[idx(n, j, i)]);
                m.data_[idx(n, i, j)] = v;
                m.data_[idx(n, j, i)] = v;
            }
        return m;
    }

    static SymMatrix from_eigen(const Eigen::MatrixXd& m) {
        SymMatrix out(static_cast<int>(m.rows()));
        for (int i = 0; i < out.n_; ++i)
            for (int j = i; j < out.n_; ++j)
                out.set(i, j, 0.5 * (m(i, j) + m(j, i)));
        return out;
    }

    static SymMatrix identity(int n) {
        SymMatrix m(n);
        for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
        return m;
    }

    static SymMatrix ones(int n) {
        SymMatrix m(n);
        std::fill(m.data_.begin(), m.data_.end(), 1.0);
        return m;
    }

    int size() const { return n_; }

    double operator()(int i, int j) const { return data_[idx(n_, i, j)]; }

    // Writes both (i,j) and (j,i).
    void set(int i, int j, double v) {
        data_[idx(n_, i, j)] = v;
        data_[idx(n_, j, i)] = v;
    }

    void add(int i, int j, double v) { set(i, j, (*this)(i, j) + v); }

    const std::vector<double>& data() const { return data_; }

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    map() const {
        return {data_.data(), n_, n_};
    }

    Eigen::MatrixXd to_eigen() const { return map(); }

    SymMatrix submatrix(const std::vector<int>& indices) const {
        SymMatrix out(static_cast<int>(indices.size()));
        for (std::size_t a = 0; a < indices.size(); ++a)
            for (std::size_t b = a; b < indices.size(); ++b)
                out.set(static_cast<int>(a), static_cast<int>(b),
                        (*this)(indices[a], indices[b]));
        return out;
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    static std::size_t idx(int n, int i, int j) {
        return static_cast<std::size_t>(i) * n + j;
    }

    int n_ = 0;
    std::vector<double> data_;
};

inline double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
    if (a.size() != b.size()) throw DimensionError("max_abs_diff: size mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k)
        m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

/// Full spectral decomposition. Eigenvalues are sorted non-increasing and
/// eigenvectors (columns of `vectors`) follow a deterministic sign rule: the
/// largest-magnitude coordinate is positive, ties broken by lowest index.
struct EigenSystem {
    Eigen::VectorXd values;   // non-increasing
    Eigen::MatrixXd vectors;  // column k pairs with values[k]
};

namespace detail {

inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    int arg = 0;
    double best = std::abs(v[0]);
    for (int i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > best) {
            best = std::abs(v[i]);
            arg = i;
        }
    }
    if (v[arg] < 0.0) v = -v;
}

// dsyevd returns ascending order; callers of this helper get raw LAPACK output.
inline void dsyevd_ascending(int n, std::vector<double>& a, std::vector<double>& w) {
    const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
    if (info != 0)
        throw std::runtime_error("eig_sym: LAPACKE_dsyevd failed with info=" +
                                 std::to_string(info));
}

}  // namespace detail

inline EigenSystem eig_sym(const SymMatrix& m) {
    if (!m.all_finite()) throw NonFiniteError("eig_sym: non-finite entries");
    const int n = m.size();
    std::vector<double> a = m.data();  // symmetric, so row-major == col-major
    std::vector<double> w(n);
    detail::dsyevd_ascending(n, a, w);

    EigenSystem es;
    es.values.resize(n);
    es.vectors.resize(n, n);
    for (int k = 0; k < n; ++k) {
        es.values[k] = w[n - 1 - k];
        for (int i = 0; i < n; ++i) es.vectors(i, k) = a[static_cast<std::size_t>(n - 1 - k) * n + i];
        detail::fix_sign(es.vectors.col(k));
    }
    return es;
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clipped to zero.
inline SymMatrix psd_project(const SymMatrix& m) {
    const EigenSystem es = eig_sym(m);
    const int n = m.size();
    int npos = 0;
    while (npos < n && es.values[npos] > 0.0) ++npos;
    if (npos == 0) return SymMatrix(n);
    const Eigen::MatrixXd u = es.vectors.leftCols(npos);
    Eigen::MatrixXd rec = u * es.values.head(npos).asDiagonal() * u.transpose();
    return SymMatrix::from_eigen(rec);
}

inline double operator_norm(const SymMatrix& m) {
    const EigenSystem es = eig_sym(m);
    return std::max(std::abs(es.values[0]), std::abs(es.values[m.size() - 1]));
}

}  // namespace sbmsdp
