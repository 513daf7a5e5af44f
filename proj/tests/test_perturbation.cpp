#include <catch2/catch_amalgamated.hpp>

#include "sbmsdp/perturbation.hpp"
#include "sbmsdp/rng.hpp"

using namespace sbmsdp;

namespace {

SymMatrix random_sym(int n, rng::Stream& st, double scale = 1.0) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m.set(i, j, scale * st.next_normal());
    return m;
}

// Matrix with prescribed eigenvalues in a random orthonormal basis.
SymMatrix with_spectrum(const Eigen::VectorXd& lam, rng::Stream& st) {
    const int n = static_cast<int>(lam.size());
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = st.next_normal();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ();
    return SymMatrix::from_eigen(q * lam.asDiagonal() * q.transpose());
}

}  // namespace

TEST_CASE("weyl bound basics") {
    rng::Stream st(5);
    const SymMatrix m = random_sym(6, st);
    CHECK(weyl_bound(m, SymMatrix(6), 1) == 0.0);
    SymMatrix eps_eye(6);
    for (int i = 0; i < 6; ++i) eps_eye.set(i, i, 0.25);
    CHECK(weyl_bound(m, eps_eye, 3) == Catch::Approx(0.25));
    CHECK_THROWS_AS(weyl_bound(m, SymMatrix(5), 1), DimensionError);
}

TEST_CASE("weyl inequality holds both directions on random pairs") {
    rng::Stream st(23);
    for (int trial = 0; trial < 1000; ++trial) {
        const SymMatrix m = random_sym(10, st);
        const SymMatrix h = random_sym(10, st, 0.3);
        const Eigen::VectorXd before = eig_sym(m).values;
        const SymMatrix sum = SymMatrix::from_eigen(m.to_eigen() + h.to_eigen());
        const Eigen::VectorXd after = eig_sym(sum).values;
        const double bound = weyl_bound(m, h, 1);
        for (int t = 0; t < 10; ++t)
            CHECK(std::abs(after[t] - before[t]) <= bound + 1e-10);
    }
}

TEST_CASE("zero perturbation returns the eigenvalue itself") {
    rng::Stream st(2);
    const SymMatrix m = random_sym(7, st);
    const Eigen::VectorXd lam = eig_sym(m).values;
    const SymMatrix h(7);
    const auto e = eldridge_bound(m, h, 2, 3);
    REQUIRE(e.has_value());
    CHECK(*e == Catch::Approx(lam[1]).margin(1e-12));
    const auto i = improved_bound(m, h, 2, 3);
    REQUIRE(i.has_value());
    CHECK(*i == Catch::Approx(lam[1]).margin(1e-12));
}

TEST_CASE("gap condition failure reports inapplicable") {
    // M with a tiny gap, H with a large norm
    rng::Stream st(9);
    Eigen::VectorXd lam(5);
    lam << 1.0, 0.999, 0.998, 0.997, 0.996;
    const SymMatrix m = with_spectrum(lam, st);
    const SymMatrix h = random_sym(5, st, 5.0);
    CHECK_FALSE(eldridge_bound(m, h, 1, 1).has_value());
}

TEST_CASE("both bounds hold on gapped random instances") {
    rng::Stream st(31);
    int eldridge_checked = 0;
    int improved_checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 12;
        Eigen::VectorXd lam(n);
        // top eigenvalues well separated from the tail
        for (int i = 0; i < n; ++i) lam[i] = (i < 3 ? 10.0 - 2.0 * i : -2.0) + st.next_u01();
        std::sort(lam.data(), lam.data() + n, std::greater<>());
        const SymMatrix m = with_spectrum(lam, st);
        const SymMatrix h = random_sym(n, st, 0.15);
        const SymMatrix sum = SymMatrix::from_eigen(m.to_eigen() + h.to_eigen());
        const Eigen::VectorXd after = eig_sym(sum).values;
        const int t = 1 + static_cast<int>(st.next_u01() * 3.0);
        const int top = t + static_cast<int>(st.next_u01() * (3.0 - t + 1.0));
        const auto e = eldridge_bound(m, h, t, top);
        const auto i = improved_bound(m, h, t, top);
        if (e) {
            ++eldridge_checked;
            CHECK(after[t - 1] <= *e + 1e-10);
        }
        if (i) {
            ++improved_checked;
            CHECK(after[t - 1] <= *i + 1e-10);
        }
    }
    CHECK(eldridge_checked > 900);
    CHECK(improved_checked > 900);
}

TEST_CASE("improved bound dominates prior bound at t == top") {
    rng::Stream st(47);
    int compared = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 12;
        Eigen::VectorXd lam(n);
        for (int i = 0; i < n; ++i) lam[i] = (i < 2 ? 8.0 - 3.0 * i : -1.0) + st.next_u01();
        std::sort(lam.data(), lam.data() + n, std::greater<>());
        const SymMatrix m = with_spectrum(lam, st);
        const SymMatrix h = random_sym(n, st, 0.2);
        const int t = 1 + static_cast<int>(st.next_u01() * 2.0);
        const auto e = eldridge_bound(m, h, t, t);
        const auto i = improved_bound(m, h, t, t);
        if (e && i) {
            ++compared;
            CHECK(*i <= *e + 1e-12);
        }
    }
    CHECK(compared > 900);
}

TEST_CASE("index preconditions") {
    rng::Stream st(1);
    const SymMatrix m = random_sym(5, st);
    const SymMatrix h = random_sym(5, st, 0.1);
    CHECK_THROWS_AS(eldridge_bound(m, h, 0, 2), DimensionError);
    CHECK_THROWS_AS(eldridge_bound(m, h, 3, 2), DimensionError);
    CHECK_THROWS_AS(improved_bound(m, h, 1, 5), DimensionError);
}
