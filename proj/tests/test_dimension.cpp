#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "amht/dimension.hpp"
#include "amht/rng.hpp"
#include "oracles.hpp"

using namespace amht;

namespace {

std::vector<std::vector<double>> embed_rows(const MatrixXcd& m) {
    const int p = static_cast<int>(m.rows());
    std::vector<std::vector<double>> e(2 * p, std::vector<double>(2 * p));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            e[i][j] = m(i, j).real();
            e[i][j + p] = -m(i, j).imag();
            e[i + p][j] = m(i, j).imag();
            e[i + p][j + p] = m(i, j).real();
        }
    return e;
}

} // namespace

TEST_CASE("char_moment") {
    Rng rng(3);
    const int n = 6, p = 2;
    MatrixXd x(n, p);
    VectorXd r(n);
    for (int j = 0; j < n; ++j) {
        r[j] = rng.normal();
        for (int i = 0; i < p; ++i) x(j, i) = rng.normal();
    }
    const MatrixXd xc = x.rowwise() - x.colwise().mean();

    SUBCASE("t = 0 gives the (zero) column means of centered x") {
        const VectorXcd m = char_moment(xc, r, 0.0);
        CHECK(m.norm() < 1e-14);
    }
    SUBCASE("constant residuals factor out as a phase on the zero mean") {
        const VectorXcd m = char_moment(xc, VectorXd::Constant(n, 1.3), 0.7);
        CHECK(m.norm() < 1e-14);
    }
    SUBCASE("n=4 handcrafted matches scalar complex summation") {
        MatrixXd x4(4, 2);
        x4 << 0.5, -1.0, 1.5, 0.25, -0.75, 2.0, 0.1, -0.4;
        VectorXd r4(4);
        r4 << 0.9, -1.1, 0.3, 1.7;
        const double t = 0.65;
        const VectorXcd got = char_moment(x4, r4, t);
        for (int i = 0; i < 2; ++i) {
            std::complex<double> want(0.0, 0.0);
            for (int j = 0; j < 4; ++j)
                want += x4(j, i) *
                        std::complex<double>(std::cos(t * r4[j]), std::sin(t * r4[j]));
            want /= 4.0;
            CHECK(std::abs(got[i] - want) < 1e-14);
        }
    }
}

TEST_CASE("target_matrix") {
    Rng rng(5);

    SUBCASE("n=5 p=2 handcrafted equals the naive triple loop") {
        MatrixXd x(5, 2);
        x << 1.2, -0.3, 0.7, 0.9, -1.4, 0.2, 0.05, -0.8, 2.1, 1.1;
        VectorXd r(5);
        r << 0.4, -1.2, 0.8, 0.05, -0.6;
        const TargetMatrix tm = target_matrix(x, r);
        std::vector<std::vector<double>> xr(5, std::vector<double>(2));
        for (int j = 0; j < 5; ++j)
            for (int i = 0; i < 2; ++i) xr[j][i] = x(j, i);
        const auto want =
            oracles::target_matrix_triple_loop(std::vector<double>(r.begin(), r.end()), xr);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                CHECK(std::abs(tm.m(a, b) - want[a][b]) <= 1e-13);
    }
    SUBCASE("constructed instances satisfy the type invariants") {
        for (int rep = 0; rep < 10; ++rep) {
            const int n = 20 + rep;
            const int p = 2 + rep % 3;
            MatrixXd x(n, p);
            VectorXd r(n);
            for (int j = 0; j < n; ++j) {
                r[j] = rng.normal();
                for (int i = 0; i < p; ++i) x(j, i) = rng.normal();
            }
            const TargetMatrix tm = target_matrix(x, r);
            CHECK((tm.m - tm.m.adjoint()).norm() < 1e-12);
            for (int i = 0; i < p; ++i) CHECK(tm.eigenvalues[i] >= -1e-10);
            for (int i = 0; i + 1 < p; ++i)
                CHECK(tm.eigenvalues[i] >= tm.eigenvalues[i + 1] - 1e-12);
            CHECK(tm.eigenvalues.sum() ==
                  doctest::Approx(tm.m.trace().real()).epsilon(1e-10));
            // trace identity: tr(M) = (1/n) sum_t ||m(eta_t)||^2
            double tr_direct = 0.0;
            const MatrixXd xc = x.rowwise() - x.colwise().mean();
            for (int t = 0; t < n; ++t)
                tr_direct += char_moment(xc, r, r[t]).squaredNorm() / n;
            CHECK(tm.m.trace().real() == doctest::Approx(tr_direct).epsilon(1e-12));
        }
    }
    SUBCASE("sample permutation leaves the spectrum unchanged") {
        const int n = 40, p = 3;
        MatrixXd x(n, p);
        VectorXd r(n);
        for (int j = 0; j < n; ++j) {
            r[j] = rng.normal();
            for (int i = 0; i < p; ++i) x(j, i) = rng.normal();
        }
        const VectorXd base = target_matrix(x, r).eigenvalues;
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = (i * 17 + 5) % n;  // a fixed permutation
        MatrixXd xp(n, p);
        VectorXd rp(n);
        for (int i = 0; i < n; ++i) {
            xp.row(i) = x.row(idx[i]);
            rp[i] = r[idx[i]];
        }
        const VectorXd perm = target_matrix(xp, rp).eigenvalues;
        CHECK((base - perm).norm() < 1e-10);
    }
}

TEST_CASE("target_matrix consistency under independence and dependence" *
          doctest::skip(false)) {
    // eta independent of X: all eigenvalues shrink; eta = X1: rank-1 signal.
    Rng rng(splitmix64(777));

    SUBCASE("independence: max eigenvalue small at n=2000") {
        const int n = 2000, p = 2;
        MatrixXd x(n, p);
        VectorXd r(n);
        for (int j = 0; j < n; ++j) {
            r[j] = rng.normal();
            for (int i = 0; i < p; ++i) x(j, i) = rng.normal();
        }
        const TargetMatrix tm = target_matrix(x, r);
        CHECK(tm.eigenvalues[0] < 0.05);
    }
    SUBCASE("eta = X1 keeps one eigenvalue bounded away from zero") {
        const int n = 800, p = 3;
        MatrixXd x(n, p);
        VectorXd r(n);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < p; ++i) x(j, i) = rng.normal();
            r[j] = x(j, 0);
        }
        const TargetMatrix tm = target_matrix(x, r);
        CHECK(tm.eigenvalues[0] > 0.05);
        CHECK(tm.eigenvalues[1] < 0.5 * tm.eigenvalues[0]);
    }
    SUBCASE("O(1/n) decay: median max eigenvalue quarters from n=500 to n=2000") {
        auto med_max_eig = [&](int n) {
            std::vector<double> vals;
            for (int rep = 0; rep < 100; ++rep) {
                Rng local(splitmix64(hash_combine(9000, n * 1000 + rep)));
                MatrixXd x(n, 2);
                VectorXd r(n);
                for (int j = 0; j < n; ++j) {
                    r[j] = local.normal();
                    x(j, 0) = local.normal();
                    x(j, 1) = local.normal();
                }
                vals.push_back(target_matrix(x, r).eigenvalues[0]);
            }
            std::sort(vals.begin(), vals.end());
            return vals[vals.size() / 2];
        };
        CHECK(med_max_eig(2000) < 0.25 * med_max_eig(500));
    }
}

TEST_CASE("hermitian_eigenvalues") {
    SUBCASE("identity") {
        const VectorXd e = hermitian_eigenvalues(MatrixXcd::Identity(4, 4));
        for (int i = 0; i < 4; ++i) CHECK(e[i] == doctest::Approx(1.0));
    }
    SUBCASE("real diagonal is sorted descending") {
        MatrixXcd m = MatrixXcd::Zero(3, 3);
        m(0, 0) = 3.0;
        m(1, 1) = 1.0;
        m(2, 2) = 2.0;
        const VectorXd e = hermitian_eigenvalues(m);
        CHECK(e[0] == doctest::Approx(3.0));
        CHECK(e[1] == doctest::Approx(2.0));
        CHECK(e[2] == doctest::Approx(1.0));
    }
    SUBCASE("random PSD matches the cyclic-Jacobi oracle") {
        Rng rng(29);
        MatrixXcd a(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                a(i, j) = std::complex<double>(rng.normal(), rng.normal());
        const MatrixXcd m = a * a.adjoint();
        const VectorXd got = hermitian_eigenvalues(m);
        CHECK(got.sum() == doctest::Approx(m.trace().real()).epsilon(1e-10));

        const auto all = oracles::jacobi_eigenvalues(embed_rows(m));
        // duplicated spectrum: entries 0,2,4,... are the descending eigenvalues
        for (int i = 0; i < 4; ++i) {
            CHECK(got[i] == doctest::Approx(all[2 * i]).epsilon(1e-9));
            CHECK(got[i] == doctest::Approx(all[2 * i + 1]).epsilon(1e-9));
        }
    }
    SUBCASE("non-Hermitian input is rejected") {
        MatrixXcd m = MatrixXcd::Zero(2, 2);
        m(0, 1) = std::complex<double>(1.0, 0.0);
        m(1, 0) = std::complex<double>(0.5, 0.0);
        CHECK_THROWS_AS(hermitian_eigenvalues(m), contract_error);
    }
}

TEST_CASE("default_ridges") {
    // At p = 8 the sqrt(p) factor reproduces the canonical constants.
    const RidgeConfig r = default_ridges(200, 8);
    CHECK(r.c1n == doctest::Approx(3.179e-4).epsilon(1e-3));
    CHECK(r.c2n == doctest::Approx(0.8477).epsilon(1e-3));
    CHECK(r.tau == 0.5);
    CHECK(r.c2n / r.c1n == doctest::Approx(0.8 / 3e-4).epsilon(1e-12));

    // formula shape: scale factor is sqrt(p) ln(n) / sqrt(n)
    const RidgeConfig r2 = default_ridges(200, 2);
    CHECK(r2.c1n == doctest::Approx(3e-4 * std::sqrt(2.0) * std::log(200.0) /
                                    std::sqrt(200.0)).epsilon(1e-12));

    SUBCASE("monotone in n") {
        CHECK(default_ridges(400, 2).c1n < default_ridges(200, 2).c1n);
    }
}

TEST_CASE("tdrr_dimension") {
    const RidgeConfig cfg = default_ridges(200, 3);

    SUBCASE("zero spectrum gives q = 0") {
        CHECK(tdrr_dimension(VectorXd::Zero(3), cfg) == 0);
    }
    SUBCASE("one dominant eigenvalue gives q = 1") {
        VectorXd e(3);
        e << 10.0, 0.0, 0.0;
        CHECK(tdrr_dimension(e, cfg) == 1);
        const TdrrChain chain = tdrr_chain(e, cfg);
        CHECK(chain.ratios[0] <= 0.5);
        CHECK(chain.ratios[1] > 0.5);
        CHECK(chain.ratios[2] > 0.5);
    }
    SUBCASE("tiny negative noise is clamped") {
        VectorXd e(3);
        e << 5.0, 1e-12, -1e-12;
        CHECK(tdrr_dimension(e, cfg) == 1);
    }
    SUBCASE("scaling all eigenvalues to zero gives q = 0") {
        VectorXd e(3);
        e << 10.0, 4.0, 0.1;
        CHECK(tdrr_dimension((0.0 * e).eval(), cfg) == 0);
    }
    SUBCASE("two well-separated eigenvalues give q = 2") {
        VectorXd e(3);
        e << 8.0, 2.0, 0.0;
        CHECK(tdrr_dimension(e, cfg) == 2);
    }
    SUBCASE("ascending input is a contract violation") {
        VectorXd e(3);
        e << 0.0, 1.0, 2.0;
        CHECK_THROWS_AS(tdrr_dimension(e, cfg), contract_error);
    }
}
