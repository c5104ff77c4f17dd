#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fracrb/linalg.hpp"
#include "fracrb/models.hpp"
#include "test_support.hpp"

using namespace fracrb;
using test_support::Rng;

namespace {

linalg::SparseSymMatrix sparse_from_dense(const linalg::DenseSymMatrix& d) {
    std::vector<linalg::Triplet> triplets;
    for (std::size_t i = 0; i < d.m; ++i)
        for (std::size_t j = i; j < d.m; ++j)
            if (d.at(i, j) != 0.0) triplets.push_back({i, j, d.at(i, j)});
    return linalg::SparseSymMatrix::from_triplets(d.m, triplets);
}

linalg::SparseSymMatrix identity(std::size_t n) {
    std::vector<double> ones(n, 1.0);
    return linalg::SparseSymMatrix::diagonal(ones);
}

// Analytic eigenvalues of a symmetric 2x2.
std::vector<double> eig2(double a, double b, double d) {
    const double tr = a + d;
    const double disc = std::sqrt((a - d) * (a - d) + 4.0 * b * b);
    return {0.5 * (tr - disc), 0.5 * (tr + disc)};
}

// Analytic eigenvalues of a symmetric 3x3 (trigonometric form).
std::vector<double> eig3(const linalg::DenseSymMatrix& q) {
    const double p1 = q.at(0, 1) * q.at(0, 1) + q.at(0, 2) * q.at(0, 2) +
                      q.at(1, 2) * q.at(1, 2);
    const double tr = q.at(0, 0) + q.at(1, 1) + q.at(2, 2);
    if (p1 == 0.0) {
        std::vector<double> eig = {q.at(0, 0), q.at(1, 1), q.at(2, 2)};
        std::sort(eig.begin(), eig.end());
        return eig;
    }
    const double mean = tr / 3.0;
    const double p2 = (q.at(0, 0) - mean) * (q.at(0, 0) - mean) +
                      (q.at(1, 1) - mean) * (q.at(1, 1) - mean) +
                      (q.at(2, 2) - mean) * (q.at(2, 2) - mean) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    linalg::DenseSymMatrix b = linalg::DenseSymMatrix::zero(3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            b.at(i, j) = (q.at(i, j) - (i == j ? mean : 0.0)) / p;
    const double det =
        b.at(0, 0) * (b.at(1, 1) * b.at(2, 2) - b.at(1, 2) * b.at(2, 1)) -
        b.at(0, 1) * (b.at(1, 0) * b.at(2, 2) - b.at(1, 2) * b.at(2, 0)) +
        b.at(0, 2) * (b.at(1, 0) * b.at(2, 1) - b.at(1, 1) * b.at(2, 0));
    const double r = std::clamp(det / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double pi = 3.14159265358979323846;
    std::vector<double> eig = {mean + 2.0 * p * std::cos(phi + 2.0 * pi / 3.0),
                               mean + 2.0 * p * std::cos(phi + 4.0 * pi / 3.0),
                               mean + 2.0 * p * std::cos(phi)};
    std::sort(eig.begin(), eig.end());
    return eig;
}

} // namespace

TEST_CASE("spmv on identity, tridiagonal row sums, random vs dense") {
    Rng rng(11);
    const auto id = identity(4);
    const std::vector<double> x = {1.0, -2.0, 3.5, 0.25};
    CHECK(test_support::max_abs_diff(linalg::spmv(id, x), x) == 0.0);

    std::vector<linalg::Triplet> tri = {{0, 0, 2}, {1, 1, 2}, {2, 2, 2}, {0, 1, -1}, {1, 2, -1}};
    const auto t = linalg::SparseSymMatrix::from_triplets(3, tri);
    const std::vector<double> ones = {1.0, 1.0, 1.0};
    const auto row_sums = linalg::spmv(t, ones);
    CHECK(row_sums[0] == doctest::Approx(1.0));
    CHECK(row_sums[1] == doctest::Approx(0.0));
    CHECK(row_sums[2] == doctest::Approx(1.0));

    const auto dense = test_support::random_dense_sym(5, rng);
    const auto sparse = sparse_from_dense(dense);
    const auto v = test_support::random_vector(5, rng);
    CHECK(test_support::max_abs_diff(linalg::spmv(sparse, v),
                                     test_support::dense_multiply(dense, v)) < 1e-14);
}

TEST_CASE("spmv dimension mismatch throws") {
    const auto id = identity(3);
    std::vector<double> wrong(4, 1.0);
    CHECK_THROWS_AS(linalg::spmv(id, wrong), std::invalid_argument);
}

TEST_CASE("from_triplets mirrors one triangle and rejects asymmetry") {
    std::vector<linalg::Triplet> lower_only = {{0, 0, 2}, {1, 0, -1}, {1, 1, 2}};
    const auto q = linalg::SparseSymMatrix::from_triplets(2, lower_only);
    const std::vector<double> e0 = {1.0, 0.0};
    const auto col0 = linalg::spmv(q, e0);
    CHECK(col0[0] == 2.0);
    CHECK(col0[1] == -1.0);

    std::vector<linalg::Triplet> bad = {{0, 1, 1.0}, {1, 0, 1.5}};
    CHECK_THROWS_AS(linalg::SparseSymMatrix::from_triplets(2, bad), std::invalid_argument);
}

TEST_CASE("cg solves the identity system at t = 0") {
    const auto id = identity(6);
    Rng rng(5);
    const auto b = test_support::random_vector(6, rng);
    const auto x = linalg::cg_shifted_solve(id, id, 0.0, b, 1e-12);
    CHECK(test_support::max_abs_diff(x, b) < 1e-12);
}

TEST_CASE("cg matches the direct factorization on the 1D FEM pencil") {
    const auto pencil = models::laplace_1d_fem(8);
    std::vector<double> ones(8, 1.0);
    const auto b = linalg::spmv(pencil.mass, ones);
    const auto x = linalg::cg_shifted_solve(pencil.mass, pencil.stiffness, 1.0, b, 1e-13);

    // Oracle: dense Cholesky of M + A.
    auto shifted = linalg::dense_from_sparse(pencil.mass);
    const auto a_dense = linalg::dense_from_sparse(pencil.stiffness);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) shifted.at(i, j) += a_dense.at(i, j);
    const auto expected = test_support::dense_solve_spd(shifted, b);
    CHECK(test_support::max_abs_diff(x, expected) < 1e-10);
}

TEST_CASE("cg residual contract on random SPD pencils across shifts") {
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 4 + trial % 9;
        const auto m_dense = test_support::random_dense_spd(n, rng, 1.0);
        const auto a_dense = test_support::random_dense_spd(n, rng, 0.5);
        const auto m = sparse_from_dense(m_dense);
        const auto a = sparse_from_dense(a_dense);
        const auto b = test_support::random_vector(n, rng);
        const double b_norm = test_support::l2_norm(b);
        for (double t : {0.0, 1e-3, 1.0, 1e3}) {
            const auto x = linalg::cg_shifted_solve(m, a, t, b, 1e-11);
            auto residual = linalg::spmv(m, x);
            const auto ax = linalg::spmv(a, x);
            for (std::size_t i = 0; i < n; ++i) residual[i] += t * t * ax[i] - b[i];
            CHECK(test_support::l2_norm(residual) <= 1e-11 * b_norm * 1.001);
        }
    }
}

TEST_CASE("cg large-shift solutions scale like 1/t^2") {
    const auto pencil = models::laplace_1d_fem(12);
    std::vector<double> ones(12, 1.0);
    const auto b = linalg::spmv(pencil.mass, ones);
    const double t = 1e6;
    const auto x = linalg::cg_shifted_solve(pencil.mass, pencil.stiffness, t, b, 1e-12);
    // ||x|| ~ ||(t^2 A)^{-1} b|| = O(t^{-2})
    CHECK(test_support::l2_norm(x) < 1e-9);
    CHECK(test_support::l2_norm(x) > 1e-15);
}

TEST_CASE("cg rejects bad tolerances") {
    const auto id = identity(3);
    std::vector<double> b(3, 1.0);
    CHECK_THROWS_AS(linalg::cg_shifted_solve(id, id, 0.0, b, 1e-3), std::domain_error);
    CHECK_THROWS_AS(linalg::cg_shifted_solve(id, id, 0.0, b, 0.0), std::domain_error);
}

TEST_CASE("gram_schmidt_m keeps an orthonormal input and drops duplicates") {
    const auto pencil = models::laplace_1d_fem(10);
    Rng rng(31);
    std::vector<std::vector<double>> cols;
    for (int c = 0; c < 3; ++c) cols.push_back(test_support::random_vector(10, rng));
    auto gs = linalg::gram_schmidt_m(cols, pencil.mass, 1e-10);
    CHECK(gs.kept == 3);

    // Feeding the output back returns it unchanged up to sign.
    auto gs2 = linalg::gram_schmidt_m(gs.basis, pencil.mass, 1e-10);
    CHECK(gs2.kept == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        const double sign = linalg::dot(gs.basis[c], gs2.basis[c]) >= 0.0 ? 1.0 : -1.0;
        std::vector<double> flipped = gs2.basis[c];
        for (double& v : flipped) v *= sign;
        CHECK(test_support::max_abs_diff(gs.basis[c], flipped) < 1e-12);
    }

    // A duplicated column never increases the kept count.
    cols.push_back(cols[1]);
    auto gs3 = linalg::gram_schmidt_m(cols, pencil.mass, 1e-10);
    CHECK(gs3.kept == 3);
}

TEST_CASE("gram_schmidt_m output is M-orthonormal on larger random batches") {
    const auto pencil = models::laplace_1d_fem(60);
    Rng rng(13);
    std::vector<std::vector<double>> cols;
    for (int c = 0; c < 12; ++c) cols.push_back(test_support::random_vector(60, rng));
    const auto gs = linalg::gram_schmidt_m(cols, pencil.mass, 1e-10);
    REQUIRE(gs.kept == 12);
    for (std::size_t i = 0; i < gs.kept; ++i) {
        const auto mv = linalg::spmv(pencil.mass, gs.basis[i]);
        for (std::size_t j = 0; j < gs.kept; ++j) {
            const double expected = i == j ? 1.0 : 0.0;
            CHECK(std::abs(linalg::dot(gs.basis[j], mv) - expected) <= 1e-10);
        }
    }
}

TEST_CASE("gram_schmidt_m rejects a zero first column") {
    const auto id = identity(4);
    std::vector<std::vector<double>> cols = {std::vector<double>(4, 0.0)};
    CHECK_THROWS_AS(linalg::gram_schmidt_m(cols, id, 1e-10), std::invalid_argument);
}

TEST_CASE("sym_eig identities and the hand-computable 2x2") {
    linalg::DenseSymMatrix id3 = linalg::DenseSymMatrix::zero(3);
    for (std::size_t i = 0; i < 3; ++i) id3.at(i, i) = 1.0;
    const auto eid = linalg::sym_eig(id3);
    for (double v : eid.eigenvalues) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

    linalg::DenseSymMatrix two = linalg::DenseSymMatrix::zero(2);
    two.at(0, 0) = 2.0;
    two.at(1, 1) = 2.0;
    two.at(0, 1) = 1.0;
    two.at(1, 0) = 1.0;
    const auto e2 = linalg::sym_eig(two);
    CHECK(e2.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(e2.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-13));
    // Eigenvector of 1 is (1,-1)/sqrt(2) up to sign.
    CHECK(std::abs(e2.vec(0, 0)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(e2.vec(0, 0) * e2.vec(1, 0) < 0.0);
    CHECK(std::abs(e2.vec(0, 1)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(e2.vec(0, 1) * e2.vec(1, 1) > 0.0);
}

TEST_CASE("sym_eig reconstructs random matrices") {
    Rng rng(41);
    const auto q = test_support::random_dense_sym(6, rng);
    const auto eig = linalg::sym_eig(q);
    // Phi Lambda Phi^T = Q
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 6; ++k)
                acc += eig.vec(i, k) * eig.eigenvalues[k] * eig.vec(j, k);
            CHECK(acc == doctest::Approx(q.at(i, j)).epsilon(1e-10).scale(1.0));
        }
    // Orthonormality.
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 6; ++k) acc += eig.vec(k, i) * eig.vec(k, j);
            CHECK(std::abs(acc - (i == j ? 1.0 : 0.0)) < 1e-10);
        }
}

TEST_CASE("sym_eig matches closed forms for all small integer matrices") {
    // 2x2: all symmetric integer matrices with entries in [-3,3].
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b)
            for (int d = -3; d <= 3; ++d) {
                linalg::DenseSymMatrix q = linalg::DenseSymMatrix::zero(2);
                q.at(0, 0) = a;
                q.at(0, 1) = b;
                q.at(1, 0) = b;
                q.at(1, 1) = d;
                const auto eig = linalg::sym_eig(q);
                const auto expected = eig2(a, b, d);
                CHECK(std::abs(eig.eigenvalues[0] - expected[0]) < 1e-12);
                CHECK(std::abs(eig.eigenvalues[1] - expected[1]) < 1e-12);
            }
    // 3x3: exhaustive over integer entries. The trigonometric closed form
    // itself degrades to ~1e-7 near repeated roots, so pair it with the
    // exact integer characteristic coefficients, which are perfectly
    // conditioned for symmetric matrices.
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b)
            for (int c = -3; c <= 3; ++c)
                for (int d = -3; d <= 3; ++d)
                    for (int e = -3; e <= 3; ++e)
                        for (int f = -3; f <= 3; ++f) {
                            linalg::DenseSymMatrix q = linalg::DenseSymMatrix::zero(3);
                            q.at(0, 0) = a;
                            q.at(1, 1) = d;
                            q.at(2, 2) = f;
                            q.at(0, 1) = b;
                            q.at(1, 0) = b;
                            q.at(0, 2) = c;
                            q.at(2, 0) = c;
                            q.at(1, 2) = e;
                            q.at(2, 1) = e;
                            const auto eig = linalg::sym_eig(q);
                            const auto expected = eig3(q);
                            for (int k = 0; k < 3; ++k)
                                CHECK(std::abs(eig.eigenvalues[k] - expected[k]) < 1e-6);
                            const double l0 = eig.eigenvalues[0];
                            const double l1 = eig.eigenvalues[1];
                            const double l2 = eig.eigenvalues[2];
                            const double trace = a + d + f;
                            const double minors = static_cast<double>(a * d - b * b) +
                                                  (a * f - c * c) + (d * f - e * e);
                            const double det = a * (d * f - e * e) - b * (b * f - c * e) +
                                               c * (b * e - d * c);
                            CHECK(std::abs(l0 + l1 + l2 - trace) < 1e-11 * (1.0 + std::abs(trace)));
                            CHECK(std::abs(l0 * l1 + l0 * l2 + l1 * l2 - minors) <
                                  1e-11 * (1.0 + std::abs(minors)));
                            CHECK(std::abs(l0 * l1 * l2 - det) < 1e-10 * (1.0 + std::abs(det)));
                        }
}

TEST_CASE("mat_pow_s endpoint and diagonal cases") {
    Rng rng(55);
    const auto q = test_support::random_dense_spd(5, rng);
    const auto id = linalg::mat_pow_s(q, 0.0);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(id.at(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

    linalg::DenseSymMatrix diag = linalg::DenseSymMatrix::zero(3);
    diag.at(0, 0) = 1.0;
    diag.at(1, 1) = 4.0;
    diag.at(2, 2) = 9.0;
    const auto root = linalg::mat_pow_s(diag, 0.5);
    CHECK(root.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(root.at(1, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(root.at(2, 2) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("mat_pow_s semigroup property") {
    Rng rng(56);
    for (auto [s1, s2] : {std::pair{0.5, 0.5}, std::pair{0.25, 0.5}, std::pair{0.3, 0.7}}) {
        const auto q = test_support::random_dense_spd(5, rng);
        const auto p1 = linalg::mat_pow_s(q, s1);
        const auto p2 = linalg::mat_pow_s(q, s2);
        const auto expected = linalg::mat_pow_s(q, s1 + s2);
        double scale = 0.0;
        for (std::size_t i = 0; i < 5; ++i) scale = std::max(scale, std::abs(expected.at(i, i)));
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < 5; ++k) acc += p1.at(i, k) * p2.at(k, j);
                CHECK(std::abs(acc - expected.at(i, j)) <= 1e-9 * scale);
            }
    }
}

TEST_CASE("mat_pow_s rejects indefinite input") {
    linalg::DenseSymMatrix q = linalg::DenseSymMatrix::zero(2);
    q.at(0, 0) = 1.0;
    q.at(1, 1) = -2.0;
    CHECK_THROWS_AS(linalg::mat_pow_s(q, 0.5), std::domain_error);
    CHECK_THROWS_AS(linalg::mat_pow_s(q, 1.5), std::domain_error);
}

TEST_CASE("quad_form_pow basics and consistency with mat_pow_s") {
    linalg::DenseSymMatrix id = linalg::DenseSymMatrix::zero(3);
    for (std::size_t i = 0; i < 3; ++i) id.at(i, i) = 1.0;
    const std::vector<double> x = {1.0, 2.0, -2.0};
    CHECK(linalg::quad_form_pow(id, 0.7, x) == doctest::Approx(9.0).epsilon(1e-13));

    linalg::DenseSymMatrix four = linalg::DenseSymMatrix::zero(1);
    four.at(0, 0) = 4.0;
    const std::vector<double> one = {1.0};
    CHECK(linalg::quad_form_pow(four, 0.5, one) == doctest::Approx(2.0).epsilon(1e-13));

    Rng rng(57);
    const auto q = test_support::random_dense_spd(6, rng);
    const auto v = test_support::random_vector(6, rng);
    for (double s : {0.25, 0.5, 0.75}) {
        const auto pow = linalg::mat_pow_s(q, s);
        const auto pv = test_support::dense_multiply(pow, v);
        double expected = 0.0;
        for (std::size_t i = 0; i < 6; ++i) expected += v[i] * pv[i];
        CHECK(linalg::quad_form_pow(q, s, v) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("lambda_max_estimate bounds diagonal and FEM spectra") {
    std::vector<double> d = {1.0, 4.0, 9.0};
    const auto a = linalg::SparseSymMatrix::diagonal(d);
    const auto m = identity(3);
    const double est = linalg::lambda_max_estimate(m, a, 1e-8);
    CHECK(est >= 9.0);
    CHECK(est <= 9.0 * 1.05 + 1.0 + 1e-6);

    const auto pencil = models::laplace_1d_fem(32);
    const double upper = linalg::lambda_max_estimate(pencil.mass, pencil.stiffness, 1e-8);
    CHECK(upper >= pencil.exact_eigenvalues.back());

    const double unit = linalg::lambda_max_estimate(m, m, 1e-8);
    CHECK(unit == doctest::Approx(1.0 * 1.05 + 1.0).epsilon(1e-6));
}

TEST_CASE("lambda_min_estimate bounds diagonal and FEM spectra") {
    std::vector<double> d = {1.0, 4.0, 9.0};
    const auto a = linalg::SparseSymMatrix::diagonal(d);
    const auto m = identity(3);
    const double est = linalg::lambda_min_estimate(m, a, 1e-8);
    CHECK(est <= 1.0);
    CHECK(est >= 0.95 - 1e-6);

    const auto pencil = models::laplace_1d_fem(24);
    const double lower = linalg::lambda_min_estimate(pencil.mass, pencil.stiffness, 1e-8);
    CHECK(lower <= pencil.exact_eigenvalues.front());
    CHECK(lower >= 0.9 * pencil.exact_eigenvalues.front());

    const double unit = linalg::lambda_min_estimate(m, m, 1e-8);
    CHECK(unit == doctest::Approx(0.95).epsilon(1e-6));
}

TEST_CASE("generalized_sym_eig reproduces the 1D FEM closed form") {
    // Closed form for the P1 mass/stiffness pencil on (0,1):
    // lambda_k^2 = (6/h^2) (1 - cos(k pi h)) / (2 + cos(k pi h)).
    const auto pencil = models::laplace_1d_fem(8);
    const auto a = linalg::dense_from_sparse(pencil.stiffness);
    const auto m = linalg::dense_from_sparse(pencil.mass);
    const auto eig = linalg::generalized_sym_eig(a, m);
    const double h = 1.0 / 9.0;
    const double pi = 3.14159265358979323846;
    std::vector<double> expected;
    for (int k = 1; k <= 8; ++k) {
        const double c = std::cos(k * pi * h);
        expected.push_back(6.0 / (h * h) * (1.0 - c) / (2.0 + c));
    }
    std::sort(expected.begin(), expected.end());
    for (std::size_t k = 0; k < 8; ++k)
        CHECK(eig.eigenvalues[k] == doctest::Approx(expected[k]).epsilon(1e-11));

    // M-orthonormal eigenvectors.
    for (std::size_t i = 0; i < 8; ++i) {
        const auto mv = linalg::spmv(pencil.mass, eig.eigenvectors[i]);
        for (std::size_t j = 0; j < 8; ++j)
            CHECK(std::abs(linalg::dot(eig.eigenvectors[j], mv) - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
}

TEST_CASE("cholesky_factor rejects indefinite matrices") {
    linalg::DenseSymMatrix q = linalg::DenseSymMatrix::zero(2);
    q.at(0, 0) = 1.0;
    q.at(1, 1) = -1.0;
    CHECK_THROWS_AS(linalg::cholesky_factor(q), std::domain_error);
}
