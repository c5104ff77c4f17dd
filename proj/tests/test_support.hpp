#pragma once

#include <cstdint>
#include <vector>

#include "fracrb/linalg.hpp"

namespace test_support {

// Self-contained xorshift-style generator so test data never depends on
// library internals.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed ^ 0x9E3779B97F4A7C15ull) {}
    std::uint64_t next() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double symmetric() { return 2.0 * uniform() - 1.0; }
};

inline fracrb::linalg::DenseSymMatrix random_dense_sym(std::size_t m, Rng& rng) {
    auto q = fracrb::linalg::DenseSymMatrix::zero(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            const double v = rng.symmetric();
            q.at(i, j) = v;
            q.at(j, i) = v;
        }
    return q;
}

// SPD with eigenvalues bounded away from zero.
inline fracrb::linalg::DenseSymMatrix random_dense_spd(std::size_t m, Rng& rng,
                                                       double shift = 1.0) {
    auto q = random_dense_sym(m, rng);
    auto spd = fracrb::linalg::DenseSymMatrix::zero(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < m; ++k) acc += q.at(i, k) * q.at(j, k);
            spd.at(i, j) = acc;
        }
    for (std::size_t i = 0; i < m; ++i) spd.at(i, i) += shift;
    return spd;
}

inline std::vector<double> random_vector(std::size_t n, Rng& rng) {
    std::vector<double> x(n);
    for (double& v : x) v = rng.symmetric();
    return x;
}

inline std::vector<double> dense_multiply(const fracrb::linalg::DenseSymMatrix& q,
                                          const std::vector<double>& x) {
    std::vector<double> y(q.m, 0.0);
    for (std::size_t i = 0; i < q.m; ++i)
        for (std::size_t j = 0; j < q.m; ++j) y[i] += q.at(i, j) * x[j];
    return y;
}

// Independent direct solver (Cholesky + substitutions) used as the oracle
// for the iterative paths.
inline std::vector<double> dense_solve_spd(const fracrb::linalg::DenseSymMatrix& q,
                                           std::vector<double> b) {
    const auto lower = fracrb::linalg::cholesky_factor(q);
    fracrb::linalg::forward_subst(lower, q.m, b);
    fracrb::linalg::back_subst_transposed(lower, q.m, b);
    return b;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

inline double l2_norm(const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc);
}

} // namespace test_support
