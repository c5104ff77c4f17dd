#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fracrb/models.hpp"
#include "fracrb/zolotarev.hpp"

namespace fracrb::oracle {

/// Full generalized eigendecomposition of a pencil, M-orthonormal
/// eigenvectors, ascending eigenvalues.
struct SpectralOracle {
    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> eigenvectors;
};

/// One cell of a convergence sweep.
struct ErrorRecord {
    std::size_t r = 0;
    double s = 0.0;
    double e_norm = 0.0;  ///< ||u||_{H_r^s}^2 - ||u||_{H^s}^2
    double e_op = 0.0;    ///< || L_{H_r^s}(u) - L_{H^s} u ||_0
    double norm_u_1 = 0.0;
    double norm_u_2 = 0.0;
};

/// Dense brute-force eigensolve; guarded at n <= 4096.
SpectralOracle full_eig(const models::Pencil& pencil);

/// sqrt( sum_k lambda_k^{2s} (phi_k^T M u)^2 ).
double h_norm_exact(const SpectralOracle& oracle, const linalg::SparseSymMatrix& m,
                    std::span<const double> u, double s);

/// sum_k lambda_k^{2s} (phi_k^T M u) phi_k, the exact action of (M^{-1}A)^s.
std::vector<double> op_exact(const SpectralOracle& oracle, const linalg::SparseSymMatrix& m,
                             std::span<const double> u, double s);

/// K^2(t; u) = u^T M u - u^T M (M + t^2 A)^{-1} M u, clamped at zero.
double k_functional_sq(const models::Pencil& pencil, std::span<const double> u, double t,
                       double rel_tol);

/// The K-norm integral int_0^inf t^{-2s-1} K^2(t;u) dt, evaluated with
/// panel-adaptive Gauss-Legendre in tau = ln t plus closed-form head and
/// tail corrections. Independent of the eigensystem path: every K^2 value
/// comes from a shifted CG solve.
double k_norm_quadrature(const models::Pencil& pencil, std::span<const double> u, double s,
                         double quad_tol);

struct MinMaxResult {
    double max_value = 0.0;
    /// Representatives of the grid clusters where the product comes within
    /// 5% of its maximum (for alternance inspection).
    std::vector<double> near_extremal_points;
};

/// max over a uniform grid of x in [lo, hi] of prod_j |(1 - p_j x)/(1 + p_j x)|.
/// grid_size is clamped below at 1000.
MinMaxResult minmax_product(std::span<const double> points, double lo, double hi,
                            std::size_t grid_size);

enum class TruthMode {
    automatic, ///< oracle when n <= 1024, surrogate otherwise
    oracle,
    surrogate ///< high-r reduced computation at r* = max(r_list) + surrogate_extra
};

struct SweepConfig {
    std::vector<double> s_list;
    std::vector<std::size_t> r_list;
    double rel_tol = 1e-12;
    double drop_tol = 1e-10;
    TruthMode truth = TruthMode::automatic;
    std::size_t surrogate_extra = 20;
};

struct SweepResult {
    std::vector<ErrorRecord> records; ///< sorted by (s, r)
    double e_norm_floor = 0.0;        ///< 1e2 * rel_tol * ||u||_1^2
    double e_op_floor = 0.0;          ///< 1e2 * rel_tol * ||u||_2
    bool used_oracle = false;
};

/// Builds one basis per r (cells run concurrently) and measures both error
/// fields against the chosen truth for every s.
SweepResult error_sweep(const models::Pencil& pencil, std::span<const double> u,
                        const zolotarev::SpectralInterval& interval, const SweepConfig& config);

enum class ErrorField { norm, op };

/// Negated least-squares slope of ln(error) versus r over the records with
/// error above the floor. Throws when fewer than four records survive.
double fit_rate(std::span<const ErrorRecord> records, ErrorField field, double floor);

} // namespace fracrb::oracle
