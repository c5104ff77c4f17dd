#pragma once

#include <span>
#include <vector>

#include "fracrb/linalg.hpp"
#include "fracrb/models.hpp"
#include "fracrb/zolotarev.hpp"

namespace fracrb::rbm {

/// s is accepted on the open interval (0,1) in production; the widened
/// mode admits the endpoints, where the norm degenerates to ||u||_0 and
/// ||u||_1 exactly.
enum class SDomain { open, widened };

/// One reduced space, bound to the vector it was built from. The first
/// basis column is u / beta and the projection of u onto the basis is
/// beta e_1. Immutable once built; per-s evaluations may run concurrently.
struct ReducedBasis {
    zolotarev::SnapshotTimes times;
    std::vector<std::vector<double>> basis;   ///< M-orthonormal columns
    linalg::DenseSymMatrix reduced_stiffness; ///< A_r = V^T A V
    linalg::EigenDecomposition eig;           ///< of A_r, cached once
    double beta = 0.0;                        ///< ||u||_0
    std::vector<double> projected_u;          ///< V^T M u
    std::vector<double> u;                    ///< the argument the basis belongs to
    bool exact = false;                       ///< basis dropped columns: reduced quantities
                                              ///< coincide with the full ones

    std::size_t kept() const { return basis.size(); }
};

/// Fractional norm and operator action for one s.
struct FracResult {
    double s = 0.0;
    double norm_value = 0.0;
    std::vector<double> action;
    bool exact = false;
};

/// Shifted solves (M + t_j^2 A) x_j = M u, one per time. The t_0 = 0 entry
/// is u itself without a solve. Distinct times run concurrently; the
/// output order matches the input order.
std::vector<std::vector<double>> solve_snapshots(const models::Pencil& pencil,
                                                 std::span<const double> u,
                                                 const zolotarev::SnapshotTimes& times,
                                                 double rel_tol);

/// Snapshots -> M-Gram-Schmidt -> projected stiffness -> cached
/// eigendecomposition.
ReducedBasis build_basis(const models::Pencil& pencil, std::span<const double> u,
                         const zolotarev::SnapshotTimes& times, double rel_tol = 1e-12,
                         double drop_tol = 1e-10);

/// ||u||_{H_r^s} = beta sqrt(e_1^T A_r^s e_1), O(kept^2) per call after the
/// cached eigendecomposition.
double rb_norm(const ReducedBasis& basis, double s, SDomain domain = SDomain::open);

/// Coefficients of the reduced operator action,
/// V A_r^s V^T M u = beta V (A_r^s e_1); never forms an n x n matrix.
std::vector<double> rb_apply(const ReducedBasis& basis, const models::Pencil& pencil, double s,
                             SDomain domain = SDomain::open);

/// One basis build (offline), then per-s norm and action evaluations
/// (online). Results are positionally matched to s_list and independent of
/// its ordering.
std::vector<FracResult> rb_eval_many(const models::Pencil& pencil, std::span<const double> u,
                                     const zolotarev::SpectralInterval& interval, std::size_t r,
                                     std::span<const double> s_list, double rel_tol = 1e-12,
                                     double drop_tol = 1e-10);

} // namespace fracrb::rbm
