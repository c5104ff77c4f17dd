#include "fracrb/rbm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fracrb/parallel.hpp"

namespace fracrb::rbm {

namespace {

void require_s(double s, SDomain domain, const char* who) {
    const bool ok = domain == SDomain::widened ? (s >= 0.0 && s <= 1.0) : (s > 0.0 && s < 1.0);
    if (!ok)
        throw std::domain_error(std::string(who) + ": exponent s = " + std::to_string(s) +
                                " outside the admissible interval");
}

bool is_zero(std::span<const double> u) {
    for (double v : u)
        if (v != 0.0) return false;
    return true;
}

// A_r^s e_1 through the cached eigendecomposition, scaled by beta.
std::vector<double> scaled_pow_e1(const ReducedBasis& basis, double s) {
    const auto& eig = basis.eig;
    if (!eig.eigenvalues.empty() && eig.eigenvalues.front() <= 0.0)
        throw std::domain_error("rb_apply: reduced matrix has a nonpositive eigenvalue");
    const std::size_t m = eig.m;
    std::vector<double> coeff(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        // (Phi^T e_1)_j = Phi_{0j}
        coeff[j] = std::pow(eig.eigenvalues[j], s) * eig.vec(0, j);
    }
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += eig.vec(i, j) * coeff[j];
        out[i] = basis.beta * acc;
    }
    return out;
}

} // namespace

std::vector<std::vector<double>> solve_snapshots(const models::Pencil& pencil,
                                                 std::span<const double> u,
                                                 const zolotarev::SnapshotTimes& times,
                                                 double rel_tol) {
    if (is_zero(u)) throw std::invalid_argument("solve_snapshots: u = 0 is not admissible");
    if (times.times.empty() || times.times.front() != 0.0)
        throw std::invalid_argument("solve_snapshots: times must start at t_0 = 0");

    const std::vector<double> rhs = linalg::spmv(pencil.mass, u);
    std::vector<std::vector<double>> snapshots(times.times.size());
    snapshots[0].assign(u.begin(), u.end());

    parallel::for_each_index(times.times.size() - 1, [&](std::size_t idx) {
        const double t = times.times[idx + 1];
        try {
            snapshots[idx + 1] = linalg::cg_shifted_solve(pencil.mass, pencil.stiffness, t, rhs,
                                                          rel_tol);
        } catch (const linalg::SolveFailure& failure) {
            throw linalg::SolveFailure("snapshot solve at t = " + std::to_string(t) +
                                           " failed: " + failure.what(),
                                       failure.relative_residual, failure.iterations);
        }
    });
    return snapshots;
}

ReducedBasis build_basis(const models::Pencil& pencil, std::span<const double> u,
                         const zolotarev::SnapshotTimes& times, double rel_tol, double drop_tol) {
    ReducedBasis rb;
    rb.times = times;
    rb.u.assign(u.begin(), u.end());

    const auto snapshots = solve_snapshots(pencil, u, times, rel_tol);
    auto gs = linalg::gram_schmidt_m(snapshots, pencil.mass, drop_tol);
    rb.basis = std::move(gs.basis);
    rb.exact = rb.kept() < times.times.size();

    const std::size_t kept = rb.kept();
    rb.reduced_stiffness = linalg::DenseSymMatrix::zero(kept);
    std::vector<std::vector<double>> a_basis(kept);
    parallel::for_each_index(kept, [&](std::size_t j) {
        a_basis[j] = linalg::spmv(pencil.stiffness, rb.basis[j]);
    });
    for (std::size_t i = 0; i < kept; ++i)
        for (std::size_t j = i; j < kept; ++j) {
            const double value = linalg::dot(rb.basis[i], a_basis[j]);
            rb.reduced_stiffness.at(i, j) = value;
            rb.reduced_stiffness.at(j, i) = value;
        }
    rb.eig = linalg::sym_eig(rb.reduced_stiffness);

    const std::vector<double> mu = linalg::spmv(pencil.mass, u);
    rb.beta = std::sqrt(linalg::dot(u, mu));
    rb.projected_u.resize(kept);
    for (std::size_t j = 0; j < kept; ++j) rb.projected_u[j] = linalg::dot(rb.basis[j], mu);
    return rb;
}

double rb_norm(const ReducedBasis& basis, double s, SDomain domain) {
    require_s(s, domain, "rb_norm");
    std::vector<double> e1(basis.kept(), 0.0);
    e1[0] = 1.0;
    return basis.beta * std::sqrt(linalg::quad_form_pow(basis.eig, s, e1));
}

std::vector<double> rb_apply(const ReducedBasis& basis, const models::Pencil& pencil, double s,
                             SDomain domain) {
    require_s(s, domain, "rb_apply");
    const std::vector<double> reduced = scaled_pow_e1(basis, s);
    std::vector<double> out(pencil.n, 0.0);
    for (std::size_t j = 0; j < basis.kept(); ++j) linalg::axpy(reduced[j], basis.basis[j], out);
    return out;
}

std::vector<FracResult> rb_eval_many(const models::Pencil& pencil, std::span<const double> u,
                                     const zolotarev::SpectralInterval& interval, std::size_t r,
                                     std::span<const double> s_list, double rel_tol,
                                     double drop_tol) {
    if (s_list.empty()) throw std::invalid_argument("rb_eval_many: empty s list");
    for (double s : s_list) require_s(s, SDomain::open, "rb_eval_many");

    const zolotarev::SnapshotTimes times = zolotarev::snapshot_times(interval, r);
    const ReducedBasis basis = build_basis(pencil, u, times, rel_tol, drop_tol);

    std::vector<FracResult> results(s_list.size());
    parallel::for_each_index(s_list.size(), [&](std::size_t i) {
        results[i].s = s_list[i];
        results[i].norm_value = rb_norm(basis, s_list[i]);
        results[i].action = rb_apply(basis, pencil, s_list[i]);
        results[i].exact = basis.exact;
    });
    return results;
}

} // namespace fracrb::rbm
