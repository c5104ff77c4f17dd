#include "fracrb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace fracrb::linalg {

namespace {

void require_dim(std::size_t expected, std::size_t got, const char* who) {
    if (expected != got)
        throw std::invalid_argument(std::string(who) + ": dimension mismatch, expected " +
                                    std::to_string(expected) + ", got " + std::to_string(got));
}

} // namespace

double dot(std::span<const double> x, std::span<const double> y) {
    require_dim(x.size(), y.size(), "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    require_dim(x.size(), y.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

SparseSymMatrix SparseSymMatrix::from_triplets(std::size_t n, std::span<const Triplet> entries) {
    std::map<std::pair<std::size_t, std::size_t>, double> accumulated;
    for (const Triplet& t : entries) {
        if (t.row >= n || t.col >= n)
            throw std::invalid_argument("SparseSymMatrix: triplet index out of range");
        accumulated[{t.row, t.col}] += t.value;
    }
    // Mirror and check symmetry where both triangles are present.
    std::map<std::pair<std::size_t, std::size_t>, double> full;
    for (const auto& [idx, value] : accumulated) {
        const auto mirrored = std::make_pair(idx.second, idx.first);
        if (idx.first != idx.second) {
            auto other = accumulated.find(mirrored);
            if (other != accumulated.end()) {
                const double scale = std::max(std::abs(value), std::abs(other->second));
                if (std::abs(value - other->second) > 1e-14 * std::max(scale, 1.0))
                    throw std::invalid_argument(
                        "SparseSymMatrix: values are not symmetric at (" +
                        std::to_string(idx.first) + "," + std::to_string(idx.second) + ")");
            }
        }
        full[idx] = value;
        full.try_emplace(mirrored, value);
    }

    SparseSymMatrix q;
    q.n_ = n;
    q.row_offsets_.assign(n + 1, 0);
    for (const auto& [idx, value] : full) ++q.row_offsets_[idx.first + 1];
    for (std::size_t i = 0; i < n; ++i) q.row_offsets_[i + 1] += q.row_offsets_[i];
    q.cols_.resize(full.size());
    q.values_.resize(full.size());
    std::vector<std::size_t> cursor(q.row_offsets_.begin(), q.row_offsets_.end() - 1);
    for (const auto& [idx, value] : full) {
        const std::size_t slot = cursor[idx.first]++;
        q.cols_[slot] = idx.second;
        q.values_[slot] = value;
    }
    return q;
}

SparseSymMatrix SparseSymMatrix::diagonal(std::span<const double> values) {
    SparseSymMatrix q;
    q.n_ = values.size();
    q.row_offsets_.resize(q.n_ + 1);
    q.cols_.resize(q.n_);
    q.values_.assign(values.begin(), values.end());
    std::iota(q.row_offsets_.begin(), q.row_offsets_.end(), 0);
    std::iota(q.cols_.begin(), q.cols_.end(), 0);
    return q;
}

void SparseSymMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    require_dim(n_, x.size(), "spmv");
    require_dim(n_, y.size(), "spmv");
    for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::size_t s = row_offsets_[i]; s < row_offsets_[i + 1]; ++s)
            acc += values_[s] * x[cols_[s]];
        y[i] = acc;
    }
}

double SparseSymMatrix::diagonal_entry(std::size_t i) const {
    for (std::size_t s = row_offsets_[i]; s < row_offsets_[i + 1]; ++s)
        if (cols_[s] == i) return values_[s];
    return 0.0;
}

std::vector<double> spmv(const SparseSymMatrix& q, std::span<const double> x) {
    std::vector<double> y(q.dim());
    q.multiply(x, y);
    return y;
}

DenseSymMatrix dense_from_sparse(const SparseSymMatrix& q) {
    DenseSymMatrix d = DenseSymMatrix::zero(q.dim());
    const auto offsets = q.row_offsets();
    const auto cols = q.cols();
    const auto vals = q.values();
    for (std::size_t i = 0; i < q.dim(); ++i)
        for (std::size_t s = offsets[i]; s < offsets[i + 1]; ++s) d.at(i, cols[s]) = vals[s];
    return d;
}

EigenDecomposition sym_eig(const DenseSymMatrix& q) {
    const std::size_t m = q.m;
    EigenDecomposition out;
    out.m = m;
    if (m == 0) return out;

    std::vector<double> a = q.a;
    std::vector<double> v(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) v[i * m + i] = 1.0;

    double frob_sq = 0.0;
    for (double x : a) frob_sq += x * x;
    double off_sq = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) off_sq += 2.0 * a[i * m + j] * a[i * m + j];

    const double target = 1e-13 * std::sqrt(frob_sq);
    const double target_sq = target * target;
    // Rotations on entries below skip_tol cannot move the off-diagonal mass
    // past the target; skipping them keeps late sweeps cheap.
    const double skip_tol = m > 0 ? 0.1 * target / static_cast<double>(m) : 0.0;

    for (int sweep = 0; sweep < 64 && off_sq > target_sq; ++sweep) {
        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t q_idx = p + 1; q_idx < m; ++q_idx) {
                const double apq = a[p * m + q_idx];
                if (std::abs(apq) <= skip_tol) continue;
                const double app = a[p * m + p];
                const double aqq = a[q_idx * m + q_idx];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                off_sq -= 2.0 * apq * apq;
                if (off_sq < 0.0) off_sq = 0.0;

                for (std::size_t k = 0; k < m; ++k) {
                    const double akp = a[k * m + p];
                    const double akq = a[k * m + q_idx];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q_idx] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double apk = a[p * m + k];
                    const double aqk = a[q_idx * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q_idx * m + k] = s * apk + c * aqk;
                }
                a[p * m + q_idx] = 0.0;
                a[q_idx * m + p] = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    const double vkp = v[k * m + p];
                    const double vkq = v[k * m + q_idx];
                    v[k * m + p] = c * vkp - s * vkq;
                    v[k * m + q_idx] = s * vkp + c * vkq;
                }
            }
        }
        // Recompute the drift-prone running estimate once per sweep.
        off_sq = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) off_sq += 2.0 * a[i * m + j] * a[i * m + j];
    }

    // Ascending sort; stable to keep Jacobi output order on ties.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a[i * m + i] < a[j * m + j]; });

    out.eigenvalues.resize(m);
    out.eigenvectors.resize(m * m);
    for (std::size_t j = 0; j < m; ++j) {
        out.eigenvalues[j] = a[order[j] * m + order[j]];
        for (std::size_t i = 0; i < m; ++i) out.eigenvectors[i * m + j] = v[i * m + order[j]];
    }
    return out;
}

namespace {

std::vector<double> projections(const EigenDecomposition& eig, std::span<const double> x) {
    require_dim(eig.m, x.size(), "quad_form_pow");
    std::vector<double> proj(eig.m, 0.0);
    for (std::size_t j = 0; j < eig.m; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < eig.m; ++i) acc += eig.vec(i, j) * x[i];
        proj[j] = acc;
    }
    return proj;
}

} // namespace

DenseSymMatrix mat_pow_s(const DenseSymMatrix& q, double s) {
    if (!(s >= 0.0) || !(s <= 1.0))
        throw std::domain_error("mat_pow_s: exponent must lie in [0,1], got " + std::to_string(s));
    DenseSymMatrix out = DenseSymMatrix::zero(q.m);
    if (s == 0.0) {
        for (std::size_t i = 0; i < q.m; ++i) out.at(i, i) = 1.0;
        return out;
    }
    if (s == 1.0) return q;

    const EigenDecomposition eig = sym_eig(q);
    if (!eig.eigenvalues.empty() && eig.eigenvalues.front() <= 0.0)
        throw std::domain_error("mat_pow_s: matrix has a nonpositive eigenvalue " +
                                std::to_string(eig.eigenvalues.front()));
    std::vector<double> powered(eig.m);
    for (std::size_t j = 0; j < eig.m; ++j) powered[j] = std::pow(eig.eigenvalues[j], s);
    for (std::size_t i = 0; i < q.m; ++i)
        for (std::size_t j = i; j < q.m; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < q.m; ++k) acc += eig.vec(i, k) * powered[k] * eig.vec(j, k);
            out.at(i, j) = acc;
            out.at(j, i) = acc;
        }
    return out;
}

double quad_form_pow(const EigenDecomposition& eig, double s, std::span<const double> x) {
    if (!eig.eigenvalues.empty() && eig.eigenvalues.front() <= 0.0)
        throw std::domain_error("quad_form_pow: matrix has a nonpositive eigenvalue " +
                                std::to_string(eig.eigenvalues.front()));
    const std::vector<double> proj = projections(eig, x);
    double acc = 0.0;
    for (std::size_t j = 0; j < eig.m; ++j)
        acc += std::pow(eig.eigenvalues[j], s) * proj[j] * proj[j];
    return acc;
}

double quad_form_pow(const DenseSymMatrix& q, double s, std::span<const double> x) {
    return quad_form_pow(sym_eig(q), s, x);
}

std::vector<double> cg_shifted_solve(const SparseSymMatrix& m, const SparseSymMatrix& a, double t,
                                     std::span<const double> b, double rel_tol) {
    const std::size_t n = m.dim();
    require_dim(n, a.dim(), "cg_shifted_solve");
    require_dim(n, b.size(), "cg_shifted_solve");
    if (!(t >= 0.0)) throw std::domain_error("cg_shifted_solve: shift t must be nonnegative");
    if (!(rel_tol > 0.0) || !(rel_tol <= 1e-6))
        throw std::domain_error("cg_shifted_solve: rel_tol must lie in (0, 1e-6]");

    const double t_sq = t * t;
    std::vector<double> scratch(n);
    auto apply = [&](std::span<const double> x, std::span<double> y) {
        m.multiply(x, y);
        if (t_sq != 0.0) {
            a.multiply(x, scratch);
            for (std::size_t i = 0; i < n; ++i) y[i] += t_sq * scratch[i];
        }
    };

    const double b_norm = std::sqrt(dot(b, b));
    std::vector<double> x(n, 0.0);
    if (b_norm == 0.0) return x;

    std::vector<double> inv_diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = m.diagonal_entry(i) + t_sq * a.diagonal_entry(i);
        if (!(d > 0.0))
            throw std::domain_error("cg_shifted_solve: nonpositive diagonal, system not SPD");
        inv_diag[i] = 1.0 / d;
    }

    std::vector<double> r(b.begin(), b.end());
    std::vector<double> z(n), p(n), ap(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);

    const std::size_t max_iter = std::max<std::size_t>(10 * n, 10000);
    double rel_res = 1.0;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0))
            throw SolveFailure("cg_shifted_solve: lost positive definiteness (p^T K p = " +
                                   std::to_string(pap) + ")",
                               rel_res, iter);
        const double alpha = rz / pap;
        axpy(alpha, p, x);
        axpy(-alpha, ap, r);

        rel_res = std::sqrt(dot(r, r)) / b_norm;
        if (rel_res <= rel_tol) {
            // Recurrence residuals drift; accept only on the true residual.
            apply(x, ap);
            for (std::size_t i = 0; i < n; ++i) ap[i] = b[i] - ap[i];
            const double true_res = std::sqrt(dot(ap, ap)) / b_norm;
            if (true_res <= rel_tol) return x;
            r = ap; // restart on the explicit residual
        }

        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolveFailure("cg_shifted_solve: no convergence to rel_tol " + std::to_string(rel_tol) +
                           " within " + std::to_string(max_iter) + " iterations (t = " +
                           std::to_string(t) + ")",
                       rel_res, max_iter);
}

GramSchmidtResult gram_schmidt_m(std::span<const std::vector<double>> columns,
                                 const SparseSymMatrix& m, double drop_tol) {
    if (columns.empty()) throw std::invalid_argument("gram_schmidt_m: no input columns");
    const std::size_t n = m.dim();

    GramSchmidtResult result;
    std::vector<std::vector<double>> m_basis; // cached M * basis column
    std::vector<double> work(n);

    for (std::size_t c = 0; c < columns.size(); ++c) {
        require_dim(n, columns[c].size(), "gram_schmidt_m");
        std::vector<double> x = columns[c];
        m.multiply(x, work);
        const double pre_norm = std::sqrt(std::max(dot(x, work), 0.0));
        if (c == 0 && !(pre_norm > 0.0))
            throw std::invalid_argument("gram_schmidt_m: first column has zero M-norm");

        // Initial pass plus one full reorthogonalization pass.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < result.basis.size(); ++j) {
                const double coeff = dot(m_basis[j], x);
                axpy(-coeff, result.basis[j], x);
            }
        }

        m.multiply(x, work);
        const double post_norm = std::sqrt(std::max(dot(x, work), 0.0));
        if (post_norm <= drop_tol * pre_norm) continue;

        const double inv = 1.0 / post_norm;
        for (double& v : x) v *= inv;
        for (double& v : work) v *= inv;
        result.basis.push_back(std::move(x));
        m_basis.push_back(work);
    }
    result.kept = result.basis.size();
    return result;
}

namespace {

// Deterministic quasi-random start vector for the power iterations; fixed
// recipe so estimates are reproducible across runs and platforms.
std::vector<double> power_start(std::size_t n) {
    std::vector<double> x(n);
    std::uint64_t state = 0x243F6A8885A308D3ull; // fixed seed
    for (std::size_t i = 0; i < n; ++i) {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        x[i] = 0.5 + static_cast<double>(z >> 11) * 0x1.0p-53;
    }
    return x;
}

} // namespace

double lambda_max_estimate(const SparseSymMatrix& m, const SparseSymMatrix& a, double tol) {
    const std::size_t n = m.dim();
    require_dim(n, a.dim(), "lambda_max_estimate");
    if (!(tol > 0.0)) throw std::domain_error("lambda_max_estimate: tol must be positive");

    std::vector<double> x = power_start(n);
    std::vector<double> ax(n), mx(n);
    double rho_prev = 0.0;
    const std::size_t max_iter = 10000;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        a.multiply(x, ax);
        m.multiply(x, mx);
        const double rho = dot(x, ax) / dot(x, mx);
        if (iter > 0 && std::abs(rho - rho_prev) < tol * std::abs(rho))
            return rho * 1.05 + 1.0;
        rho_prev = rho;
        // next iterate: x <- M^{-1} A x, normalized
        std::vector<double> y = cg_shifted_solve(m, m, 0.0, ax, 1e-12);
        double norm = std::sqrt(dot(y, y));
        if (!(norm > 0.0))
            throw SolveFailure("lambda_max_estimate: iterate collapsed to zero", 1.0, iter);
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    }
    throw SolveFailure("lambda_max_estimate: power iteration did not settle", 1.0, max_iter);
}

double lambda_min_estimate(const SparseSymMatrix& m, const SparseSymMatrix& a, double tol) {
    const std::size_t n = m.dim();
    require_dim(n, a.dim(), "lambda_min_estimate");
    if (!(tol > 0.0)) throw std::domain_error("lambda_min_estimate: tol must be positive");

    std::vector<double> x = power_start(n);
    std::vector<double> ax(n), mx(n);
    double rho_prev = 0.0;
    const std::size_t max_iter = 10000;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        a.multiply(x, ax);
        m.multiply(x, mx);
        const double rho = dot(x, ax) / dot(x, mx);
        if (iter > 0 && std::abs(rho - rho_prev) < tol * std::abs(rho)) return rho * 0.95;
        rho_prev = rho;
        // next iterate: x <- A^{-1} M x, normalized
        std::vector<double> y = cg_shifted_solve(a, a, 0.0, mx, 1e-12);
        double norm = std::sqrt(dot(y, y));
        if (!(norm > 0.0))
            throw SolveFailure("lambda_min_estimate: iterate collapsed to zero", 1.0, iter);
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    }
    throw SolveFailure("lambda_min_estimate: inverse power iteration did not settle", 1.0,
                       max_iter);
}

std::vector<double> cholesky_factor(const DenseSymMatrix& q) {
    const std::size_t m = q.m;
    std::vector<double> lower(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = q.at(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= lower[i * m + k] * lower[j * m + k];
            if (i == j) {
                if (!(acc > 0.0))
                    throw std::domain_error("cholesky_factor: nonpositive pivot at row " +
                                            std::to_string(i) + ", matrix is not SPD");
                lower[i * m + i] = std::sqrt(acc);
            } else {
                lower[i * m + j] = acc / lower[j * m + j];
            }
        }
    }
    return lower;
}

void forward_subst(std::span<const double> lower, std::size_t m, std::span<double> x) {
    for (std::size_t i = 0; i < m; ++i) {
        double acc = x[i];
        for (std::size_t k = 0; k < i; ++k) acc -= lower[i * m + k] * x[k];
        x[i] = acc / lower[i * m + i];
    }
}

void back_subst_transposed(std::span<const double> lower, std::size_t m, std::span<double> x) {
    for (std::size_t ii = m; ii-- > 0;) {
        double acc = x[ii];
        for (std::size_t k = ii + 1; k < m; ++k) acc -= lower[k * m + ii] * x[k];
        x[ii] = acc / lower[ii * m + ii];
    }
}

GeneralizedEig generalized_sym_eig(const DenseSymMatrix& a, const DenseSymMatrix& m) {
    const std::size_t n = a.m;
    require_dim(n, m.m, "generalized_sym_eig");
    const std::vector<double> lower = cholesky_factor(m);

    // B = L^{-1} A L^{-T}, assembled column by column.
    DenseSymMatrix b = DenseSymMatrix::zero(n);
    std::vector<double> col(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(col.begin(), col.end(), 0.0);
        col[j] = 1.0;
        back_subst_transposed(lower, n, col); // col = L^{-T} e_j
        std::vector<double> acol(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += a.at(i, k) * col[k];
            acol[i] = acc;
        }
        forward_subst(lower, n, acol); // acol = L^{-1} A L^{-T} e_j
        for (std::size_t i = 0; i < n; ++i) b.at(i, j) = acol[i];
    }
    // Symmetrize roundoff.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (b.at(i, j) + b.at(j, i));
            b.at(i, j) = avg;
            b.at(j, i) = avg;
        }

    const EigenDecomposition eig = sym_eig(b);
    GeneralizedEig out;
    out.eigenvalues = eig.eigenvalues;
    out.eigenvectors.assign(n, std::vector<double>(n));
    std::vector<double> y(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) y[i] = eig.vec(i, j);
        back_subst_transposed(lower, n, y); // phi = L^{-T} y is M-orthonormal
        out.eigenvectors[j] = y;
    }
    return out;
}

} // namespace fracrb::linalg
