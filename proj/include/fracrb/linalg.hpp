#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracrb::linalg {

/// Thrown when an iterative method fails to meet its tolerance within the
/// iteration budget; carries the final relative residual.
struct SolveFailure : std::runtime_error {
    SolveFailure(const std::string& what, double residual, std::size_t iterations)
        : std::runtime_error(what), relative_residual(residual), iterations(iterations) {}
    double relative_residual;
    std::size_t iterations;
};

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Sparse symmetric matrix in compressed row storage holding the full
/// symmetric pattern. Immutable after construction and safe to share
/// across threads.
class SparseSymMatrix {
  public:
    SparseSymMatrix() = default;

    /// Assembles from triplets; duplicates are summed. Entries given on one
    /// triangle are mirrored. Entries present on both triangles must agree
    /// to 1e-14 relative.
    static SparseSymMatrix from_triplets(std::size_t n, std::span<const Triplet> entries);

    /// Diagonal matrix.
    static SparseSymMatrix diagonal(std::span<const double> values);

    std::size_t dim() const { return n_; }

    /// y = Q x.
    void multiply(std::span<const double> x, std::span<double> y) const;

    double diagonal_entry(std::size_t i) const;

    /// Row-major iteration support for I/O and dense conversion.
    std::span<const std::size_t> row_offsets() const { return row_offsets_; }
    std::span<const std::size_t> cols() const { return cols_; }
    std::span<const double> values() const { return values_; }

  private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<std::size_t> cols_;
    std::vector<double> values_;
};

std::vector<double> spmv(const SparseSymMatrix& q, std::span<const double> x);

/// Dense symmetric matrix, row-major.
struct DenseSymMatrix {
    std::size_t m = 0;
    std::vector<double> a;

    static DenseSymMatrix zero(std::size_t m) { return {m, std::vector<double>(m * m, 0.0)}; }
    double& at(std::size_t i, std::size_t j) { return a[i * m + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * m + j]; }
};

DenseSymMatrix dense_from_sparse(const SparseSymMatrix& q);

/// Eigenvalues ascending; eigenvectors stores the orthonormal matrix Phi
/// row-major with column j belonging to eigenvalues[j].
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    std::vector<double> eigenvectors;
    std::size_t m = 0;

    double vec(std::size_t i, std::size_t j) const { return eigenvectors[i * m + j]; }
};

/// Cyclic-Jacobi eigensolver. Sweeps rotate until the off-diagonal
/// Frobenius mass falls below 1e-13 times the initial Frobenius norm.
/// Eigenvalues are sorted ascending; ties keep the Jacobi output order.
EigenDecomposition sym_eig(const DenseSymMatrix& q);

/// Q^s = Phi Lambda^s Phi^T for SPD Q and s in [0,1]. s = 0 gives the
/// identity, s = 1 gives Q back.
DenseSymMatrix mat_pow_s(const DenseSymMatrix& q, double s);

/// x^T Q^s x = sum_j lambda_j^s (Phi^T x)_j^2, without forming Q^s.
double quad_form_pow(const DenseSymMatrix& q, double s, std::span<const double> x);
double quad_form_pow(const EigenDecomposition& eig, double s, std::span<const double> x);

/// Solves (M + t^2 A) x = b by conjugate gradients with the diagonal
/// (Jacobi) preconditioner, to ||(M+t^2 A)x - b|| <= rel_tol ||b||.
/// Throws SolveFailure after max(10 n, 10^4) iterations.
std::vector<double> cg_shifted_solve(const SparseSymMatrix& m, const SparseSymMatrix& a, double t,
                                     std::span<const double> b, double rel_tol);

struct GramSchmidtResult {
    std::vector<std::vector<double>> basis; ///< M-orthonormal columns, input order
    std::size_t kept = 0;
};

/// Gram-Schmidt in the M inner product, applied to the columns in input
/// order with one full reorthogonalization pass per column. A candidate
/// whose M-norm after orthogonalization drops below drop_tol times its
/// pre-orthogonalization M-norm is discarded.
GramSchmidtResult gram_schmidt_m(std::span<const std::vector<double>> columns,
                                 const SparseSymMatrix& m, double drop_tol);

/// Largest generalized eigenvalue of A x = lambda^2 M x, overestimated:
/// power iteration on M^{-1} A until the Rayleigh quotient settles within
/// tol relative, then scaled by 1.05 and shifted by +1.
double lambda_max_estimate(const SparseSymMatrix& m, const SparseSymMatrix& a, double tol);

/// Smallest generalized eigenvalue, underestimated: inverse power
/// iteration (solves with A), scaled by 0.95. Callers may override with an
/// analytic bound.
double lambda_min_estimate(const SparseSymMatrix& m, const SparseSymMatrix& a, double tol);

// Dense plumbing shared by the model builders and the spectral oracle.

/// Lower Cholesky factor of an SPD dense matrix (throws on nonpositive
/// pivot).
std::vector<double> cholesky_factor(const DenseSymMatrix& q);

void forward_subst(std::span<const double> lower, std::size_t m, std::span<double> x);
void back_subst_transposed(std::span<const double> lower, std::size_t m, std::span<double> x);

struct GeneralizedEig {
    std::vector<double> eigenvalues;              ///< ascending
    std::vector<std::vector<double>> eigenvectors; ///< M-orthonormal columns
};

/// Solves A x = lambda^2 M x for dense symmetric A and SPD M by reducing
/// with the Cholesky factor of M and running sym_eig.
GeneralizedEig generalized_sym_eig(const DenseSymMatrix& a, const DenseSymMatrix& m);

// Small vector helpers used throughout.
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

} // namespace fracrb::linalg
