#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fracrb/linalg.hpp"

namespace fracrb::models {

/// Mass/stiffness pair defining the discrete inner products. Immutable
/// after construction. exact_eigenvalues holds the ascending generalized
/// eigenvalues when they are known (closed form or small dense solve),
/// otherwise stays empty.
struct Pencil {
    linalg::SparseSymMatrix mass;
    linalg::SparseSymMatrix stiffness;
    std::size_t n = 0;
    std::vector<double> exact_eigenvalues;
};

/// Piecewise-linear elements on the unit interval with homogeneous
/// Dirichlet conditions, n interior unknowns, h = 1/(n+1):
///   A = (1/h) tridiag(-1, 2, -1),  M = (h/6) tridiag(1, 4, 1).
/// exact_eigenvalues come from a dense generalized eigensolve for n <= 512.
Pencil laplace_1d_fem(std::size_t n);

/// Five-point finite differences on the n x n interior grid of the unit
/// square, h = 1/(n+1); M is the identity. exact_eigenvalues are the
/// closed-form values (4/h^2)(sin^2(i pi h / 2) + sin^2(j pi h / 2)).
Pencil laplace_2d_fd(std::size_t n);

/// M = I, A = diag(eigenvalues_sq); all entries must be positive.
Pencil synthetic_diagonal(std::span<const double> eigenvalues_sq);

/// The Dirichlet spectrum of the unit square truncated at bound:
/// { pi^2 (i^2 + j^2) <= bound : i, j >= 1 }, ascending with multiplicity.
std::vector<double> unit_square_spectrum(double bound);

/// Reads two Matrix Market coordinate files (header
/// "%%MatrixMarket matrix coordinate real symmetric", 1-based indices) of
/// equal dimension. Lower-triangle storage is mirrored to the full pattern.
Pencil load_matrix_market(const std::string& path_m, const std::string& path_a);

/// Writes the lower triangle in Matrix Market coordinate format with 17
/// significant digits.
void save_matrix_market(const linalg::SparseSymMatrix& q, const std::string& path);

/// u = sum_{k < active_count} c_k phi_k over the pencil's generalized
/// eigenvectors, with c_k drawn from uniform(-1,1) by the seeded splitmix64
/// recipe below. The eigenbasis is computed by a dense generalized solve
/// (n <= 4096); prefer the eigenvector overload when a decomposition is
/// already at hand.
std::vector<double> random_combination(const Pencil& pencil, std::size_t active_count,
                                       std::uint64_t seed);
std::vector<double> random_combination(std::span<const std::vector<double>> eigenvectors,
                                       std::size_t active_count, std::uint64_t seed);

/// Seeded uniform(-1,1) coefficient vector in the nodal basis.
std::vector<double> random_coefficients(std::size_t n, std::uint64_t seed);

namespace detail {

/// splitmix64: state += 0x9E3779B97F4A7C15; z = state;
/// z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB;
/// return z ^ z>>31. Draws map through (z >> 11) * 2^-53 into [0,1).
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next();
    double uniform_symmetric(); ///< in (-1, 1)
};

} // namespace detail

} // namespace fracrb::models
