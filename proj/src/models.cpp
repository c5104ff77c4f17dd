#include "fracrb/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fracrb::models {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> dense_generalized_eigenvalues(const Pencil& pencil) {
    const linalg::DenseSymMatrix a = linalg::dense_from_sparse(pencil.stiffness);
    const linalg::DenseSymMatrix m = linalg::dense_from_sparse(pencil.mass);
    return linalg::generalized_sym_eig(a, m).eigenvalues;
}

} // namespace

namespace detail {

std::uint64_t SplitMix64::next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double SplitMix64::uniform_symmetric() {
    for (;;) {
        const double u = static_cast<double>(next() >> 11) * 0x1.0p-53; // [0,1)
        const double c = 2.0 * u - 1.0;
        if (c > -1.0) return c;
    }
}

} // namespace detail

Pencil laplace_1d_fem(std::size_t n) {
    if (n < 2) throw std::invalid_argument("laplace_1d_fem: need n >= 2 interior unknowns");
    const double h = 1.0 / static_cast<double>(n + 1);

    std::vector<linalg::Triplet> a_entries, m_entries;
    for (std::size_t i = 0; i < n; ++i) {
        a_entries.push_back({i, i, 2.0 / h});
        m_entries.push_back({i, i, 4.0 * h / 6.0});
        if (i + 1 < n) {
            a_entries.push_back({i, i + 1, -1.0 / h});
            m_entries.push_back({i, i + 1, h / 6.0});
        }
    }
    Pencil pencil;
    pencil.n = n;
    pencil.stiffness = linalg::SparseSymMatrix::from_triplets(n, a_entries);
    pencil.mass = linalg::SparseSymMatrix::from_triplets(n, m_entries);
    if (n <= 512) pencil.exact_eigenvalues = dense_generalized_eigenvalues(pencil);
    return pencil;
}

Pencil laplace_2d_fd(std::size_t n) {
    if (n < 2) throw std::invalid_argument("laplace_2d_fd: need n >= 2 grid points per side");
    const double h = 1.0 / static_cast<double>(n + 1);
    const double inv_h_sq = 1.0 / (h * h);
    const std::size_t total = n * n;

    std::vector<linalg::Triplet> a_entries;
    a_entries.reserve(3 * total);
    auto index = [n](std::size_t i, std::size_t j) { return i * n + j; };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            a_entries.push_back({index(i, j), index(i, j), 4.0 * inv_h_sq});
            if (j + 1 < n) a_entries.push_back({index(i, j), index(i, j + 1), -inv_h_sq});
            if (i + 1 < n) a_entries.push_back({index(i, j), index(i + 1, j), -inv_h_sq});
        }

    Pencil pencil;
    pencil.n = total;
    pencil.stiffness = linalg::SparseSymMatrix::from_triplets(total, a_entries);
    std::vector<double> ones(total, 1.0);
    pencil.mass = linalg::SparseSymMatrix::diagonal(ones);

    pencil.exact_eigenvalues.reserve(total);
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= n; ++j) {
            const double si = std::sin(static_cast<double>(i) * kPi * h / 2.0);
            const double sj = std::sin(static_cast<double>(j) * kPi * h / 2.0);
            pencil.exact_eigenvalues.push_back(4.0 * inv_h_sq * (si * si + sj * sj));
        }
    std::sort(pencil.exact_eigenvalues.begin(), pencil.exact_eigenvalues.end());
    return pencil;
}

Pencil synthetic_diagonal(std::span<const double> eigenvalues_sq) {
    for (double v : eigenvalues_sq)
        if (!(v > 0.0))
            throw std::invalid_argument("synthetic_diagonal: eigenvalues must be positive");
    Pencil pencil;
    pencil.n = eigenvalues_sq.size();
    std::vector<double> ones(pencil.n, 1.0);
    pencil.mass = linalg::SparseSymMatrix::diagonal(ones);
    pencil.stiffness = linalg::SparseSymMatrix::diagonal(eigenvalues_sq);
    pencil.exact_eigenvalues.assign(eigenvalues_sq.begin(), eigenvalues_sq.end());
    std::sort(pencil.exact_eigenvalues.begin(), pencil.exact_eigenvalues.end());
    return pencil;
}

std::vector<double> unit_square_spectrum(double bound) {
    if (!(bound > 2.0 * kPi * kPi))
        throw std::invalid_argument("unit_square_spectrum: bound below the ground mode 2 pi^2");
    std::vector<double> values;
    for (std::size_t i = 1; kPi * kPi * static_cast<double>(i * i + 1) <= bound; ++i)
        for (std::size_t j = 1;; ++j) {
            const double v = kPi * kPi * static_cast<double>(i * i + j * j);
            if (v > bound) break;
            values.push_back(v);
        }
    std::sort(values.begin(), values.end());
    return values;
}

namespace {

linalg::SparseSymMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("matrix market: cannot open '" + path + "'");

    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("matrix market: '" + path + "' is empty");
    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate" ||
        field != "real")
        throw std::runtime_error("matrix market: '" + path +
                                 "' has unsupported header: " + header);
    if (symmetry != "symmetric")
        throw std::runtime_error("matrix market: '" + path + "' is not declared symmetric (got '" +
                                 symmetry + "')");

    std::string line;
    std::size_t rows = 0, cols = 0, entries = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ls(line);
        if (!(ls >> rows >> cols >> entries))
            throw std::runtime_error("matrix market: '" + path + "' has a malformed size line: " +
                                     line);
        break;
    }
    if (rows == 0 || rows != cols)
        throw std::runtime_error("matrix market: '" + path + "' must be square and nonempty");

    std::vector<linalg::Triplet> triplets;
    triplets.reserve(entries);
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ls(line);
        std::size_t i = 0, j = 0;
        double value = 0.0;
        if (!(ls >> i >> j >> value))
            throw std::runtime_error("matrix market: '" + path + "' has a malformed entry: " +
                                     line);
        if (i < 1 || j < 1 || i > rows || j > cols)
            throw std::runtime_error("matrix market: '" + path + "' entry index out of range: " +
                                     line);
        triplets.push_back({i - 1, j - 1, value});
        ++seen;
    }
    if (seen != entries)
        throw std::runtime_error("matrix market: '" + path + "' declared " +
                                 std::to_string(entries) + " entries but contains " +
                                 std::to_string(seen));
    return linalg::SparseSymMatrix::from_triplets(rows, triplets);
}

} // namespace

Pencil load_matrix_market(const std::string& path_m, const std::string& path_a) {
    Pencil pencil;
    pencil.mass = read_matrix_market(path_m);
    pencil.stiffness = read_matrix_market(path_a);
    if (pencil.mass.dim() != pencil.stiffness.dim())
        throw std::runtime_error("matrix market: mass is " + std::to_string(pencil.mass.dim()) +
                                 "-dimensional but stiffness is " +
                                 std::to_string(pencil.stiffness.dim()));
    pencil.n = pencil.mass.dim();
    return pencil;
}

void save_matrix_market(const linalg::SparseSymMatrix& q, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("matrix market: cannot write '" + path + "'");

    std::size_t count = 0;
    const auto offsets = q.row_offsets();
    const auto cols = q.cols();
    for (std::size_t i = 0; i < q.dim(); ++i)
        for (std::size_t s = offsets[i]; s < offsets[i + 1]; ++s)
            if (cols[s] <= i) ++count;

    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << q.dim() << " " << q.dim() << " " << count << "\n";
    const auto vals = q.values();
    char buffer[64];
    for (std::size_t i = 0; i < q.dim(); ++i)
        for (std::size_t s = offsets[i]; s < offsets[i + 1]; ++s) {
            if (cols[s] > i) continue;
            std::snprintf(buffer, sizeof(buffer), "%.17g", vals[s]);
            out << (i + 1) << " " << (cols[s] + 1) << " " << buffer << "\n";
        }
    if (!out) throw std::runtime_error("matrix market: write to '" + path + "' failed");
}

std::vector<double> random_combination(std::span<const std::vector<double>> eigenvectors,
                                       std::size_t active_count, std::uint64_t seed) {
    if (active_count > eigenvectors.size())
        throw std::invalid_argument("random_combination: active_count " +
                                    std::to_string(active_count) + " exceeds the basis size " +
                                    std::to_string(eigenvectors.size()));
    if (active_count == 0)
        throw std::invalid_argument("random_combination: active_count must be positive");

    detail::SplitMix64 rng(seed);
    std::vector<double> u(eigenvectors.front().size(), 0.0);
    for (std::size_t k = 0; k < active_count; ++k) {
        const double c = rng.uniform_symmetric();
        linalg::axpy(c, eigenvectors[k], u);
    }
    return u;
}

std::vector<double> random_combination(const Pencil& pencil, std::size_t active_count,
                                       std::uint64_t seed) {
    if (pencil.n > 4096)
        throw std::invalid_argument(
            "random_combination: dense eigenbasis guard (n <= 4096) exceeded");
    const linalg::DenseSymMatrix a = linalg::dense_from_sparse(pencil.stiffness);
    const linalg::DenseSymMatrix m = linalg::dense_from_sparse(pencil.mass);
    const linalg::GeneralizedEig eig = linalg::generalized_sym_eig(a, m);
    return random_combination(eig.eigenvectors, active_count, seed);
}

std::vector<double> random_coefficients(std::size_t n, std::uint64_t seed) {
    detail::SplitMix64 rng(seed);
    std::vector<double> u(n);
    for (double& v : u) v = rng.uniform_symmetric();
    return u;
}

} // namespace fracrb::models
