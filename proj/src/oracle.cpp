#include "fracrb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fracrb/parallel.hpp"
#include "fracrb/rbm.hpp"
#include "fracrb/specfun.hpp"

namespace fracrb::oracle {

SpectralOracle full_eig(const models::Pencil& pencil) {
    if (pencil.n > 4096)
        throw std::invalid_argument("full_eig: dense work guard (n <= 4096) exceeded, n = " +
                                    std::to_string(pencil.n));
    const linalg::DenseSymMatrix a = linalg::dense_from_sparse(pencil.stiffness);
    const linalg::DenseSymMatrix m = linalg::dense_from_sparse(pencil.mass);
    linalg::GeneralizedEig eig = linalg::generalized_sym_eig(a, m);

    // Enforce exact M-normalization on top of the back-transformed vectors.
    SpectralOracle oracle;
    oracle.eigenvalues = std::move(eig.eigenvalues);
    oracle.eigenvectors = std::move(eig.eigenvectors);
    std::vector<double> work(pencil.n);
    for (auto& phi : oracle.eigenvectors) {
        pencil.mass.multiply(phi, work);
        const double norm = std::sqrt(linalg::dot(phi, work));
        for (double& v : phi) v /= norm;
    }
    return oracle;
}

namespace {

std::vector<double> modal_coefficients(const SpectralOracle& oracle,
                                       const linalg::SparseSymMatrix& m,
                                       std::span<const double> u) {
    const std::vector<double> mu = linalg::spmv(m, u);
    std::vector<double> coeff(oracle.eigenvalues.size());
    for (std::size_t k = 0; k < coeff.size(); ++k)
        coeff[k] = linalg::dot(oracle.eigenvectors[k], mu);
    return coeff;
}

} // namespace

double h_norm_exact(const SpectralOracle& oracle, const linalg::SparseSymMatrix& m,
                    std::span<const double> u, double s) {
    const std::vector<double> coeff = modal_coefficients(oracle, m, u);
    double acc = 0.0;
    for (std::size_t k = 0; k < coeff.size(); ++k)
        acc += std::pow(oracle.eigenvalues[k], s) * coeff[k] * coeff[k];
    return std::sqrt(acc);
}

std::vector<double> op_exact(const SpectralOracle& oracle, const linalg::SparseSymMatrix& m,
                             std::span<const double> u, double s) {
    const std::vector<double> coeff = modal_coefficients(oracle, m, u);
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t k = 0; k < coeff.size(); ++k)
        linalg::axpy(std::pow(oracle.eigenvalues[k], s) * coeff[k], oracle.eigenvectors[k], out);
    return out;
}

double k_functional_sq(const models::Pencil& pencil, std::span<const double> u, double t,
                       double rel_tol) {
    if (!(t >= 0.0)) throw std::domain_error("k_functional_sq: t must be nonnegative");
    const std::vector<double> mu = linalg::spmv(pencil.mass, u);
    if (t == 0.0) return 0.0;
    const std::vector<double> x = linalg::cg_shifted_solve(pencil.mass, pencil.stiffness, t, mu,
                                                           rel_tol);
    const double value = linalg::dot(u, mu) - linalg::dot(mu, x);
    return std::max(value, 0.0);
}

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; mirrored).
constexpr int kGaussPoints = 16;
constexpr double kGaussNode[8] = {
    0.0950125098376374401853, 0.2816035507792589132304, 0.4580167776572273863424,
    0.6178762444026437484467, 0.7554044083550030338951, 0.8656312023878317438805,
    0.9445750230732325760780, 0.9894009349916499325962};
constexpr double kGaussWeight[8] = {
    0.1894506104550684962854, 0.1826034150449235888667, 0.1691565193950025381893,
    0.1495959888165767320815, 0.1246289712555338720525, 0.0951585116824927848099,
    0.0622535239386478928628, 0.0271524594117540948518};

template <typename F>
double gauss16(const F& f, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int i = 0; i < 8; ++i) {
        acc += kGaussWeight[i] * (f(mid - half * kGaussNode[i]) + f(mid + half * kGaussNode[i]));
    }
    return acc * half;
}

template <typename F>
double adaptive_panel(const F& f, double lo, double hi, double abs_tol, int depth) {
    const double whole = gauss16(f, lo, hi);
    const double mid = 0.5 * (lo + hi);
    const double split = gauss16(f, lo, mid) + gauss16(f, mid, hi);
    if (std::abs(whole - split) <= abs_tol || hi - lo < 1e-6) return split;
    if (depth >= 24)
        throw std::runtime_error(
            "k_norm_quadrature: panel refinement stalled on [" + std::to_string(lo) + ", " +
            std::to_string(hi) + "], delta " + std::to_string(std::abs(whole - split)) +
            " against tolerance " + std::to_string(abs_tol));
    return adaptive_panel(f, lo, mid, 0.5 * abs_tol, depth + 1) +
           adaptive_panel(f, mid, hi, 0.5 * abs_tol, depth + 1);
}

} // namespace

double k_norm_quadrature(const models::Pencil& pencil, std::span<const double> u, double s,
                         double quad_tol) {
    if (!(s > 0.0) || !(s < 1.0))
        throw std::domain_error("k_norm_quadrature: s must lie in (0,1)");
    if (!(quad_tol > 0.0)) throw std::domain_error("k_norm_quadrature: quad_tol must be positive");

    const double solve_tol = 1e-13;
    const std::vector<double> mu = linalg::spmv(pencil.mass, u);
    const std::vector<double> au = linalg::spmv(pencil.stiffness, u);
    const double norm0_sq = linalg::dot(u, mu);         // ||u||_0^2
    const double norm1_sq = linalg::dot(u, au);         // ||u||_1^2
    if (!(norm0_sq > 0.0)) return 0.0;
    const std::vector<double> minv_au = linalg::cg_shifted_solve(pencil.mass, pencil.stiffness,
                                                                 0.0, au, 1e-12);
    const double norm2_sq = linalg::dot(au, minv_au);   // ||u||_2^2
    const std::vector<double> a_minv_au = linalg::spmv(pencil.stiffness, minv_au);
    const double norm3_sq = linalg::dot(minv_au, a_minv_au); // sum lambda^6 u_k^2

    // Everything below is measured against the coarse lower bound
    // ||u||_K^2 >= lambda_1^{2s} ||u||_0^2 / C_s^2.
    const double lambda1_sq = linalg::lambda_min_estimate(pencil.mass, pencil.stiffness, 1e-4);
    const double cs = specfun::c_s(s);
    const double lower_bound = std::pow(lambda1_sq, s) * norm0_sq / (cs * cs);
    const double tol_eff = std::min(quad_tol, 1e-7);
    const double eps_abs = 0.125 * tol_eff * lower_bound;

    // Tail: beyond t_max replace K^2 by ||u||_0^2 in closed form. The
    // substitution error is below ||u||_0^2 t^{-2s-2} / ((2s+2) lambda_1^2).
    const double t_max = std::pow(
        norm0_sq / (lambda1_sq * (2.0 * s + 2.0) * eps_abs), 1.0 / (2.0 * s + 2.0));
    const double tail = norm0_sq * std::pow(t_max, -2.0 * s) / (2.0 * s);

    // Head: below t_min use K^2 ~ t^2 ||u||_1^2 - t^4 ||u||_2^2, with error
    // under ||u||_3^2 t^{6-2s} / (6-2s). t_min also keeps the solver noise
    // (~ solve_tol ||u||_0^2 per evaluation) integrable against eps_abs.
    double t_min = std::pow(eps_abs * (6.0 - 2.0 * s) / norm3_sq, 1.0 / (6.0 - 2.0 * s));
    const double t_noise =
        std::pow(8.0 * solve_tol * norm0_sq / (2.0 * s * eps_abs), 1.0 / (2.0 * s));
    t_min = std::max(t_min, t_noise);
    t_min = std::min(t_min, 0.5 * t_max);
    const double head_err_bound = norm3_sq * std::pow(t_min, 6.0 - 2.0 * s) / (6.0 - 2.0 * s);
    if (head_err_bound > 16.0 * eps_abs)
        throw std::runtime_error(
            "k_norm_quadrature: head truncation cannot reach quad_tol (head error bound " +
            std::to_string(head_err_bound) + " vs budget " + std::to_string(eps_abs) +
            "); the pencil is too stiff for the requested tolerance");
    const double head = norm1_sq * std::pow(t_min, 2.0 - 2.0 * s) / (2.0 - 2.0 * s) -
                        norm2_sq * std::pow(t_min, 4.0 - 2.0 * s) / (4.0 - 2.0 * s);

    auto integrand = [&](double tau) {
        const double t = std::exp(tau);
        const double mid = linalg::dot(
            mu, linalg::cg_shifted_solve(pencil.mass, pencil.stiffness, t, mu, solve_tol));
        const double k_sq = std::max(norm0_sq - mid, 0.0);
        return std::exp(-2.0 * s * tau) * k_sq;
    };

    const double tau_lo = std::log(t_min);
    const double tau_hi = std::log(t_max);
    double total = 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil(tau_hi - tau_lo)));
    const double width = (tau_hi - tau_lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = tau_lo + p * width;
        const double hi = p + 1 == panels ? tau_hi : lo + width;
        total += adaptive_panel(integrand, lo, hi, eps_abs / panels, 0);
    }
    return total + head + tail;
}

MinMaxResult minmax_product(std::span<const double> points, double lo, double hi,
                            std::size_t grid_size) {
    if (!(lo < hi)) throw std::domain_error("minmax_product: need lo < hi");
    const std::size_t grid = std::max<std::size_t>(grid_size, 1000);

    std::vector<double> values(grid);
    double max_value = 0.0;
    for (std::size_t g = 0; g < grid; ++g) {
        const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid - 1);
        double prod = 1.0;
        for (double p : points) prod *= std::abs((1.0 - p * x) / (1.0 + p * x));
        values[g] = prod;
        max_value = std::max(max_value, prod);
    }

    MinMaxResult result;
    result.max_value = max_value;
    // Cluster the grid points within 5% of the maximum; gaps of more than
    // two grid steps separate clusters.
    const double cutoff = 0.95 * max_value;
    std::size_t cluster_best = 0;
    bool in_cluster = false;
    std::size_t last_hit = 0;
    for (std::size_t g = 0; g < grid; ++g) {
        if (values[g] >= cutoff) {
            if (!in_cluster || g > last_hit + 2) {
                if (in_cluster)
                    result.near_extremal_points.push_back(
                        lo + (hi - lo) * static_cast<double>(cluster_best) /
                                 static_cast<double>(grid - 1));
                in_cluster = true;
                cluster_best = g;
            } else if (values[g] > values[cluster_best]) {
                cluster_best = g;
            }
            last_hit = g;
        }
    }
    if (in_cluster)
        result.near_extremal_points.push_back(
            lo + (hi - lo) * static_cast<double>(cluster_best) / static_cast<double>(grid - 1));
    return result;
}

SweepResult error_sweep(const models::Pencil& pencil, std::span<const double> u,
                        const zolotarev::SpectralInterval& interval, const SweepConfig& config) {
    if (config.s_list.empty() || config.r_list.empty())
        throw std::invalid_argument("error_sweep: s_list and r_list must be nonempty");

    const bool use_oracle = config.truth == TruthMode::oracle ||
                            (config.truth == TruthMode::automatic && pencil.n <= 1024);

    const std::vector<double> mu = linalg::spmv(pencil.mass, u);
    const std::vector<double> au = linalg::spmv(pencil.stiffness, u);
    const double norm1 = std::sqrt(std::max(linalg::dot(u, au), 0.0));

    SpectralOracle spectral;
    rbm::ReducedBasis surrogate;
    double norm2 = 0.0;
    if (use_oracle) {
        spectral = full_eig(pencil);
        const std::vector<double> coeff = [&] {
            std::vector<double> c(spectral.eigenvalues.size());
            for (std::size_t k = 0; k < c.size(); ++k)
                c[k] = linalg::dot(spectral.eigenvectors[k], mu);
            return c;
        }();
        for (std::size_t k = 0; k < coeff.size(); ++k) {
            const double lam = spectral.eigenvalues[k];
            norm2 += lam * lam * coeff[k] * coeff[k];
        }
        norm2 = std::sqrt(norm2);
    } else {
        const std::size_t r_star =
            *std::max_element(config.r_list.begin(), config.r_list.end()) +
            config.surrogate_extra;
        surrogate = rbm::build_basis(pencil, u, zolotarev::snapshot_times(interval, r_star),
                                     config.rel_tol, config.drop_tol);
        const std::vector<double> minv_au =
            linalg::cg_shifted_solve(pencil.mass, pencil.stiffness, 0.0, au, 1e-12);
        norm2 = std::sqrt(std::max(linalg::dot(au, minv_au), 0.0));
    }

    // Truth values per s, shared by every r cell.
    std::vector<double> truth_norm_sq(config.s_list.size());
    std::vector<std::vector<double>> truth_action(config.s_list.size());
    for (std::size_t si = 0; si < config.s_list.size(); ++si) {
        const double s = config.s_list[si];
        if (use_oracle) {
            const double h = h_norm_exact(spectral, pencil.mass, u, s);
            truth_norm_sq[si] = h * h;
            truth_action[si] = op_exact(spectral, pencil.mass, u, s);
        } else {
            const double h = rbm::rb_norm(surrogate, s);
            truth_norm_sq[si] = h * h;
            truth_action[si] = rbm::rb_apply(surrogate, pencil, s);
        }
    }

    std::vector<std::size_t> sorted_r = config.r_list;
    std::sort(sorted_r.begin(), sorted_r.end());

    std::vector<std::vector<ErrorRecord>> cells(sorted_r.size());
    parallel::for_each_index(sorted_r.size(), [&](std::size_t ri) {
        const std::size_t r = sorted_r[ri];
        const rbm::ReducedBasis basis =
            rbm::build_basis(pencil, u, zolotarev::snapshot_times(interval, r), config.rel_tol,
                             config.drop_tol);
        cells[ri].resize(config.s_list.size());
        for (std::size_t si = 0; si < config.s_list.size(); ++si) {
            const double s = config.s_list[si];
            ErrorRecord rec;
            rec.r = r;
            rec.s = s;
            const double norm = rbm::rb_norm(basis, s);
            rec.e_norm = norm * norm - truth_norm_sq[si];
            std::vector<double> diff = rbm::rb_apply(basis, pencil, s);
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= truth_action[si][i];
            const std::vector<double> m_diff = linalg::spmv(pencil.mass, diff);
            rec.e_op = std::sqrt(std::max(linalg::dot(diff, m_diff), 0.0));
            rec.norm_u_1 = norm1;
            rec.norm_u_2 = norm2;
            cells[ri][si] = rec;
        }
    });

    SweepResult result;
    result.used_oracle = use_oracle;
    result.e_norm_floor = 1e2 * config.rel_tol * norm1 * norm1;
    result.e_op_floor = 1e2 * config.rel_tol * norm2;
    for (std::size_t si = 0; si < config.s_list.size(); ++si)
        for (std::size_t ri = 0; ri < sorted_r.size(); ++ri)
            result.records.push_back(cells[ri][si]);
    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const ErrorRecord& a, const ErrorRecord& b) {
                         if (a.s != b.s) return a.s < b.s;
                         return a.r < b.r;
                     });
    return result;
}

double fit_rate(std::span<const ErrorRecord> records, ErrorField field, double floor) {
    std::vector<double> rs, logs;
    for (const ErrorRecord& rec : records) {
        const double e = field == ErrorField::norm ? rec.e_norm : rec.e_op;
        if (!(e > floor)) continue;
        rs.push_back(static_cast<double>(rec.r));
        logs.push_back(std::log(e));
    }
    if (rs.size() < 4)
        throw std::runtime_error("fit_rate: only " + std::to_string(rs.size()) +
                                 " records above the floor " + std::to_string(floor) +
                                 ", need at least 4");
    const double n = static_cast<double>(rs.size());
    double mean_r = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        mean_r += rs[i];
        mean_y += logs[i];
    }
    mean_r /= n;
    mean_y /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        num += (rs[i] - mean_r) * (logs[i] - mean_y);
        den += (rs[i] - mean_r) * (rs[i] - mean_r);
    }
    if (den == 0.0) throw std::runtime_error("fit_rate: degenerate r range");
    return -num / den;
}

} // namespace fracrb::oracle
