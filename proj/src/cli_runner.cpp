#include "fracrb/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "fracrb/linalg.hpp"
#include "fracrb/models.hpp"
#include "fracrb/oracle.hpp"
#include "fracrb/rbm.hpp"
#include "fracrb/specfun.hpp"
#include "fracrb/zolotarev.hpp"

namespace fracrb::cli {

namespace {

std::string fmt17(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

struct Problem {
    models::Pencil pencil;
    std::vector<double> u;
};

Problem build_problem(const RunConfig& config) {
    Problem problem;
    if (config.problem == "laplace1d") {
        if (config.n == 0) throw std::invalid_argument("laplace1d requires --n");
        problem.pencil = models::laplace_1d_fem(config.n);
    } else if (config.problem == "laplace2d") {
        if (config.n == 0) throw std::invalid_argument("laplace2d requires --n");
        problem.pencil = models::laplace_2d_fd(config.n);
    } else if (config.problem == "diagonal") {
        if (config.spectrum.empty()) throw std::invalid_argument("diagonal requires --spectrum");
        std::vector<double> values;
        if (config.spectrum.rfind("list:", 0) == 0) {
            values = parse_double_list(config.spectrum.substr(5));
        } else if (config.spectrum.rfind("unitsquare:", 0) == 0) {
            values = models::unit_square_spectrum(std::stod(config.spectrum.substr(11)));
        } else {
            throw std::invalid_argument("unknown spectrum spec '" + config.spectrum +
                                        "' (expected list:... or unitsquare:BOUND)");
        }
        std::sort(values.begin(), values.end());
        problem.pencil = models::synthetic_diagonal(values);
    } else if (config.problem == "matrixmarket") {
        if (config.matrix_m.empty() || config.matrix_a.empty())
            throw std::invalid_argument("matrixmarket requires --matrix-m and --matrix-a");
        problem.pencil = models::load_matrix_market(config.matrix_m, config.matrix_a);
    } else {
        throw std::invalid_argument("unknown problem '" + config.problem +
                                    "' (expected laplace1d, laplace2d, diagonal, matrixmarket)");
    }

    if (config.active > 0) {
        problem.u = models::random_combination(problem.pencil, config.active, config.seed);
    } else {
        problem.u = models::random_coefficients(problem.pencil.n, config.seed);
    }
    return problem;
}

zolotarev::SpectralInterval resolve_interval(const RunConfig& config,
                                             const models::Pencil& pencil) {
    double lo = config.lambda_l;
    double hi = config.lambda_u;
    if (lo <= 0.0) lo = linalg::lambda_min_estimate(pencil.mass, pencil.stiffness, 1e-5);
    if (hi <= 0.0) hi = linalg::lambda_max_estimate(pencil.mass, pencil.stiffness, 1e-5);
    return {lo, hi};
}

std::ostream& open_or_stdout(const std::string& path, std::ofstream& file, std::ostream& fallback) {
    if (path.empty()) return fallback;
    file.open(path);
    if (!file) throw std::runtime_error("cannot write output file '" + path + "'");
    return file;
}

} // namespace

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t used = 0;
        values.push_back(std::stod(item, &used));
        if (used != item.size())
            throw std::invalid_argument("malformed number '" + item + "' in list");
    }
    if (values.empty()) throw std::invalid_argument("empty value list");
    return values;
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
    std::vector<std::size_t> values;
    if (text.find(':') != std::string::npos) {
        const auto sep = text.find(':');
        const long lo = std::stol(trim(text.substr(0, sep)));
        const long hi = std::stol(trim(text.substr(sep + 1)));
        if (lo < 0 || hi < lo) throw std::invalid_argument("bad range '" + text + "'");
        for (long v = lo; v <= hi; ++v) values.push_back(static_cast<std::size_t>(v));
        return values;
    }
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const long v = std::stol(item);
        if (v < 0) throw std::invalid_argument("negative index in '" + text + "'");
        values.push_back(static_cast<std::size_t>(v));
    }
    if (values.empty()) throw std::invalid_argument("empty index list");
    return values;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "problem") config.problem = value;
        else if (key == "n") config.n = std::stoul(value);
        else if (key == "spectrum") config.spectrum = value;
        else if (key == "matrix-m") config.matrix_m = value;
        else if (key == "matrix-a") config.matrix_a = value;
        else if (key == "seed") config.seed = std::stoull(value);
        else if (key == "active") config.active = std::stoul(value);
        else if (key == "s") config.s_values = parse_double_list(value);
        else if (key == "r") config.r_values = parse_index_list(value);
        else if (key == "lambda-l") config.lambda_l = std::stod(value);
        else if (key == "lambda-u") config.lambda_u = std::stod(value);
        else if (key == "delta") config.delta = std::stod(value);
        else if (key == "rel-tol") config.rel_tol = std::stod(value);
        else if (key == "quad-tol") config.quad_tol = std::stod(value);
        else if (key == "out") config.out = value;
        else if (key == "action-out") config.action_out = value;
        else
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
    }
    return config;
}

int run_points(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::size_t r = 0;
    if (config.r_values.size() != 1)
        throw std::invalid_argument("points needs exactly one --r value");
    r = config.r_values.front();
    if (r == 0) throw std::invalid_argument("points needs r >= 1");

    std::vector<double> z, zhat;
    if (config.delta > 0.0) {
        z = zolotarev::zolotarev_points(config.delta, r);
        zhat = z; // transformed onto [delta, 1] itself
    } else if (config.lambda_l > 0.0 && config.lambda_u > 0.0) {
        const zolotarev::SpectralInterval interval(config.lambda_l, config.lambda_u);
        z = zolotarev::zolotarev_points(interval.delta(), r);
        zhat = zolotarev::transformed_points(1.0 / interval.lambda_u_sq,
                                             1.0 / interval.lambda_l_sq, r);
    } else {
        throw std::invalid_argument("points needs --delta or both --lambda-l and --lambda-u");
    }

    std::ofstream file;
    std::ostream& sink = open_or_stdout(config.out, file, out);
    sink << "j Z Zhat t\n";
    sink << "0 - - 0\n";
    for (std::size_t j = 0; j < r; ++j)
        sink << (j + 1) << " " << fmt17(z[j]) << " " << fmt17(zhat[j]) << " "
             << fmt17(std::sqrt(zhat[j])) << "\n";
    (void)err;
    return kOk;
}

int run_apply(const RunConfig& config, std::ostream& out, std::ostream& err) {
    if (config.s_values.empty()) throw std::invalid_argument("apply needs --s");
    if (config.r_values.size() != 1)
        throw std::invalid_argument("apply needs exactly one --r value");

    const Problem problem = build_problem(config);
    const zolotarev::SpectralInterval interval = resolve_interval(config, problem.pencil);
    const auto results = rbm::rb_eval_many(problem.pencil, problem.u, interval,
                                           config.r_values.front(), config.s_values,
                                           config.rel_tol);

    std::ofstream file;
    std::ostream& sink = open_or_stdout(config.out, file, out);
    sink << "s,norm,kept,exact\n";
    const rbm::ReducedBasis probe = rbm::build_basis(
        problem.pencil, problem.u,
        zolotarev::snapshot_times(interval, config.r_values.front()), config.rel_tol);
    for (const auto& result : results)
        sink << fmt17(result.s) << "," << fmt17(result.norm_value) << "," << probe.kept() << ","
             << (result.exact ? 1 : 0) << "\n";
    err << "kept = " << probe.kept() << ", exact = " << (probe.exact ? "yes" : "no") << "\n";

    if (!config.action_out.empty()) {
        std::ofstream action_file(config.action_out);
        if (!action_file)
            throw std::runtime_error("cannot write action file '" + config.action_out + "'");
        for (const auto& result : results) {
            action_file << "# s = " << fmt17(result.s) << "\n";
            for (double v : result.action) action_file << fmt17(v) << "\n";
        }
    }
    return kOk;
}

int run_convergence(const RunConfig& config, std::ostream& out, std::ostream& err) {
    if (config.s_values.empty()) throw std::invalid_argument("convergence needs --s");
    if (config.r_values.empty()) throw std::invalid_argument("convergence needs --r");

    const Problem problem = build_problem(config);
    const zolotarev::SpectralInterval interval = resolve_interval(config, problem.pencil);

    oracle::SweepConfig sweep;
    sweep.s_list = config.s_values;
    sweep.r_list = config.r_values;
    sweep.rel_tol = config.rel_tol;
    const oracle::SweepResult result = oracle::error_sweep(problem.pencil, problem.u, interval,
                                                           sweep);

    const double rate_constant = specfun::cstar(interval.delta());

    std::ofstream file;
    std::ostream& sink = open_or_stdout(config.out, file, out);
    sink << "s,r,e_norm,e_op,norm_u_1,norm_u_2,cstar,fitted_rate\n";
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const oracle::ErrorRecord& rec = result.records[i];
        const bool last_of_s =
            i + 1 == result.records.size() || result.records[i + 1].s != rec.s;
        std::string fitted;
        if (last_of_s) {
            std::vector<oracle::ErrorRecord> block;
            for (const auto& other : result.records)
                if (other.s == rec.s) block.push_back(other);
            try {
                fitted = fmt17(
                    oracle::fit_rate(block, oracle::ErrorField::norm, result.e_norm_floor));
            } catch (const std::exception& e) {
                err << "warning: rate fit for s = " << rec.s << " unavailable: " << e.what()
                    << "\n";
            }
        }
        sink << fmt17(rec.s) << "," << rec.r << "," << fmt17(rec.e_norm) << ","
             << fmt17(rec.e_op) << "," << fmt17(rec.norm_u_1) << "," << fmt17(rec.norm_u_2)
             << "," << fmt17(rate_constant) << "," << fitted << "\n";
    }
    return kOk;
}

namespace {

class VerifyReport {
  public:
    VerifyReport(std::ostream& out) : out_(out) {}

    void check(const std::string& name, double observed, double expected, double tol) {
        const bool ok = std::abs(observed - expected) <= tol;
        all_ok_ &= ok;
        out_ << (ok ? "PASS " : "FAIL ") << name << ": observed " << fmt17(observed)
             << ", expected " << fmt17(expected) << " (tol " << tol << ")\n";
    }

    void check_true(const std::string& name, bool ok, const std::string& detail = "") {
        all_ok_ &= ok;
        out_ << (ok ? "PASS " : "FAIL ") << name;
        if (!detail.empty()) out_ << ": " << detail;
        out_ << "\n";
    }

    bool all_ok() const { return all_ok_; }

  private:
    std::ostream& out_;
    bool all_ok_ = true;
};

// Adaptive Simpson for the verify suite's independent K(k) quadrature.
double simpson(const std::function<double(double)>& f, double lo, double hi, double tol,
               int depth) {
    const double mid = 0.5 * (lo + hi);
    const double h = hi - lo;
    const double coarse = h / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
    const double lm = 0.5 * (lo + mid), mh = 0.5 * (mid + hi);
    const double fine = h / 12.0 * (f(lo) + 4.0 * f(lm) + 2.0 * f(mid) + 4.0 * f(mh) + f(hi));
    if (std::abs(fine - coarse) < 15.0 * tol || depth > 30) return fine;
    return simpson(f, lo, mid, 0.5 * tol, depth + 1) + simpson(f, mid, hi, 0.5 * tol, depth + 1);
}

void verify_specfun(VerifyReport& report) {
    const double pi = 3.14159265358979323846;
    report.check("gamma(0.5) = sqrt(pi)", specfun::gamma(0.5), std::sqrt(pi), 1e-14);
    report.check("gamma(1) = 1", specfun::gamma(1.0), 1.0, 1e-15);
    report.check("gamma(1.5) = sqrt(pi)/2", specfun::gamma(1.5), 0.5 * std::sqrt(pi), 1e-14);
    report.check("ellipk(0) = pi/2", specfun::ellipk(0.0), 0.5 * pi, 1e-15);
    for (double k : {0.1, 0.5, 0.9, 0.99, 0.999}) {
        const auto integrand = [k](double theta) {
            const double st = std::sin(theta);
            return 1.0 / std::sqrt(1.0 - k * k * st * st);
        };
        const double quad = simpson(integrand, 0.0, 0.5 * pi, 1e-13, 0);
        report.check("ellipk vs quadrature, k = " + std::to_string(k), specfun::ellipk(k), quad,
                     1e-10 * quad);
    }
    for (double k : {0.3, 0.5, 0.9, 0.99}) {
        const double quarter = specfun::ellipk(k);
        const double kprime = std::sqrt((1.0 - k) * (1.0 + k));
        report.check("dn(0) = 1, k = " + std::to_string(k), specfun::jacobi_dn(0.0, k), 1.0,
                     1e-14);
        report.check("dn(K) = k', k = " + std::to_string(k), specfun::jacobi_dn(quarter, k),
                     kprime, 1e-12);
        report.check("dn(K/2) = sqrt(k'), k = " + std::to_string(k),
                     specfun::jacobi_dn(0.5 * quarter, k), std::sqrt(kprime), 1e-12);
        // dn^2 + k^2 sn^2 = 1 along the quarter period.
        double worst = 0.0;
        for (int i = 0; i <= 50; ++i) {
            const auto j = specfun::detail::jacobi_elliptic(quarter * i / 50.0, k);
            worst = std::max(worst, std::abs(j.dn * j.dn + k * k * j.sn * j.sn - 1.0));
        }
        report.check_true("dn/sn identity on [0,K], k = " + std::to_string(k), worst <= 1e-10,
                          "max deviation " + fmt17(worst));
    }
    for (double s : {0.1, 0.25, 0.5, 0.75, 0.9})
        report.check("d_s(s) d_s(1-s) = 1, s = " + std::to_string(s),
                     specfun::d_s(s) * specfun::d_s(1.0 - s), 1.0, 1e-12);
    report.check("c_s(0.5) = sqrt(2/pi)", specfun::c_s(0.5), std::sqrt(2.0 / pi), 1e-14);
    double prev = 0.0;
    bool monotone = true;
    for (double delta : {1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 0.9}) {
        const double value = specfun::cstar(delta);
        if (value <= prev) monotone = false;
        prev = value;
    }
    report.check_true("cstar monotone increasing in delta", monotone);
    const double ratio = specfun::cstar(1e-8) / specfun::cstar(1e-4);
    report.check_true("cstar asymptotic halving 1e-8 vs 1e-4",
                      std::abs(ratio - 0.5) <= 0.15 * 0.5, "ratio " + fmt17(ratio));
}

void verify_zolotarev(VerifyReport& report) {
    for (double delta : {1e-2, 1e-4, 1e-6}) {
        const double rate = specfun::cstar(delta);
        bool bounded = true;
        std::string detail;
        for (std::size_t r = 1; r <= 20; ++r) {
            // Points on sigma_inv = [1, 1/delta] against x in sigma = [delta, 1].
            // The envelope is sharp; 1e-7 relative slack covers float noise.
            const auto points = zolotarev::transformed_points(1.0, 1.0 / delta, r);
            const auto mm = oracle::minmax_product(points, delta, 1.0, 100000);
            const double bound = 2.0 * std::exp(-rate * static_cast<double>(r)) * (1.0 + 1e-7);
            if (mm.max_value > bound) {
                bounded = false;
                detail = "r = " + std::to_string(r) + ": " + fmt17(mm.max_value) + " > " +
                         fmt17(bound);
                break;
            }
        }
        report.check_true("min-max bound 2e^{-C*r}, delta = " + fmt17(delta), bounded, detail);
    }
    report.check("r = 1 point is sqrt(delta)", zolotarev::zolotarev_points(0.01, 1).front(), 0.1,
                 1e-12);
    const auto points = zolotarev::zolotarev_points(1e-3, 9);
    bool sym = true;
    for (std::size_t j = 0; j < points.size(); ++j)
        if (std::abs(points[j] * points[points.size() - 1 - j] - 1e-3) > 1e-8) sym = false;
    report.check_true("product symmetry Z_j Z_{r+1-j} = delta", sym);
    const auto mm = oracle::minmax_product(zolotarev::transformed_points(1.0, 1e2, 6), 1e-2, 1.0,
                                           100000);
    report.check_true("alternance count >= r+1",
                      mm.near_extremal_points.size() >= 7,
                      std::to_string(mm.near_extremal_points.size()) + " clusters");
}

void verify_equivalence(VerifyReport& report) {
    models::detail::SplitMix64 rng(20240915u);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t n = 8 + 6 * static_cast<std::size_t>(trial);
        const models::Pencil pencil = trial % 2 == 0 ? models::laplace_1d_fem(n)
                                                     : models::laplace_2d_fd(3 + trial / 2);
        std::vector<double> u(pencil.n);
        for (double& v : u) v = rng.uniform_symmetric();
        const double s = 0.1 + 0.8 * (0.5 * (rng.uniform_symmetric() + 1.0));
        const oracle::SpectralOracle spectral = oracle::full_eig(pencil);
        const double h = oracle::h_norm_exact(spectral, pencil.mass, u, s);
        const double k = std::sqrt(oracle::k_norm_quadrature(pencil, u, s, 1e-8));
        report.check("C_s K-norm = H-norm, trial " + std::to_string(trial),
                     specfun::c_s(s) * k, h, 1e-5 * h);
    }
}

} // namespace

int run_verify(const std::string& suite, std::ostream& out, std::ostream& err) {
    VerifyReport report(out);
    bool known = false;
    if (suite == "specfun" || suite == "all") {
        verify_specfun(report);
        known = true;
    }
    if (suite == "zolotarev" || suite == "all") {
        verify_zolotarev(report);
        known = true;
    }
    if (suite == "equivalence" || suite == "all") {
        verify_equivalence(report);
        known = true;
    }
    if (!known) {
        err << "unknown verify suite '" << suite
            << "' (expected specfun, zolotarev, equivalence, all)\n";
        return kUsageError;
    }
    return report.all_ok() ? kOk : kVerifyFailure;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Fractional norms and operator powers by reduced-basis projection"};
    app.require_subcommand(1);

    std::string config_path, s_text, r_text, suite;
    RunConfig flags;
    bool have_config = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key = value config file");
        cmd->add_option("--problem", flags.problem,
                        "laplace1d | laplace2d | diagonal | matrixmarket");
        cmd->add_option("--n", flags.n, "grid parameter");
        cmd->add_option("--spectrum", flags.spectrum, "list:v1,v2,... or unitsquare:BOUND");
        cmd->add_option("--matrix-m", flags.matrix_m, "Matrix Market mass file");
        cmd->add_option("--matrix-a", flags.matrix_a, "Matrix Market stiffness file");
        cmd->add_option("--seed", flags.seed, "random seed");
        cmd->add_option("--active", flags.active, "active eigenmodes (0: nodal coefficients)");
        cmd->add_option("--s", s_text, "comma list of exponents");
        cmd->add_option("--r", r_text, "comma list or range a:b");
        cmd->add_option("--lambda-l", flags.lambda_l, "lower spectral bound (0: estimate)");
        cmd->add_option("--lambda-u", flags.lambda_u, "upper spectral bound (0: estimate)");
        cmd->add_option("--delta", flags.delta, "spectral ratio for points");
        cmd->add_option("--rel-tol", flags.rel_tol, "solver relative tolerance");
        cmd->add_option("--quad-tol", flags.quad_tol, "quadrature tolerance");
        cmd->add_option("--out", flags.out, "output file (default stdout)");
        cmd->add_option("--action-out", flags.action_out, "action vector file");
        return cmd;
    };

    CLI::App* points = add_common(app.add_subcommand("points", "print Zolotarev point table"));
    CLI::App* apply = add_common(app.add_subcommand("apply", "evaluate norms and actions"));
    CLI::App* convergence =
        add_common(app.add_subcommand("convergence", "run an error sweep, emit CSV"));
    CLI::App* verify = app.add_subcommand("verify", "run an invariant suite");
    verify->add_option("suite", suite, "specfun | zolotarev | equivalence | all")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        RunConfig config;
        if (!config_path.empty()) {
            config = load_config_file(config_path);
            have_config = true;
        }
        // Flags override config-file values.
        auto merge = [&](CLI::App* cmd) {
            if (!have_config) config = flags;
            auto set_if = [&](const char* name, auto member) {
                if (cmd->count(name) > 0) config.*member = flags.*member;
            };
            if (have_config) {
                set_if("--problem", &RunConfig::problem);
                set_if("--n", &RunConfig::n);
                set_if("--spectrum", &RunConfig::spectrum);
                set_if("--matrix-m", &RunConfig::matrix_m);
                set_if("--matrix-a", &RunConfig::matrix_a);
                set_if("--seed", &RunConfig::seed);
                set_if("--active", &RunConfig::active);
                set_if("--lambda-l", &RunConfig::lambda_l);
                set_if("--lambda-u", &RunConfig::lambda_u);
                set_if("--delta", &RunConfig::delta);
                set_if("--rel-tol", &RunConfig::rel_tol);
                set_if("--quad-tol", &RunConfig::quad_tol);
                set_if("--out", &RunConfig::out);
                set_if("--action-out", &RunConfig::action_out);
            }
            if (cmd->count("--s") > 0 || !have_config) {
                if (!s_text.empty()) config.s_values = parse_double_list(s_text);
            }
            if (cmd->count("--r") > 0 || !have_config) {
                if (!r_text.empty()) config.r_values = parse_index_list(r_text);
            }
        };

        if (points->parsed()) {
            merge(points);
            return run_points(config, std::cout, std::cerr);
        }
        if (apply->parsed()) {
            merge(apply);
            return run_apply(config, std::cout, std::cerr);
        }
        if (convergence->parsed()) {
            merge(convergence);
            return run_convergence(config, std::cout, std::cerr);
        }
        if (verify->parsed()) return run_verify(suite, std::cout, std::cerr);
        std::cerr << "no subcommand given\n";
        return kUsageError;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const linalg::SolveFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    }
}

} // namespace fracrb::cli
