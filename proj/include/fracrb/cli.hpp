#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fracrb::cli {

/// One batch run. Defaults mirror the command-line defaults; a config file
/// (line-oriented "key = value", '#' comments) fills fields first and
/// explicit flags override it.
struct RunConfig {
    std::string problem;        ///< laplace1d | laplace2d | diagonal | matrixmarket
    std::size_t n = 0;          ///< grid parameter for the laplace problems
    std::string spectrum;       ///< diagonal: "list:v1,v2,..." or "unitsquare:BOUND"
    std::string matrix_m;       ///< matrixmarket: mass file
    std::string matrix_a;       ///< matrixmarket: stiffness file
    std::uint64_t seed = 1;
    std::size_t active = 0;     ///< 0: seeded nodal coefficients; >0: eigen-combination
    std::vector<double> s_values;
    std::vector<std::size_t> r_values;
    double lambda_l = 0.0;      ///< 0 = estimate
    double lambda_u = 0.0;      ///< 0 = estimate
    double delta = 0.0;         ///< points subcommand only
    double rel_tol = 1e-12;
    double quad_tol = 1e-8;
    std::string out;            ///< CSV destination; empty = stdout
    std::string action_out;     ///< optional action-vector destination
};

/// Exit codes shared by all subcommands.
enum ExitCode : int {
    kOk = 0,
    kVerifyFailure = 1,
    kUsageError = 2,
    kNumericalError = 3,
};

RunConfig load_config_file(const std::string& path);

/// Parses "0.25,0.5,0.75".
std::vector<double> parse_double_list(const std::string& text);
/// Parses "1,2,5" or the inclusive range "a:b".
std::vector<std::size_t> parse_index_list(const std::string& text);

int run_points(const RunConfig& config, std::ostream& out, std::ostream& err);
int run_apply(const RunConfig& config, std::ostream& out, std::ostream& err);
int run_convergence(const RunConfig& config, std::ostream& out, std::ostream& err);
int run_verify(const std::string& suite, std::ostream& out, std::ostream& err);

/// Full command-line entry point (argument parsing plus dispatch).
int main_entry(int argc, char** argv);

} // namespace fracrb::cli
