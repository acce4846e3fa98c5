#pragma once

#include <iosfwd>
#include <string>

#include "slk/spectral.hpp"

namespace slk {

/// Invalid configuration input (file syntax, unknown names, bad values).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A catalogued test problem, interval already shifted to start at 0.
struct BuiltinProblem {
    std::string name;
    Interval interval;
    std::function<Complex(double)> q;
    BoundaryCondition left, right;
    std::function<Complex(Complex)> nonlocal; // null for local conditions
    bool well = false;                        // bound-state problem
};

/// Looks up `name` or `name(arg, ...)` with constant arguments. Catalog:
/// paine1, paine2, coffey_evans(beta), complex_const(c), chanane,
/// square_well(U, a), sech2(m, a). Throws config_error.
BuiltinProblem builtin_problem(const std::string& spec);

std::vector<std::string> builtin_names();

/// Solver settings shared by all commands.
struct RunConfig {
    int M = 256;          // potential sampling nodes
    int N = 30;           // kernel order
    int K = 0;            // series truncation; 0 means 2N
    int count = 10;       // requested eigenvalues
    bool complex_mode = false;
    Complex shift = 0;
    std::string format = "csv"; // csv | json
    std::string out;            // output path; empty writes stdout

    /// Enforces N >= 1 and the resolution floor M >= 2N + 8.
    void validate() const;
};

/// One job read from a config file: the problem and how to run it.
struct JobConfig {
    std::string builtin;      // exactly one of these three is set
    std::string expression;
    std::string samples_file;
    Interval interval{0, 0};  // ignored for builtins
    std::string bc_left = "dirichlet", bc_right = "dirichlet";
    std::string eta;          // optional nonlocal coefficient, in omega
    RunConfig run;
};

/// Sections [problem], [run], [output] with key = value lines; values may
/// be quoted. Throws config_error with the offending line number.
JobConfig parse_config(std::istream& in);

/// Keyword "dirichlet" / "neumann", or "alpha, beta" where each part is a
/// constant or an expression in omega.
BoundaryCondition parse_boundary(const std::string& text);

/// "a,b" with constant-expression endpoints, a < b.
Interval parse_interval(const std::string& text);

/// Strictly increasing abscissas spanning the interval, interpolated to
/// Chebyshev nodes by a natural cubic spline.
ChebyshevExpansion potential_from_samples(std::istream& in, int M);

/// Builds the spectral problem a job describes: samples the potential at
/// M Chebyshev nodes (interval shifted to start at 0), applies the shift.
struct AssembledJob {
    SpectralProblem problem;
    bool well = false;
    RunConfig run;
};
AssembledJob assemble(const JobConfig& job);

/// Result tables at 17 significant digits. CSV header:
/// index,lambda_re,lambda_im,omega_re,omega_im,residual,method
std::string format_csv(const EigenResult& result);
std::string format_json(const EigenResult& result, const RunConfig& run, int M,
                        double runtime_ms);

} // namespace slk
