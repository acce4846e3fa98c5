#pragma once

#include <functional>
#include <string>

#include "slk/nsbf.hpp"

namespace slk {

/// Boundary coefficients alpha u + beta u' = 0 as functions of
/// omega = sqrt(lambda); constants are constant functions.
struct BoundaryCondition {
    std::function<Complex(Complex)> alpha, beta;

    static BoundaryCondition dirichlet();
    static BoundaryCondition neumann();
    static BoundaryCondition robin(Complex alpha, Complex beta);
};

/// A boundary-value problem together with its solution basis.
struct SpectralProblem {
    std::shared_ptr<const SolutionBasis> basis;
    BoundaryCondition left, right;
    /// Optional nonlocal coupling: eta(omega) * beta_left(omega) is added
    /// to the characteristic function, covering conditions of the shape
    /// u(0) + mu(omega) u(b) = 0.
    std::function<Complex(Complex)> nonlocal;
    Complex shift = 0;          // reported eigenvalues are omega^2 - shift
    ChebyshevExpansion q;       // potential the basis was built for
};

/// Full pipeline: particular solution, formal powers, kernel fit, basis.
SpectralProblem make_problem(const ChebyshevExpansion& q, BoundaryCondition left,
                             BoundaryCondition right, int N);

struct EigenResult {
    std::vector<Complex> eigenvalues, omegas; // aligned, sorted by (Re, Im)
    std::vector<double> residuals;            // |Phi| at convergence
    std::vector<std::string> method;          // "spps" or "phiN"
    std::vector<bool> cluster;                // closer than resolvable spacing
    std::vector<bool> converged;              // refinement converged
    double eps1 = 0, eps2 = 0;                // kernel fit errors echoed
    int shortfall = 0;                        // requested minus found
    std::vector<std::string> warnings;
};

/// Characteristic function whose zeros (squared, shift undone) are the
/// eigenvalues. Pure; throws std::invalid_argument when a boundary
/// condition degenerates at the probed omega.
Complex char_function(const SpectralProblem& problem, Complex omega);

enum class ScanMode { RealScan, Complex };

/// Locates the first `count` eigenvalues. RealScan brackets sign changes
/// of the (real-valued) characteristic function on a quarter-spacing
/// grid; Complex seeds secant iterations at asymptotic guesses. Both
/// merge with the series-polynomial roots near the origin.
EigenResult find_eigenvalues(const SpectralProblem& problem, int count, ScanMode mode);

/// Eigenfunction beta0 c(omega,x) - (alpha0 + beta0 h) s(omega,x) at the
/// given abscissas.
std::vector<Complex> eigenfunction(const SpectralProblem& problem, Complex lambda,
                                   std::span<const double> xs);

/// Bound states of the well problem with decaying exterior: scans the
/// half-line matching condition over beta in (0, sqrt(max(-q))) and
/// reports lambda = -beta^2. Empty result when q >= 0.
EigenResult quantum_well(const SpectralProblem& problem);

/// Rebuilds the problem for potential q + lambda_star; eigenvalue output
/// is unshifted automatically.
SpectralProblem spectral_shift(const SpectralProblem& problem, Complex lambda_star);

} // namespace slk
