#include "slk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace slk {

namespace {

constexpr double kUnitRoundoff = 2.220446049250313e-16;
constexpr double kResidualFactor = 1e-8; // acceptance: |Phi| below this times local scale
constexpr double kClusterFactor = 1e3;   // cluster flag spacing, in units of u*|omega|

struct Root {
    Complex lambda, omega;
    double residual = 0;
    bool converged = true;
    bool cluster = false;
    std::string method = "phiN";
};

Complex principal_sqrt(Complex z) {
    Complex w = std::sqrt(z);
    if (w.real() < 0 || (w.real() == 0 && w.imag() < 0)) w = -w;
    return w;
}

bool is_constant(const std::function<Complex(Complex)>& f) {
    return std::abs(f(Complex(1.0)) - f(Complex(2.5, 0.7))) == 0.0;
}

/// Safeguarded secant inside a sign-change bracket; falls back to
/// bisection whenever the secant step leaves the bracket.
struct BracketResult {
    double root = 0;
    bool converged = false;
};
BracketResult refine_bracket(const std::function<double(double)>& f, double lo, double hi,
                             double flo, double fhi) {
    double x0 = lo, x1 = hi, f0 = flo, f1 = fhi;
    for (int it = 0; it < 60; ++it) {
        double x2;
        if (f1 != f0) {
            x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            if (!(x2 > lo && x2 < hi)) x2 = 0.5 * (lo + hi);
        } else {
            x2 = 0.5 * (lo + hi);
        }
        double f2 = f(x2);
        if (f2 == 0.0) return {x2, true};
        if ((f2 > 0) == (flo > 0)) {
            lo = x2;
            flo = f2;
        } else {
            hi = x2;
            fhi = f2;
        }
        if (std::abs(x2 - x1) <= 1e-13 * std::max(1.0, std::abs(x2))) return {x2, true};
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
    }
    return {0.5 * (lo + hi), false};
}

struct ComplexRootResult {
    Complex root;
    bool converged = false;
};
ComplexRootResult refine_secant(const std::function<Complex(Complex)>& f, Complex z0, Complex z1) {
    Complex f0 = f(z0), f1 = f(z1);
    for (int it = 0; it < 60; ++it) {
        Complex denom = f1 - f0;
        if (denom == Complex(0.0)) break;
        Complex z2 = z1 - f1 * (z1 - z0) / denom;
        if (!std::isfinite(z2.real()) || !std::isfinite(z2.imag())) break;
        Complex f2 = f(z2);
        if (std::abs(z2 - z1) <= 1e-13 * (1.0 + std::abs(z2))) return {z2, true};
        z0 = z1;
        f0 = f1;
        z1 = z2;
        f1 = f2;
    }
    return {z1, false};
}

/// Roots of the truncated series characteristic polynomial, trusted near
/// the origin only; used to replace the nearby scan roots.
std::vector<Complex> series_roots_near_origin(const SpectralProblem& p) {
    if (p.nonlocal) return {};
    if (!is_constant(p.left.alpha) || !is_constant(p.left.beta) || !is_constant(p.right.alpha) ||
        !is_constant(p.right.beta))
        return {};
    ConstantBc bc{p.left.alpha(Complex(1.0)), p.left.beta(Complex(1.0)),
                  p.right.alpha(Complex(1.0)), p.right.beta(Complex(1.0))};
    const auto& table = p.basis->table();
    const double b = table.interval().hi;
    const int K = std::min(60, 2 * p.basis->kernel().N);
    const double radius = std::pow(K / (std::numbers::e * b), 2);
    try {
        return spps_char_roots(table, bc, K, radius);
    } catch (const std::exception&) {
        return {};
    }
}

/// Replaces scan roots near the origin by the series-polynomial roots:
/// below the crossing point of the two sets the series values win.
void merge_series_roots(std::vector<Root>& roots, const std::vector<Complex>& series) {
    if (series.empty() || roots.empty()) return;
    double best = std::numeric_limits<double>::infinity();
    double thresh = 0;
    for (const auto& s : series)
        for (const auto& r : roots) {
            double d = std::abs(s - r.lambda);
            if (d < best) {
                best = d;
                thresh = std::abs(s);
            }
        }
    for (const auto& s : series) {
        if (std::abs(s) > thresh * (1 + 1e-12)) continue;
        size_t nearest = 0;
        double dmin = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < roots.size(); ++i) {
            double d = std::abs(s - roots[i].lambda);
            if (d < dmin) {
                dmin = d;
                nearest = i;
            }
        }
        // Only replace what is plausibly the same eigenvalue.
        if (dmin <= 0.05 * (1.0 + std::abs(s))) {
            roots[nearest].lambda = s;
            roots[nearest].omega = principal_sqrt(s);
            roots[nearest].method = "spps";
        }
    }
}

void flag_clusters(std::vector<Root>& roots) {
    for (size_t i = 0; i + 1 < roots.size(); ++i) {
        double gap = std::abs(roots[i + 1].omega - roots[i].omega);
        double tol = kClusterFactor * kUnitRoundoff *
                     std::max(1.0, std::abs(roots[i].omega));
        if (gap < tol) {
            roots[i].cluster = true;
            roots[i + 1].cluster = true;
        }
    }
}

EigenResult assemble(std::vector<Root> roots, const SpectralProblem& p, int count) {
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });
    flag_clusters(roots);
    if (static_cast<int>(roots.size()) > count) roots.resize(count);

    EigenResult out;
    out.eps1 = p.basis->kernel().eps1;
    out.eps2 = p.basis->kernel().eps2;
    for (const auto& r : roots) {
        out.eigenvalues.push_back(r.lambda);
        out.omegas.push_back(r.omega);
        out.residuals.push_back(r.residual);
        out.method.push_back(r.method);
        out.cluster.push_back(r.cluster);
        out.converged.push_back(r.converged);
        if (!r.converged)
            out.warnings.push_back("refinement did not converge near omega = " +
                                   std::to_string(r.omega.real()));
    }
    out.shortfall = std::max(0, count - static_cast<int>(roots.size()));
    if (out.shortfall > 0)
        out.warnings.push_back("found " + std::to_string(roots.size()) + " of " +
                               std::to_string(count) + " requested eigenvalues");
    return out;
}

std::vector<Root> real_scan_roots(const SpectralProblem& p, double omega_max) {
    const double b = p.basis->interval().hi;
    const double step = std::numbers::pi / (4 * b);
    // For Dirichlet-type conditions the scanned object is omega * Phi,
    // the entire function whose real zeros are exactly the eigenvalues.
    const bool weight = std::abs(p.left.beta(Complex(1.0))) == 0.0 &&
                        std::abs(p.right.beta(Complex(1.0))) == 0.0;
    auto scan_fn = [&](double w) {
        Complex phi = char_function(p, w);
        return (weight ? w * phi : phi).real();
    };

    std::vector<Root> roots;
    double prev_x = step, prev_f = scan_fn(prev_x);
    for (double x = 2 * step; x <= omega_max + 0.5 * step; x += step) {
        double fx = scan_fn(x);
        if (fx == 0.0) {
            Root r;
            r.omega = x;
            r.residual = std::abs(char_function(p, x));
            roots.push_back(r);
        } else if ((fx > 0) != (prev_f > 0)) {
            auto ref = refine_bracket(scan_fn, prev_x, x, prev_f, fx);
            Root r;
            r.omega = ref.root;
            r.converged = ref.converged;
            r.residual = std::abs(char_function(p, ref.root));
            double scale = std::max(std::abs(prev_f), std::abs(fx));
            if (r.converged && r.residual > kResidualFactor * std::max(scale, 1e-300)) {
                // Sign change without an actual zero of Phi; skip.
                prev_x = x;
                prev_f = fx;
                continue;
            }
            roots.push_back(r);
        }
        prev_x = x;
        prev_f = fx;
    }
    for (auto& r : roots) r.lambda = r.omega * r.omega - p.shift;
    return roots;
}

std::vector<Root> complex_seed_roots(const SpectralProblem& p, int count) {
    const double b = p.basis->interval().hi;
    const double spacing = std::numbers::pi / b;
    auto f = [&](Complex w) { return char_function(p, w); };

    std::vector<Root> roots;
    // Half-spacing seed grid (asymptotic guesses plus midpoints), each
    // perturbed off the real axis.
    for (int m = 0; m <= 2 * (count + 4); ++m) {
        Complex seed(0.5 * m * spacing, 0.5 * spacing);
        double scale = std::max(std::abs(f(seed)), 1e-300);
        auto ref = refine_secant(f, seed, seed + Complex(0.01 * spacing, 0.005 * spacing));
        if (!ref.converged) continue;
        Complex w = ref.root;
        if (w.real() < 0 || (w.real() == 0 && w.imag() < 0)) w = -w;
        double residual = std::abs(f(w));
        if (residual > kResidualFactor * scale) continue;
        bool dup = false;
        for (const auto& r : roots)
            if (std::abs(r.omega - w) <= 1e-7 * (1.0 + std::abs(w))) {
                dup = true;
                break;
            }
        if (dup) continue;
        Root r;
        r.omega = w;
        r.lambda = w * w - p.shift;
        r.residual = residual;
        roots.push_back(r);
    }
    return roots;
}

} // namespace

BoundaryCondition BoundaryCondition::dirichlet() { return robin(1.0, 0.0); }
BoundaryCondition BoundaryCondition::neumann() { return robin(0.0, 1.0); }
BoundaryCondition BoundaryCondition::robin(Complex alpha, Complex beta) {
    BoundaryCondition bc;
    bc.alpha = [alpha](Complex) { return alpha; };
    bc.beta = [beta](Complex) { return beta; };
    return bc;
}

SpectralProblem make_problem(const ChebyshevExpansion& q, BoundaryCondition left,
                             BoundaryCondition right, int N) {
    auto sol = std::make_shared<ParticularSolution>(particular_solution(q));
    auto table = std::make_shared<FormalPowerTable>(sol, N);
    auto [g1, g2] = goursat_targets(q, sol->h);
    auto basis = std::make_shared<SolutionBasis>(fit_kernel(table, g1, g2, N));
    return SpectralProblem{std::move(basis), std::move(left), std::move(right), nullptr, 0, q};
}

Complex char_function(const SpectralProblem& problem, Complex omega) {
    const Complex a0 = problem.left.alpha(omega), b0 = problem.left.beta(omega);
    const Complex ab = problem.right.alpha(omega), bb = problem.right.beta(omega);
    if (std::abs(a0) + std::abs(b0) == 0.0 || std::abs(ab) + std::abs(bb) == 0.0)
        throw std::invalid_argument("char_function: boundary condition vanishes at this omega");
    const double b = problem.basis->interval().hi;
    auto e = problem.basis->eval_all(omega, b);
    const Complex h = problem.basis->kernel().h;
    const Complex mix = a0 + b0 * h;
    Complex phi = ab * (b0 * e.c - mix * e.s) + bb * (b0 * e.dc - mix * e.ds);
    if (problem.nonlocal) phi += problem.nonlocal(omega) * b0;
    return phi;
}

EigenResult find_eigenvalues(const SpectralProblem& problem, int count, ScanMode mode) {
    if (count < 1) throw std::invalid_argument("find_eigenvalues: count must be >= 1");
    const double b = problem.basis->interval().hi;
    std::vector<Root> roots;
    if (mode == ScanMode::RealScan) {
        double omega_max = (count + 5) * std::numbers::pi / b;
        roots = real_scan_roots(problem, omega_max);
    } else {
        roots = complex_seed_roots(problem, count);
    }
    merge_series_roots(roots, series_roots_near_origin(problem));
    return assemble(std::move(roots), problem, count);
}

std::vector<Complex> eigenfunction(const SpectralProblem& problem, Complex lambda,
                                   std::span<const double> xs) {
    const Complex omega = principal_sqrt(lambda + problem.shift);
    const Complex a0 = problem.left.alpha(omega), b0 = problem.left.beta(omega);
    const Complex mix = a0 + b0 * problem.basis->kernel().h;
    std::vector<Complex> out;
    out.reserve(xs.size());
    for (double x : xs) {
        auto e = problem.basis->eval_all(omega, x);
        out.push_back(b0 * e.c - mix * e.s);
    }
    return out;
}

EigenResult quantum_well(const SpectralProblem& problem) {
    const double b = problem.basis->interval().hi;
    const Complex h = problem.basis->kernel().h;
    double depth = 0;
    for (const auto& v : problem.q.values_at_nodes()) depth = std::max(depth, -v.real());
    EigenResult empty;
    empty.eps1 = problem.basis->kernel().eps1;
    empty.eps2 = problem.basis->kernel().eps2;
    if (depth <= 0) return empty;
    const double beta_max = std::sqrt(depth);

    // Matching condition of the decaying exterior, evaluated through the
    // basis at omega = i beta; the particular-solution slope h cancels,
    // leaving a real-valued function of beta.
    auto g = [&](double beta) {
        auto e = problem.basis->eval_all(Complex(0, beta), b);
        Complex v = e.dc + (beta - h) * e.ds + beta * e.c + beta * (beta - h) * e.s;
        return v.real();
    };

    std::vector<Root> roots;
    const int n_grid = 800;
    const double step = beta_max / n_grid;
    double prev_x = step, prev_f = g(prev_x);
    for (int i = 2; i <= n_grid; ++i) {
        double x = i * step;
        double fx = g(x);
        if ((fx > 0) != (prev_f > 0)) {
            auto ref = refine_bracket(g, prev_x, x, prev_f, fx);
            Root r;
            r.omega = Complex(0, ref.root);
            r.lambda = -ref.root * ref.root;
            r.converged = ref.converged;
            r.residual = std::abs(g(ref.root));
            double scale = std::max({std::abs(prev_f), std::abs(fx), 1e-300});
            if (r.converged && r.residual > kResidualFactor * scale) {
                prev_x = x;
                prev_f = fx;
                continue;
            }
            roots.push_back(r);
        }
        prev_x = x;
        prev_f = fx;
    }

    // Series route: the matching condition as a polynomial in beta built
    // from the formal powers. It stays reliable wherever the truncated
    // series has converged, which covers wells whose kernel fit is out of
    // reach in double precision; scan roots win when both exist.
    const int K = std::min(30, (problem.basis->table().order() - 1) / 2);
    std::vector<Complex> series;
    if (K >= 1) {
        try {
            series = spps_qwell_roots(problem.basis->table(), K, beta_max);
        } catch (const std::exception&) {
        }
    }
    for (Complex sr : series) {
        const double beta = sr.real();
        long double tail = 1.0L; // first omitted series term bounds the truncation
        for (int j = 1; j <= 2 * K + 2; ++j) tail *= static_cast<long double>(beta * b) / j;
        if (tail > 1e-6L) continue;
        bool matched = false;
        for (const auto& r : roots)
            if (std::abs(r.omega.imag() - beta) < 0.05 * (1 + beta)) matched = true;
        if (matched) continue;
        Root r;
        r.omega = Complex(0, beta);
        r.lambda = -beta * beta;
        r.residual = std::abs(g(beta));
        r.method = "spps";
        roots.push_back(r);
    }
    return assemble(std::move(roots), problem, static_cast<int>(roots.size()));
}

SpectralProblem spectral_shift(const SpectralProblem& problem, Complex lambda_star) {
    if (lambda_star == Complex(0.0)) return problem;
    auto shifted_q =
        problem.q + ChebyshevExpansion::constant(problem.q.interval(), lambda_star,
                                                 problem.q.degree());
    SpectralProblem out =
        make_problem(shifted_q, problem.left, problem.right, problem.basis->kernel().N);
    out.nonlocal = problem.nonlocal;
    out.shift = problem.shift + lambda_star;
    return out;
}

} // namespace slk
