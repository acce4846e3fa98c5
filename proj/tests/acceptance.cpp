// End-to-end acceptance runs: one pass/fail line per check, tolerances
// pinned below, nonzero exit when any check fails. The shooting and
// Sturm-count comparisons use the independent GSL integrator oracles.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "slk/problems.hpp"

using namespace slk;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double now_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

AssembledJob assemble_builtin(const std::string& name, int N, int M, int count,
                              bool complex_mode = false) {
    JobConfig job;
    job.builtin = name;
    job.run.N = N;
    job.run.M = M;
    job.run.count = count;
    job.run.complex_mode = complex_mode;
    return assemble(job);
}

/// Dirichlet eigenvalue of y'' = (q - lambda) y nearest the seed, by
/// secant iteration on the endpoint value of the oracle integrator.
double shoot_dirichlet(const std::function<Complex(double)>& q, double b, double seed) {
    auto F = [&](double lam) {
        auto s = oracles::integrate_schrodinger(q, lam, 0.0, 0.0, 1.0, {b}, 1e-13);
        return s.y[0].real();
    };
    double l0 = seed - 0.1, l1 = seed + 0.1, f0 = F(l0), f1 = F(l1);
    for (int it = 0; it < 80; ++it) {
        double l2 = l1 - f1 * (l1 - l0) / (f1 - f0);
        if (std::abs(l2 - l1) < 1e-12 * std::max(1.0, std::abs(l2))) return l2;
        l0 = l1;
        f0 = f1;
        l1 = l2;
        f1 = F(l1);
    }
    return l1;
}

/// Eigenvalues below lambda equal the interior zeros of the solution
/// vanishing at the left endpoint.
int sturm_count(const std::function<Complex(double)>& q, double b, double lambda) {
    std::vector<double> xs;
    const int n = 8000;
    for (int i = 1; i <= n; ++i) xs.push_back(b * i / n);
    auto s = oracles::integrate_schrodinger(q, lambda, 0.0, 0.0, 1.0, xs, 1e-12);
    int count = 0;
    for (size_t i = 0; i + 1 < s.y.size(); ++i)
        if ((s.y[i].real() > 0) != (s.y[i + 1].real() > 0)) ++count;
    return count;
}

// ---- individual checks -------------------------------------------------

Outcome square_well_states() {
    const double limit_s = 5.0, tol = 1e-9;
    const double refs[3] = {1.54436716376282718435, 2.99547074607315853471,
                            3.66781322275488144840};
    double t0 = now_seconds();
    auto a = assemble_builtin("square_well", 32, 128, 3);
    auto r = quantum_well(a.problem);
    double dt = now_seconds() - t0;
    if (r.omegas.size() != 3) return {false, fmt("expected 3 bound states, found %zu", r.omegas.size())};
    std::vector<double> betas;
    for (auto w : r.omegas) betas.push_back(std::abs(w.imag()));
    std::sort(betas.begin(), betas.end());
    double err = 0;
    for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(betas[i] - refs[i]));
    if (err > tol) return {false, fmt("max |beta error| %.2e exceeds %.0e", err, tol)};
    if (dt > limit_s) return {false, fmt("runtime %.1f s exceeds %.0f s", dt, limit_s)};
    return {true, fmt("max |beta error| %.2e, %.2f s", err, dt)};
}

Outcome complex_constant_spectrum() {
    const double limit_s = 30.0, tol = 1e-7;
    double t0 = now_seconds();
    auto a = assemble_builtin("complex_const", 30, 128, 50, true);
    auto r = find_eigenvalues(a.problem, 50, ScanMode::Complex);
    double dt = now_seconds() - t0;
    if (r.eigenvalues.size() < 50)
        return {false, fmt("only %zu of 50 eigenvalues found", r.eigenvalues.size())};
    double err = 0;
    for (int n = 0; n < 50; ++n)
        err = std::max(err, std::abs(r.eigenvalues[n] - Complex(n * n + 3.0, 4.0)));
    if (err > tol) return {false, fmt("max |error| %.2e exceeds %.0e", err, tol)};
    if (dt > limit_s) return {false, fmt("runtime %.1f s exceeds %.0f s", dt, limit_s)};
    return {true, fmt("max |error| vs n^2+3+4i is %.2e over 50 eigenvalues, %.2f s", err, dt)};
}

Outcome nonlocal_bc_spectrum() {
    const double limit_s = 20.0, tol1 = 1e-8, tol_rest = 1e-7;
    const std::pair<int, Complex> refs[] = {
        {1, {4.9685430929323576232, 0.3906545895360696300}},
        {2, {20.602710348893372907, 0.750232523531540313}},
        {3, {64.140382448045471607, 0.684228375311332294}},
        {5, {202.31443747778733950, 0.70057212586524954}},
        {10, {889.18520034251622114, 0.70898948206981412}},
    };
    double t0 = now_seconds();
    auto a = assemble_builtin("chanane", 20, 96, 10, true);
    auto r = find_eigenvalues(a.problem, 10, ScanMode::Complex);
    double dt = now_seconds() - t0;
    if (r.eigenvalues.size() < 10)
        return {false, fmt("only %zu of 10 eigenvalues found", r.eigenvalues.size())};
    double worst = 0;
    for (auto [n, ref] : refs) {
        double err = std::abs(r.eigenvalues[n - 1] - ref);
        double tol = (n == 1) ? tol1 : tol_rest;
        if (err > tol) return {false, fmt("row %d error %.2e exceeds %.0e", n, err, tol)};
        worst = std::max(worst, err);
    }
    if (dt > limit_s) return {false, fmt("runtime %.1f s exceeds %.0f s", dt, limit_s)};
    return {true, fmt("tabulated rows within %.2e, %.2f s", worst, dt)};
}

// Shared with the zero-count check below.
struct ExponentialRun {
    EigenResult r;
    bool ok = false;
};
ExponentialRun exp_run;

Outcome exponential_vs_shooting() {
    const double limit_s = 60.0, tol_fit = 1e-9, tol_eig = 1e-6;
    auto qf = [](double x) { return Complex(std::exp(x)); };
    double t0 = now_seconds();
    auto a = assemble_builtin("paine1", 30, 256, 200);
    auto r = find_eigenvalues(a.problem, 200, ScanMode::RealScan);
    if (r.eigenvalues.size() < 200)
        return {false, fmt("only %zu of 200 eigenvalues found", r.eigenvalues.size())};
    double eps1 = a.problem.basis->kernel().eps1, eps2 = a.problem.basis->kernel().eps2;
    if (eps1 > tol_fit || eps2 > tol_fit)
        return {false, fmt("fit errors %.2e / %.2e exceed %.0e", eps1, eps2, tol_fit)};
    std::vector<double> errs(200);
    double max_err = 0;
    for (int n = 0; n < 200; ++n) {
        double lam = r.eigenvalues[n].real();
        errs[n] = std::abs(lam - shoot_dirichlet(qf, pi, lam));
        max_err = std::max(max_err, errs[n]);
    }
    double dt = now_seconds() - t0;
    exp_run = {r, true};
    if (max_err > tol_eig) return {false, fmt("max |error| %.2e exceeds %.0e", max_err, tol_eig)};
    // Index uniformity; the oracle itself resolves ~1e-11, hence the floor.
    if (errs[199] > 10 * errs[9] + 1e-10)
        return {false, fmt("error grew with index: %.2e at 10 vs %.2e at 200", errs[9], errs[199])};
    if (dt > limit_s) return {false, fmt("runtime %.1f s exceeds %.0f s", dt, limit_s)};
    return {true, fmt("fit %.1e/%.1e, max |error| %.2e, index 10 vs 200: %.1e vs %.1e, %.0f s",
                      eps1, eps2, max_err, errs[9], errs[199], dt)};
}

Outcome zero_counts() {
    const double w_lim = 100.0 + 0.5; // 100 pi / b + pi / (2b) on (0, pi)
    JobConfig job;
    job.expression = "0";
    job.interval = Interval{0, pi};
    job.run.N = 10;
    job.run.M = 64;
    job.run.count = 110;
    auto a = assemble(job);
    auto r = find_eigenvalues(a.problem, 110, ScanMode::RealScan);
    int free_below = 0;
    for (auto w : r.omegas)
        if (w.real() > 0 && w.real() < w_lim) ++free_below;
    if (free_below != 100) return {false, fmt("free problem: %d omegas below %.1f, want 100", free_below, w_lim)};

    if (!exp_run.ok) return {false, "exponential-potential run unavailable"};
    int got = 0;
    for (auto w : exp_run.r.omegas)
        if (w.real() > 0 && w.real() < w_lim) ++got;
    auto qf = [](double x) { return Complex(std::exp(x)); };
    int want = sturm_count(qf, pi, w_lim * w_lim);
    if (got != want) return {false, fmt("exponential potential: %d below cutoff, oracle says %d", got, want)};
    return {true, fmt("free: 100/100, exponential potential: %d/%d below omega=%.1f", got, want, w_lim)};
}

Outcome property_suites() {
    const double limit_s = 120.0;
    const char* suites[] = {ACCEPT_TEST_CHEBYSHEV, ACCEPT_TEST_SPPS, ACCEPT_TEST_NSBF,
                            ACCEPT_TEST_TRACES};
    const char* names[] = {"chebyshev", "spps", "nsbf", "traces"};
    double t0 = now_seconds();
    std::string ran;
    for (int i = 0; i < 4; ++i) {
        std::string cmd = std::string("\"") + suites[i] + "\" > /dev/null 2>&1";
        int rc = std::system(cmd.c_str());
        if (rc != 0) return {false, fmt("suite %s exited with %d", names[i], rc)};
        ran += ran.empty() ? names[i] : std::string(" ") + names[i];
    }
    double dt = now_seconds() - t0;
    if (dt > limit_s) return {false, fmt("total runtime %.1f s exceeds %.0f s", dt, limit_s)};
    return {true, fmt("%s all green in %.1f s", ran.c_str(), dt)};
}

Outcome resonant_double_well() {
    const double ref = 197.96872651650729, tol = 1e-4;
    // Primary target: the isolated eigenvalue above the first cluster,
    // at kernel order <= 80.
    std::string first_failure;
    for (int N : {40, 80}) {
        try {
            auto a = assemble_builtin("coffey_evans", N, std::max(320, 2 * N + 8), 3);
            auto r = find_eigenvalues(a.problem, 3, ScanMode::RealScan);
            for (auto lam : r.eigenvalues)
                if (std::abs(lam.real() - ref) < tol)
                    return {true, fmt("lambda_1 error %.2e at N=%d", std::abs(lam.real() - ref), N)};
        } catch (const std::exception& e) {
            if (first_failure.empty()) first_failure = e.what();
        }
    }
    // Fallback target: monotone fit-error decay through N in {20,40,60}
    // with the eigenvalue error bounded by 10 (eps1 + eps2).
    std::vector<double> eps_sum;
    std::string fb_failure;
    for (int N : {20, 40, 60}) {
        try {
            auto a = assemble_builtin("coffey_evans", N, std::max(320, 2 * N + 8), 3);
            eps_sum.push_back(a.problem.basis->kernel().eps1 + a.problem.basis->kernel().eps2);
        } catch (const std::exception& e) {
            if (fb_failure.empty()) fb_failure = e.what();
            break;
        }
    }
    if (eps_sum.size() == 3 && eps_sum[0] > eps_sum[1] && eps_sum[1] > eps_sum[2]) {
        try {
            auto a = assemble_builtin("coffey_evans", 60, 320, 3);
            auto r = find_eigenvalues(a.problem, 3, ScanMode::RealScan);
            for (auto lam : r.eigenvalues)
                if (std::abs(lam.real() - ref) < 10 * eps_sum[2])
                    return {true, fmt("fallback: eps monotone, lambda_1 error %.2e <= %.2e",
                                      std::abs(lam.real() - ref), 10 * eps_sum[2])};
        } catch (const std::exception& e) {
            fb_failure = e.what();
        }
    }
    // Honest red: every solution of this potential spans ~e^100 in
    // magnitude, beyond what 64- or 80-bit arithmetic can represent
    // relative to its O(1) values, so construction fails before a fit
    // error even exists. Roughly 150-bit arithmetic would be needed.
    return {false, fmt("conditioning-limited at double precision (%s); fallback %s",
                       first_failure.c_str(),
                       fb_failure.empty() ? "eps not monotone" : fb_failure.c_str())};
}

Outcome truncated_well_states() {
    const double tol = 1e-2;
    const double refs[3] = {-9.0, -4.0, -1.0};
    double t0 = now_seconds();
    auto a = assemble_builtin("sech2", 61, 160, 3);
    auto r = quantum_well(a.problem);
    double dt = now_seconds() - t0;
    if (r.eigenvalues.size() != 3)
        return {false, fmt("expected 3 bound states, found %zu", r.eigenvalues.size())};
    std::vector<double> lams;
    for (auto l : r.eigenvalues) lams.push_back(l.real());
    std::sort(lams.begin(), lams.end());
    double err = 0;
    for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(lams[i] - refs[i]));
    if (err > tol) return {false, fmt("max |error| %.2e exceeds %.0e", err, tol)};
    return {true, fmt("max |error| %.2e (potential-truncation limited), %.0f s", err, dt)};
}

} // namespace

int main() {
    struct Check {
        const char* name;
        Outcome (*run)();
    };
    const Check checks[] = {
        {"square-well bound states to 1e-9", square_well_states},
        {"complex constant potential, 50 eigenvalues to 1e-7", complex_constant_spectrum},
        {"nonlocal boundary condition, tabulated rows", nonlocal_bc_spectrum},
        {"exponential potential vs shooting oracle, 200 eigenvalues", exponential_vs_shooting},
        {"exact zero counts below the frequency cutoff", zero_counts},
        {"property suites standalone under 120 s", property_suites},
        {"resonant double well (Coffey-Evans form, beta=50)", resonant_double_well},
        {"truncated sech^2 well bound states to 1e-2", truncated_well_states},
    };
    int failures = 0;
    int idx = 0;
    for (const auto& c : checks) {
        ++idx;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("unexpected error: ") + e.what()};
        }
        std::printf("%d. %-58s %s (%s)\n", idx, c.name, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    if (failures) std::printf("%d of 8 checks failed\n", failures);
    return failures;
}
