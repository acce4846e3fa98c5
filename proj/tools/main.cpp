#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "slk/expr.hpp"
#include "slk/problems.hpp"

namespace {

using namespace slk;

constexpr int kExitConfig = 2, kExitConstruction = 3, kExitConvergence = 4;

/// Problem and run flags shared by every subcommand; -1 / empty means
/// "not given", so config-file values survive unless overridden.
struct Flags {
    std::string config, builtin, potential, samples, interval, bc_left, bc_right, eta;
    std::string mode, format, out, shift;
    int n = -1, m = -1, k = -1, count = -1;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "config file with [problem]/[run]/[output] sections");
    cmd->add_option("--builtin", f.builtin, "catalogued problem, e.g. coffey_evans(50)");
    cmd->add_option("--potential", f.potential, "potential q as an expression in x");
    cmd->add_option("--samples", f.samples, "file of sampled potential values");
    cmd->add_option("--interval", f.interval, "interval a,b (expression potentials)");
    cmd->add_option("--bc-left", f.bc_left, "dirichlet | neumann | 'alpha, beta' in omega");
    cmd->add_option("--bc-right", f.bc_right, "dirichlet | neumann | 'alpha, beta' in omega");
    cmd->add_option("--eta", f.eta, "nonlocal coefficient eta(omega)");
    cmd->add_option("--n", f.n, "kernel order N");
    cmd->add_option("--m", f.m, "potential sampling nodes M");
    cmd->add_option("--k", f.k, "series truncation (0 means 2N)");
    cmd->add_option("--count", f.count, "number of eigenvalues");
    cmd->add_option("--mode", f.mode, "real | complex");
    cmd->add_option("--shift", f.shift, "spectral shift lambda*");
    cmd->add_option("--format", f.format, "csv | json");
    cmd->add_option("--out", f.out, "output path (default stdout)");
}

JobConfig to_job(const Flags& f) {
    JobConfig job;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw config_error("cannot open config file '" + f.config + "'");
        job = parse_config(in);
    }
    if (!f.builtin.empty()) job.builtin = f.builtin;
    if (!f.potential.empty()) job.expression = f.potential;
    if (!f.samples.empty()) job.samples_file = f.samples;
    if (!f.interval.empty()) job.interval = parse_interval(f.interval);
    if (!f.bc_left.empty()) job.bc_left = f.bc_left;
    if (!f.bc_right.empty()) job.bc_right = f.bc_right;
    if (!f.eta.empty()) job.eta = f.eta;
    if (f.n >= 0) job.run.N = f.n;
    if (f.m >= 0) job.run.M = f.m;
    if (f.k >= 0) job.run.K = f.k;
    if (f.count >= 0) job.run.count = f.count;
    if (!f.mode.empty()) job.run.complex_mode = (f.mode == "complex");
    if (!f.shift.empty()) job.run.shift = Expression::parse(f.shift, "")(0.0);
    if (!f.format.empty()) job.run.format = f.format;
    if (!f.out.empty()) job.run.out = f.out;
    int sources = !job.builtin.empty() + !job.expression.empty() + !job.samples_file.empty();
    if (sources != 1)
        throw config_error("give exactly one of --builtin, --potential, --samples");
    job.run.validate();
    return job;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw config_error("cannot open output file '" + path + "'");
    out << text;
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int emit_eigs(const AssembledJob& a, const EigenResult& r, double ms) {
    write_output(a.run.out, a.run.format == "json"
                                ? format_json(r, a.run, a.problem.q.degree(), ms)
                                : format_csv(r));
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    bool all_converged = true;
    for (bool c : r.converged) all_converged = all_converged && c;
    if (r.shortfall > 0 || !all_converged) {
        std::cerr << "convergence: " << r.shortfall << " eigenvalue(s) missing, "
                  << (all_converged ? "all listed roots converged" : "unconverged roots flagged")
                  << "\n";
        return kExitConvergence;
    }
    return 0;
}

int run_eigs(const Flags& f) {
    auto a = assemble(to_job(f));
    auto t0 = std::chrono::steady_clock::now();
    auto r = a.well ? quantum_well(a.problem)
                    : find_eigenvalues(a.problem, a.run.count,
                                       a.run.complex_mode ? ScanMode::Complex
                                                          : ScanMode::RealScan);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
    return emit_eigs(a, r, ms);
}

int run_qwell(const Flags& f) {
    auto a = assemble(to_job(f));
    auto t0 = std::chrono::steady_clock::now();
    auto r = quantum_well(a.problem);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
    return emit_eigs(a, r, ms);
}

int run_ivp(const Flags& f, const std::string& lambda_text, const std::string& y0_text,
            const std::string& y1_text, int points) {
    auto a = assemble(to_job(f));
    Complex lambda = Expression::parse(lambda_text, "")(0.0);
    Complex y0 = Expression::parse(y0_text, "")(0.0);
    Complex y1 = Expression::parse(y1_text, "")(0.0);
    const auto& basis = *a.problem.basis;
    Complex w = std::sqrt(lambda + a.problem.shift);
    Complex h = basis.kernel().h;
    double b = basis.interval().hi;
    std::string out = "x,y_re,y_im,dy_re,dy_im\n";
    for (int i = 0; i < points; ++i) {
        double x = b * i / (points - 1);
        auto e = basis.eval_all(w, x);
        Complex y = y0 * e.c + (y1 - y0 * h) * e.s;
        Complex dy = y0 * e.dc + (y1 - y0 * h) * e.ds;
        out += g17(x) + ',' + g17(y.real()) + ',' + g17(y.imag()) + ',' + g17(dy.real()) + ',' +
               g17(dy.imag()) + '\n';
    }
    write_output(a.run.out, out);
    return 0;
}

int run_kernel(const Flags& f, const std::string& which_name, int grid) {
    auto a = assemble(to_job(f));
    SolutionBasis::Kernel which;
    if (which_name == "Kf")
        which = SolutionBasis::Kernel::Kf;
    else if (which_name == "K1f")
        which = SolutionBasis::Kernel::K1f;
    else if (which_name == "C")
        which = SolutionBasis::Kernel::C;
    else if (which_name == "S")
        which = SolutionBasis::Kernel::S;
    else
        throw config_error("kernel must be one of Kf, K1f, C, S");
    const auto& basis = *a.problem.basis;
    double b = basis.interval().hi;
    std::string out = "x,t,k_re,k_im\n";
    for (int i = 1; i <= grid; ++i) {
        double x = b * i / grid;
        for (int j = -i; j <= i; ++j) {
            double t = x * j / i;
            Complex v = basis.kernel_eval(x, t, which);
            out += g17(x) + ',' + g17(t) + ',' + g17(v.real()) + ',' + g17(v.imag()) + '\n';
        }
    }
    write_output(a.run.out, out);
    return 0;
}

int run_diagnose(const Flags& f, const std::string& sweep) {
    JobConfig job = to_job(f);
    int lo = job.run.N, hi = job.run.N, step = 1;
    if (!sweep.empty() &&
        std::sscanf(sweep.c_str(), "%d:%d:%d", &lo, &hi, &step) != 3)
        throw config_error("n-sweep must be lo:hi:step");
    if (lo < 1 || hi < lo || step < 1) throw config_error("bad n-sweep range");

    std::string out = "# fit errors vs kernel order\nn,eps1,eps2\n";
    std::optional<AssembledJob> last;
    for (int n = lo; n <= hi; n += step) {
        job.run.N = n;
        job.run.M = std::max(job.run.M, 2 * n + 8);
        last.emplace(assemble(job));
        const auto& k = last->problem.basis->kernel();
        out += std::to_string(n) + ',' + g17(k.eps1) + ',' + g17(k.eps2) + '\n';
    }
    double b = last->problem.basis->interval().hi;
    auto sr = sanity_ratio(last->problem.basis->table(), b);
    out += "# formal power growth |phi_k(b)/b^k|";
    out += sr.flagged ? " (flagged: drifting outside [1e-3,1e3])\n" : "\n";
    out += "k,ratio\n";
    for (size_t i = 0; i < sr.ratios.size(); ++i)
        out += std::to_string(i) + ',' + g17(sr.ratios[i]) + '\n';
    write_output(job.run.out, out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sturm-Liouville spectral solver via transmutation-kernel approximation"};
    app.require_subcommand(1);

    Flags fe, fq, fi, fk, fd;
    std::string lambda = "0", y0 = "1", y1 = "0", which = "Kf", sweep;
    int points = 101, grid = 16;

    auto* eigs = app.add_subcommand("eigs", "eigenvalues of the boundary-value problem");
    add_common(eigs, fe);
    auto* qwell = app.add_subcommand("qwell", "bound states of a quantum well");
    add_common(qwell, fq);
    auto* ivp = app.add_subcommand("ivp", "initial-value solution at a given lambda");
    add_common(ivp, fi);
    ivp->add_option("--lambda", lambda, "spectral parameter");
    ivp->add_option("--y0", y0, "u(0)");
    ivp->add_option("--y1", y1, "u'(0)");
    ivp->add_option("--points", points, "uniform output points");
    auto* kernel = app.add_subcommand("kernel", "dump an approximate kernel on the triangle");
    add_common(kernel, fk);
    kernel->add_option("--which", which, "Kf | K1f | C | S");
    kernel->add_option("--grid", grid, "rows in the triangular grid");
    auto* diagnose = app.add_subcommand("diagnose", "fit-error sweep and formal-power ratios");
    add_common(diagnose, fd);
    diagnose->add_option("--n-sweep", sweep, "kernel orders lo:hi:step");

    try {
        app.parse(argc, argv);
        if (*eigs) return run_eigs(fe);
        if (*qwell) return run_qwell(fq);
        if (*ivp) return run_ivp(fi, lambda, y0, y1, points);
        if (*kernel) return run_kernel(fk, which, grid);
        if (*diagnose) return run_diagnose(fd, sweep);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    } catch (const config_error& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const parse_error& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const construction_error& e) {
        std::cerr << "construction: " << e.what() << "\n";
        return kExitConstruction;
    } catch (const conditioning_error& e) {
        std::cerr << "construction: " << e.what() << "\n";
        return kExitConstruction;
    } catch (const nonvanishing_error& e) {
        std::cerr << "construction: " << e.what() << "\n";
        return kExitConstruction;
    } catch (const std::exception& e) {
        std::cerr << "construction: " << e.what() << "\n";
        return kExitConstruction;
    }
    return 0;
}
