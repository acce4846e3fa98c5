#include "slk/problems.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "slk/expr.hpp"

namespace slk {

namespace {

using std::numbers::pi;

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

/// Splits on commas outside parentheses.
std::vector<std::string> split_top(const std::string& s) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

/// Evaluates a constant expression (no free variable).
Complex constant_value(const std::string& text, const std::string& what) {
    try {
        Expression e = Expression::parse(text, "");
        return e(0.0);
    } catch (const parse_error& err) {
        throw config_error(what + ": " + err.what());
    }
}

double real_constant(const std::string& text, const std::string& what) {
    Complex v = constant_value(text, what);
    if (std::abs(v.imag()) > 1e-15 * (1 + std::abs(v)))
        throw config_error(what + ": expected a real value, got imaginary part");
    return v.real();
}

std::function<Complex(Complex)> omega_function(const std::string& text, const std::string& what) {
    try {
        Expression e = Expression::parse(text, "omega");
        return [e](Complex w) { return e(w); };
    } catch (const parse_error& err) {
        throw config_error(what + ": " + err.what());
    }
}

BuiltinProblem dirichlet_builtin(std::string name, Interval iv, std::function<Complex(double)> q) {
    return {std::move(name), iv,       std::move(q), BoundaryCondition::dirichlet(),
            BoundaryCondition::dirichlet(), nullptr, false};
}

} // namespace

std::vector<std::string> builtin_names() {
    return {"paine1",  "paine2",      "coffey_evans", "complex_const",
            "chanane", "square_well", "sech2"};
}

BuiltinProblem builtin_problem(const std::string& spec) {
    std::string name = trim(spec);
    std::vector<Complex> args;
    size_t paren = name.find('(');
    if (paren != std::string::npos) {
        if (name.back() != ')') throw config_error("builtin '" + spec + "': expected ')'");
        std::string inner = name.substr(paren + 1, name.size() - paren - 2);
        name = trim(name.substr(0, paren));
        for (const auto& part : split_top(inner))
            args.push_back(constant_value(part, "builtin argument"));
    }
    auto want = [&](size_t n) {
        if (!args.empty() && args.size() != n)
            throw config_error("builtin '" + name + "': expected " + std::to_string(n) +
                               " argument(s)");
        return args.size() == n;
    };

    if (name == "paine1")
        return dirichlet_builtin(name, {0, pi}, [](double x) { return Complex(std::exp(x)); });
    if (name == "paine2")
        return dirichlet_builtin(name, {0, pi},
                                 [](double x) { return Complex(1.0 / ((x + 0.1) * (x + 0.1))); });
    if (name == "coffey_evans") {
        double beta = want(1) ? args[0].real() : 50.0;
        return dirichlet_builtin(name, {0, pi}, [beta](double x) {
            double s = std::sin(2 * x);
            return Complex(beta * beta * s * s - 2 * beta * std::cos(2 * x));
        });
    }
    if (name == "complex_const") {
        Complex c = want(1) ? args[0] : Complex(3, 4);
        return {name,     {0, pi},    [c](double) { return c; }, BoundaryCondition::neumann(),
                BoundaryCondition::neumann(), nullptr, false};
    }
    if (name == "chanane") {
        BuiltinProblem p{name,
                         {0, 1},
                         [](double x) { return std::exp(Complex(0, 2 * x)); },
                         BoundaryCondition::neumann(),
                         {[](Complex w) { return w; }, [](Complex) { return Complex(0); }},
                         [](Complex) { return Complex(1); },
                         false};
        return p;
    }
    if (name == "square_well") {
        double U = 15.0, a = 1.0;
        if (want(2)) U = args[0].real(), a = args[1].real();
        if (U <= 0 || a <= 0) throw config_error("square_well: U and a must be positive");
        auto p = dirichlet_builtin(name, {0, 2 * a}, [U](double) { return Complex(-U); });
        p.well = true;
        return p;
    }
    if (name == "sech2") {
        double m = 3.0, a = 5.0;
        if (want(2)) m = args[0].real(), a = args[1].real();
        if (a <= 0) throw config_error("sech2: a must be positive");
        auto p = dirichlet_builtin(name, {0, 2 * a}, [m, a](double x) {
            double c = std::cosh(x - a);
            return Complex(-m * (m + 1) / (c * c));
        });
        p.well = true;
        return p;
    }
    throw config_error("unknown builtin '" + name + "'");
}

void RunConfig::validate() const {
    if (N < 1) throw config_error("n must be at least 1");
    if (M < 2 * N + 8)
        throw config_error("m = " + std::to_string(M) + " below the resolution floor 2n+8 = " +
                           std::to_string(2 * N + 8));
    if (K != 0 && K < N) throw config_error("k must be 0 (meaning 2n) or at least n");
    if (count < 1) throw config_error("count must be positive");
    if (format != "csv" && format != "json")
        throw config_error("format must be csv or json, got '" + format + "'");
}

Interval parse_interval(const std::string& text) {
    auto parts = split_top(text);
    if (parts.size() != 2) throw config_error("interval: expected 'a,b'");
    Interval iv{real_constant(parts[0], "interval"), real_constant(parts[1], "interval")};
    if (iv.degenerate()) throw config_error("interval: endpoints must satisfy a < b");
    return iv;
}

BoundaryCondition parse_boundary(const std::string& text) {
    std::string t = trim(text);
    if (t == "dirichlet" || t.empty()) return BoundaryCondition::dirichlet();
    if (t == "neumann") return BoundaryCondition::neumann();
    auto parts = split_top(t);
    if (parts.size() != 2)
        throw config_error("boundary condition: expected dirichlet, neumann, or 'alpha, beta'");
    return {omega_function(parts[0], "boundary alpha"), omega_function(parts[1], "boundary beta")};
}

JobConfig parse_config(std::istream& in) {
    JobConfig job;
    std::string line, section;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw config_error("config line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("expected ']'");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "problem" && section != "run" && section != "output")
                fail("unknown section [" + section + "]");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (section == "problem") {
            if (key == "interval")
                job.interval = parse_interval(value);
            else if (key == "expression")
                job.expression = value;
            else if (key == "builtin")
                job.builtin = value;
            else if (key == "samples_file")
                job.samples_file = value;
            else if (key == "bc_left")
                job.bc_left = value;
            else if (key == "bc_right")
                job.bc_right = value;
            else if (key == "eta")
                job.eta = value;
            else
                fail("unknown key '" + key + "' in [problem]");
        } else if (section == "run") {
            if (key == "m")
                job.run.M = std::stoi(value);
            else if (key == "n")
                job.run.N = std::stoi(value);
            else if (key == "k")
                job.run.K = std::stoi(value);
            else if (key == "count")
                job.run.count = std::stoi(value);
            else if (key == "mode")
                job.run.complex_mode = (value == "complex");
            else if (key == "shift")
                job.run.shift = constant_value(value, "shift");
            else
                fail("unknown key '" + key + "' in [run]");
        } else if (section == "output") {
            if (key == "format")
                job.run.format = value;
            else if (key == "out")
                job.run.out = value;
            else
                fail("unknown key '" + key + "' in [output]");
        } else {
            fail("key outside any section");
        }
    }
    int sources = !job.builtin.empty() + !job.expression.empty() + !job.samples_file.empty();
    if (sources != 1)
        throw config_error("exactly one of builtin, expression, samples_file must be set");
    if (job.builtin.empty() && job.interval.degenerate() && job.samples_file.empty())
        throw config_error("interval is required with an expression potential");
    job.run.validate();
    return job;
}

ChebyshevExpansion potential_from_samples(std::istream& in, int M) {
    std::vector<double> xs;
    std::vector<Complex> ys;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream row(line);
        double x, re, im = 0;
        if (!(row >> x >> re)) throw config_error("samples: expected 'x value [imag]' per line");
        row >> im;
        if (!std::isfinite(x) || !std::isfinite(re) || !std::isfinite(im))
            throw config_error("samples: non-finite entry");
        if (!xs.empty() && x <= xs.back())
            throw config_error("samples: abscissas must be strictly increasing");
        xs.push_back(x);
        ys.push_back({re, im});
    }
    const int n = static_cast<int>(xs.size());
    if (n < 4) throw config_error("samples: at least 4 points required");

    // Natural cubic spline: tridiagonal system for the second derivatives.
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    T(0, 0) = T(n - 1, n - 1) = 1.0;
    for (int i = 1; i < n - 1; ++i) {
        double hl = xs[i] - xs[i - 1], hr = xs[i + 1] - xs[i];
        T(i, i - 1) = hl;
        T(i, i) = 2 * (hl + hr);
        T(i, i + 1) = hr;
        rhs(i) = 6.0 * ((ys[i + 1] - ys[i]) / hr - (ys[i] - ys[i - 1]) / hl);
    }
    Eigen::VectorXcd m = T.partialPivLu().solve(rhs);

    auto spline = [&](double x) {
        int i = int(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
        i = std::clamp(i, 0, n - 2);
        double h = xs[i + 1] - xs[i], t = x - xs[i], u = xs[i + 1] - x;
        return (m(i) * u * u * u + m(i + 1) * t * t * t) / (6 * h) +
               (ys[i] / h - m(i) * h / 6.0) * u + (ys[i + 1] / h - m(i + 1) * h / 6.0) * t;
    };
    Interval iv{xs.front(), xs.back()};
    auto nodes = cheb_nodes(M, iv);
    std::vector<Complex> v(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) v[i] = spline(nodes[i]);
    return ChebyshevExpansion::from_samples(iv, v);
}

AssembledJob assemble(const JobConfig& job) {
    job.run.validate();
    Interval iv;
    std::function<Complex(double)> q;
    BoundaryCondition left, right;
    std::function<Complex(Complex)> nonlocal;
    bool well = false;

    if (!job.builtin.empty()) {
        auto b = builtin_problem(job.builtin);
        iv = b.interval;
        q = b.q;
        left = b.left;
        right = b.right;
        nonlocal = b.nonlocal;
        well = b.well;
    } else {
        if (!job.expression.empty()) {
            Expression e = Expression::parse(job.expression, "x");
            iv = job.interval;
            q = [e](double x) { return e(x); };
        } else {
            std::ifstream f(job.samples_file);
            if (!f) throw config_error("cannot open samples file '" + job.samples_file + "'");
            auto sampled = potential_from_samples(f, job.run.M);
            iv = sampled.interval();
            q = [sampled](double x) { return sampled(x); };
        }
        left = parse_boundary(job.bc_left);
        right = parse_boundary(job.bc_right);
    }
    if (!job.eta.empty()) nonlocal = omega_function(job.eta, "eta");

    if (well) {
        // Bound-state matching already assumes the potential has vanished
        // at the edges; trimming the window where |q| has decayed keeps
        // the basis order needed by the fit proportional to the well
        // width instead of the truncation radius.
        double qmax = 0;
        const int ng = 2000;
        for (int i = 0; i <= ng; ++i)
            qmax = std::max(qmax, std::abs(q(iv.lo + iv.width() * i / ng)));
        const double cut = 1e-2 * qmax;
        double xl = iv.hi, xh = iv.lo;
        for (int i = 0; i <= ng; ++i) {
            double x = iv.lo + iv.width() * i / ng;
            if (std::abs(q(x)) >= cut) {
                xl = std::min(xl, x);
                xh = std::max(xh, x);
            }
        }
        if (xl < xh && xh - xl < iv.width() * (1 - 1e-9)) iv = {xl, xh};
    }

    // Internal coordinates always start at 0; the shift enters the sampled
    // potential and is undone in the reported eigenvalues.
    const double lo = iv.lo;
    Interval work{0, iv.width()};
    auto nodes = cheb_nodes(job.run.M, work);
    std::vector<Complex> v(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) v[i] = q(nodes[i] + lo) + job.run.shift;
    auto qe = ChebyshevExpansion::from_samples(work, v);

    AssembledJob out{make_problem(qe, left, right, job.run.N), well, job.run};
    out.problem.nonlocal = nonlocal;
    out.problem.shift = job.run.shift;
    return out;
}

namespace {
std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace

std::string format_csv(const EigenResult& r) {
    std::string out = "index,lambda_re,lambda_im,omega_re,omega_im,residual,method\n";
    for (size_t i = 0; i < r.eigenvalues.size(); ++i) {
        out += std::to_string(i + 1) + ',' + g17(r.eigenvalues[i].real()) + ',' +
               g17(r.eigenvalues[i].imag()) + ',' + g17(r.omegas[i].real()) + ',' +
               g17(r.omegas[i].imag()) + ',' + g17(r.residuals[i]) + ',' + r.method[i] + '\n';
    }
    return out;
}

std::string format_json(const EigenResult& r, const RunConfig& run, int M, double runtime_ms) {
    nlohmann::json j;
    j["meta"] = {{"N", run.N},     {"M", M},
                 {"eps1", r.eps1}, {"eps2", r.eps2},
                 {"runtime_ms", runtime_ms}};
    j["shortfall"] = r.shortfall;
    j["warnings"] = r.warnings;
    auto rows = nlohmann::json::array();
    for (size_t i = 0; i < r.eigenvalues.size(); ++i) {
        rows.push_back({{"index", i + 1},
                        {"lambda_re", r.eigenvalues[i].real()},
                        {"lambda_im", r.eigenvalues[i].imag()},
                        {"omega_re", r.omegas[i].real()},
                        {"omega_im", r.omegas[i].imag()},
                        {"residual", r.residuals[i]},
                        {"method", r.method[i]},
                        {"cluster", static_cast<bool>(r.cluster[i])},
                        {"converged", static_cast<bool>(r.converged[i])}});
    }
    j["eigenvalues"] = std::move(rows);
    return j.dump(2) + "\n";
}

} // namespace slk
