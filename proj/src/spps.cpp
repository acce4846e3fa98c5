#include "slk/spps.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace slk {

namespace {

constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon();

std::vector<Complex> sample_at(const ChebyshevExpansion& e, const std::vector<double>& xs) {
    std::vector<Complex> v(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) v[i] = e(xs[i]);
    return v;
}

struct MinScan {
    double min_abs;
    double local_max; // max |e| within one scan cell of the minimizer
};

/// True minimum of |e| over the interval: dense scan followed by a
/// ternary refinement around the best cell, so a genuine zero crossing
/// is not masked by the scan spacing. The local scale around the
/// minimizer is reported alongside: a true zero only refines down to
/// roundoff relative to nearby values, not to the global maximum, which
/// matters when |e| spans many orders of magnitude.
MinScan min_scan_on_interval(const ChebyshevExpansion& e) {
    const Interval iv = e.interval();
    const int n = 4096;
    double best = std::numeric_limits<double>::infinity();
    double xbest = iv.lo;
    for (int i = 0; i <= n; ++i) {
        double x = iv.lo + iv.width() * i / n;
        double a = std::abs(e(x));
        if (a < best) {
            best = a;
            xbest = x;
        }
    }
    double lo = std::max(iv.lo, xbest - iv.width() / n);
    double hi = std::min(iv.hi, xbest + iv.width() / n);
    for (int it = 0; it < 80; ++it) {
        double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (std::abs(e(m1)) < std::abs(e(m2)))
            hi = m2;
        else
            lo = m1;
    }
    double mn = std::min(best, std::abs(e(0.5 * (lo + hi))));
    double lmax = 0;
    const double wloc = iv.width() / n;
    for (int i = -8; i <= 8; ++i) {
        double x = std::clamp(xbest + wloc * i / 8, iv.lo, iv.hi);
        lmax = std::max(lmax, std::abs(e(x)));
    }
    return {mn, lmax};
}

double min_abs_on_interval(const ChebyshevExpansion& e) { return min_scan_on_interval(e).min_abs; }

struct PicardResult {
    ChebyshevExpansion f;
    std::vector<Complex> node_values;
};

/// Fixed point of f = init + int_0^x int_0^t q f; factorial convergence,
/// the iteration cap is never the binding limit for resolvable q.
PicardResult picard(const std::vector<double>& xs, const std::vector<Complex>& qv, Interval iv,
                    const std::vector<Complex>& init_values,
                    const ChebyshevExpansion& init_exp) {
    std::vector<Complex> fv = init_values;
    ChebyshevExpansion fe = init_exp;
    const int n = static_cast<int>(xs.size());
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<Complex> prod(n);
        for (int i = 0; i < n; ++i) prod[i] = qv[i] * fv[i];
        auto corr = ChebyshevExpansion::from_samples(iv, prod).antiderivative().antiderivative();
        ChebyshevExpansion next = init_exp + corr;
        double change = 0, scale = 0;
        std::vector<Complex> nv(n);
        for (int i = 0; i < n; ++i) {
            nv[i] = next(xs[i]);
            change = std::max(change, std::abs(nv[i] - fv[i]));
            scale = std::max(scale, std::abs(nv[i]));
        }
        fv = std::move(nv);
        fe = std::move(next);
        if (change <= 4 * kUnitRoundoff * std::max(1.0, scale)) break;
    }
    return {std::move(fe), std::move(fv)};
}

/// Both basis solutions (u(lo)=1, u'(lo)=0 and v(lo)=0, v'(lo)=1) built
/// panel by panel: the single global Picard series cancels
/// catastrophically once sqrt(max|q|) * width is large (its largest term
/// is ~cosh of that product), while per-panel series stay small and the
/// fundamental matrix propagates the initial data exactly.
std::pair<PicardResult, PicardResult> march_basis(const std::vector<double>& xs,
                                                  const ChebyshevExpansion& q, Interval iv) {
    const double s = std::sqrt(std::max(1.0, q.max_abs()));
    const int panels = std::max(1, static_cast<int>(std::ceil(s * iv.width() / 8.0)));
    const int mloc = 48;
    const size_t n = xs.size();
    std::vector<int> panel_of(n);
    for (size_t i = 0; i < n; ++i)
        panel_of[i] = std::min(panels - 1, std::max(0, static_cast<int>((xs[i] - iv.lo) /
                                                                        iv.width() * panels)));
    std::vector<Complex> uv(n), vv(n);
    Complex u0 = 1, du0 = 0, v0 = 0, dv0 = 1;
    for (int p = 0; p < panels; ++p) {
        Interval piv{iv.lo + iv.width() * p / panels, iv.lo + iv.width() * (p + 1) / panels};
        auto lxs = cheb_nodes(mloc, piv);
        std::vector<Complex> lqv(lxs.size()), shifted(lxs.size());
        for (size_t i = 0; i < lxs.size(); ++i) {
            lqv[i] = q(lxs[i]);
            shifted[i] = lxs[i] - piv.lo;
        }
        auto lone = ChebyshevExpansion::constant(piv, 1.0);
        auto pu = picard(lxs, lqv, piv, std::vector<Complex>(lxs.size(), Complex(1.0)), lone);
        auto pv = picard(lxs, lqv, piv, shifted, lone.antiderivative());
        auto pud = pu.f.derivative();
        auto pvd = pv.f.derivative();
        for (size_t i = 0; i < n; ++i) {
            if (panel_of[i] != p) continue;
            Complex a = pu.f(xs[i]), b = pv.f(xs[i]);
            uv[i] = u0 * a + du0 * b;
            vv[i] = v0 * a + dv0 * b;
        }
        Complex a = pu.f(piv.hi), b = pv.f(piv.hi), da = pud(piv.hi), db = pvd(piv.hi);
        Complex u1 = u0 * a + du0 * b, du1 = u0 * da + du0 * db;
        Complex v1 = v0 * a + dv0 * b, dv1 = v0 * da + dv0 * db;
        u0 = u1;
        du0 = du1;
        v0 = v1;
        dv0 = dv1;
    }
    return {PicardResult{ChebyshevExpansion::from_samples(iv, uv), uv},
            PicardResult{ChebyshevExpansion::from_samples(iv, vv), vv}};
}

ParticularSolution finalize_solution(ChebyshevExpansion f, const ChebyshevExpansion& q,
                                     double min_abs) {
    auto fp = f.derivative();
    Complex h = fp(f.interval().lo);
    // Residual of the defining equation at the nodes; scaled by the size
    // of f because the defect grows linearly with it.
    auto fpp = fp.derivative();
    const auto xs = cheb_nodes(q.degree() > 0 ? q.degree() : 1, q.interval());
    double resid = 0, fmax = 0, qmax = q.max_abs();
    for (double x : xs) {
        Complex fx = f(x);
        resid = std::max(resid, std::abs(fpp(x) - q(x) * fx));
        fmax = std::max(fmax, std::abs(fx));
    }
    // Differentiating the expansion twice amplifies coefficient roundoff
    // by ~deg^4, so the admissible defect carries that term as well.
    const double d = std::max(1, f.degree());
    const double tol = (1e-8 * (1 + qmax) + 1e2 * kUnitRoundoff * d * d * d * d) *
                       std::max(1.0, fmax);
    if (resid > tol) throw construction_error("particular solution residual too large", min_abs);
    return ParticularSolution{std::move(f), std::move(fp), h, min_abs};
}

std::vector<Complex> poly_roots(std::vector<Complex> c) {
    // Trim negligible leading coefficients before forming the companion matrix.
    double top = 0;
    for (const auto& z : c) top = std::max(top, std::abs(z));
    while (c.size() > 1 && std::abs(c.back()) < 1e-13 * top) c.pop_back();
    const int deg = static_cast<int>(c.size()) - 1;
    if (deg < 1) return {};
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) A(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) A(i, deg - 1) = -c[i] / c[deg];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A, false);
    std::vector<Complex> roots(deg);
    for (int i = 0; i < deg; ++i) roots[i] = es.eigenvalues()[i];
    return roots;
}

} // namespace

ParticularSolution particular_solution(const ChebyshevExpansion& q) {
    const Interval iv = q.interval();
    const int M = q.degree() > 0 ? q.degree() : 1;
    const auto xs = cheb_nodes(M, iv);
    const auto qv = sample_at(q, xs);

    const auto one = ChebyshevExpansion::constant(iv, 1.0);
    std::vector<Complex> zero_shift(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) zero_shift[i] = xs[i] - iv.lo;
    const auto ident = one.antiderivative(); // x - lo, vanishing at the left endpoint

    double qscale0 = 0;
    for (const auto& z : qv) qscale0 = std::max(qscale0, std::abs(z));
    const bool marched = std::sqrt(std::max(1.0, qscale0)) * iv.width() > 16.0;

    std::optional<PicardResult> p1o, p2o;
    if (marched) {
        auto pr = march_basis(xs, q, iv);
        p1o = std::move(pr.first);
        p2o = std::move(pr.second);
    } else {
        p1o = picard(xs, qv, iv, std::vector<Complex>(xs.size(), Complex(1.0)), one);
    }
    PicardResult& p1 = *p1o;
    bool q_real = true;
    for (const auto& z : qv)
        if (std::abs(z.imag()) > 1e-14 * (1 + std::abs(z))) q_real = false;

    auto try_candidate = [&](const ChebyshevExpansion& f) {
        auto ms = min_scan_on_interval(f);
        // A true interior zero refines to ~u times the local scale of f;
        // anything clearly above that noise floor is usable even when f
        // grows large elsewhere on the interval.
        return std::pair<bool, double>{
            ms.min_abs > 1e4 * kUnitRoundoff * std::max(1.0, ms.local_max), ms.min_abs};
    };

    // Where a real q dips negative the solutions oscillate, and a
    // technically non-vanishing first basis solution may dip close to
    // zero while the complex mix balloons in the regions where q is
    // positive. The formal-power recursion compounds the dynamic range
    // max|f|/min|f| of whichever candidate is chosen, so in that regime
    // every candidate is scored and the flattest one wins. For one-signed
    // real q the first basis solution is taken as-is.
    bool q_dips_negative = false;
    if (q_real)
        for (const auto& z : qv)
            if (z.real() < 0) q_dips_negative = true;

    auto [ok1, mn1] = try_candidate(p1.f);
    if (ok1 && !q_dips_negative) return finalize_solution(p1.f, q, mn1);

    if (!p2o) p2o = picard(xs, qv, iv, zero_shift, ident);
    PicardResult& p2 = *p2o;
    double best_min = mn1;
    std::optional<ChebyshevExpansion> best_cand;
    double best_ratio = ok1 ? mn1 / p1.f.max_abs() : 0.0;
    double best_cand_min = mn1;
    if (ok1) best_cand = p1.f;
    const Complex I(0, 1);
    // The second solution is mixed in at the natural frequency scale of q;
    // an unbalanced mix (e.g. cos + i sin/w instead of e^{iwx}) degrades
    // the conditioning of everything built on f.
    double qscale = 0;
    for (const auto& z : qv) qscale = std::max(qscale, std::abs(z));
    const double s = std::sqrt(std::max(1.0, qscale));
    std::vector<Complex> gammas;
    if (q_real)
        gammas = {I * s};
    else
        gammas = {I * s,       Complex(s),   -I * s,       2.0 * I * s,
                  Complex(2 * s), -2.0 * I * s, 0.5 * I * s, Complex(0.5 * s),
                  -0.5 * I * s, Complex(-s),  Complex(-2 * s)};
    for (Complex g : gammas) {
        ChebyshevExpansion cand = p1.f + p2.f * g;
        auto [ok, mn] = try_candidate(cand);
        if (ok) {
            if (!q_dips_negative) return finalize_solution(std::move(cand), q, mn);
            double ratio = mn / cand.max_abs();
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best_cand = std::move(cand);
                best_cand_min = mn;
            }
        }
        best_min = std::max(best_min, mn);
    }
    if (best_cand) return finalize_solution(std::move(*best_cand), q, best_cand_min);
    throw construction_error("no non-vanishing particular solution found", best_min);
}

ParticularSolution particular_solution_from_samples(Interval iv, std::span<const Complex> samples,
                                                    const ChebyshevExpansion& q) {
    auto f = ChebyshevExpansion::from_samples(iv, samples);
    Complex f0 = f(iv.lo);
    if (std::abs(f0) < 1e-300) throw construction_error("supplied solution vanishes at 0", 0.0);
    f = f * (1.0 / f0);
    double mn = min_abs_on_interval(f);
    if (mn <= 1e4 * 2.2e-16 * std::max(1.0, f.max_abs()))
        throw construction_error("supplied solution vanishes", mn);
    return finalize_solution(std::move(f), q, mn);
}

namespace {

// The recursion compounds roundoff across N nested integrations, and the
// noise it injects does not decay like x^n at small x. Running the whole
// chain in 80-bit arithmetic and rounding only the final coefficients
// keeps the compounded part below double roundoff for the orders used.
using LReal = long double;
using LComplex = std::complex<LReal>;

struct LGrid {
    LReal lo, hi;
    int M;
    std::vector<LReal> xs;   // descending Lobatto nodes
    std::vector<LReal> cost; // cos(pi j k / M), (M+1)^2

    LGrid(Interval iv, int m) : lo(iv.lo), hi(iv.hi), M(m) {
        const LReal half = (hi - lo) / 2;
        const LReal pi_l = 3.14159265358979323846264338327950288L;
        xs.resize(M + 1);
        cost.resize(static_cast<size_t>(M + 1) * (M + 1));
        for (int k = 0; k <= M; ++k) {
            xs[k] = lo + half * (1 + std::cos(pi_l * k / M));
            for (int j = 0; j <= M; ++j)
                cost[static_cast<size_t>(k) * (M + 1) + j] = std::cos(pi_l * j * k / M);
        }
        xs[0] = hi;
        xs[M] = lo;
    }

    std::vector<LComplex> to_coeffs(const std::vector<LComplex>& v) const {
        std::vector<LComplex> c(M + 1);
        for (int k = 0; k <= M; ++k) {
            LComplex acc = v[0] + (k % 2 == 0 ? v[M] : -v[M]);
            const LReal* row = &cost[static_cast<size_t>(k) * (M + 1)];
            for (int j = 1; j < M; ++j) acc += 2.0L * row[j] * v[j];
            c[k] = acc / static_cast<LReal>(M);
        }
        c[0] *= 0.5L;
        c[M] *= 0.5L;
        return c;
    }

    /// Coefficients of the antiderivative vanishing at the left endpoint.
    std::vector<LComplex> antiderivative(const std::vector<LComplex>& c) const {
        const int n = static_cast<int>(c.size()) - 1;
        const LReal s = (hi - lo) / 2;
        std::vector<LComplex> b(n + 2, LComplex(0));
        auto at = [&](int k) { return k <= n ? c[k] : LComplex(0); };
        b[1] = s * (at(0) - 0.5L * at(2));
        for (int k = 2; k <= n + 1; ++k) b[k] = s * (at(k - 1) - at(k + 1)) / (2.0L * k);
        LComplex left(0);
        for (int k = 1; k <= n + 1; ++k) left += (k % 2 == 0 ? b[k] : -b[k]);
        b[0] = -left;
        return b;
    }

    LComplex eval(const std::vector<LComplex>& c, LReal x) const {
        const LReal xi = 2 * (x - lo) / (hi - lo) - 1;
        LComplex b1(0), b2(0);
        for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
            LComplex b0 = c[k] + 2.0L * xi * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        return c[0] + xi * b1 - b2;
    }

    std::vector<LComplex> eval_at_nodes(const std::vector<LComplex>& c) const {
        std::vector<LComplex> v(M + 1);
        for (int i = 0; i <= M; ++i) v[i] = eval(c, xs[i]);
        return v;
    }
};

ChebyshevExpansion round_to_double(Interval iv, const std::vector<LComplex>& c) {
    std::vector<Complex> d(c.size());
    for (size_t i = 0; i < c.size(); ++i)
        d[i] = Complex(static_cast<double>(c[i].real()), static_cast<double>(c[i].imag()));
    return ChebyshevExpansion(iv, std::move(d));
}

/// Degree of the internal recursion grid. When |f| dips (oscillatory f of
/// a negative potential), 1/f^2 develops sharp spikes whose aliasing at
/// the sampling degree silently corrupts every recursive integral, so the
/// grid is refined until the spectral tail of 1/f^2 has decayed.
int internal_degree(const ParticularSolution& sol) {
    const Interval iv = sol.f.interval();
    for (int M = std::max(sol.f.degree(), 1);; M *= 2) {
        LGrid g(iv, M);
        std::vector<LComplex> v(M + 1);
        for (int i = 0; i <= M; ++i) {
            Complex fx = sol.f(static_cast<double>(g.xs[i]));
            LComplex fl(fx.real(), fx.imag());
            v[i] = 1.0L / (fl * fl);
        }
        auto c = g.to_coeffs(v);
        LReal mx = 0, tail = 0;
        for (int k = 0; k <= M; ++k) mx = std::max(mx, std::abs(c[k]));
        for (int k = M - M / 8; k <= M; ++k) tail = std::max(tail, std::abs(c[k]));
        if (tail <= 1e-13L * mx || M >= 2048) return M;
    }
}

struct Recursion {
    LGrid grid;
    std::vector<std::vector<LComplex>> Xv, Xtv; // values at the nodes
    std::vector<ChebyshevExpansion> X, Xt;      // rounded expansions

    Recursion(const ParticularSolution& sol, int N)
        : grid(sol.f.interval(), internal_degree(sol)) {
        const Interval iv = sol.f.interval();
        const int n = grid.M + 1;
        std::vector<LComplex> f2(n), inv_f2(n);
        for (int i = 0; i < n; ++i) {
            Complex fx = sol.f(static_cast<double>(grid.xs[i]));
            LComplex fl(fx.real(), fx.imag());
            f2[i] = fl * fl;
            inv_f2[i] = 1.0L / f2[i];
        }
        Xv.assign(N + 1, {});
        Xtv.assign(N + 1, {});
        Xv[0].assign(n, LComplex(1));
        Xtv[0].assign(n, LComplex(1));
        X.push_back(ChebyshevExpansion::constant(iv, 1.0));
        Xt.push_back(ChebyshevExpansion::constant(iv, 1.0));
        std::vector<LComplex> ix(n), it(n);
        for (int k = 1; k <= N; ++k) {
            for (int i = 0; i < n; ++i) {
                ix[i] = Xv[k - 1][i] * ((k % 2 == 1) ? inv_f2[i] : f2[i]);
                it[i] = Xtv[k - 1][i] * ((k % 2 == 1) ? f2[i] : inv_f2[i]);
            }
            auto cx = grid.antiderivative(grid.to_coeffs(ix));
            auto ct = grid.antiderivative(grid.to_coeffs(it));
            const LReal kk = static_cast<LReal>(k);
            for (auto& z : cx) z *= kk;
            for (auto& z : ct) z *= kk;
            Xv[k] = grid.eval_at_nodes(cx);
            Xtv[k] = grid.eval_at_nodes(ct);
            X.push_back(round_to_double(iv, cx));
            Xt.push_back(round_to_double(iv, ct));
        }
    }
};

} // namespace

std::pair<std::vector<ChebyshevExpansion>, std::vector<ChebyshevExpansion>>
recursive_integrals(const ParticularSolution& sol, int N) {
    if (N < 0) throw std::invalid_argument("recursive_integrals: N must be >= 0");
    if (!(sol.min_abs_f > 0)) throw nonvanishing_error("recursive_integrals: f vanishes");
    Recursion rec(sol, N);
    return {std::move(rec.X), std::move(rec.Xt)};
}

FormalPowerTable::FormalPowerTable(std::shared_ptr<const ParticularSolution> sol, int N)
    : sol_(std::move(sol)), N_(N) {
    if (N < 0) throw std::invalid_argument("FormalPowerTable: N must be >= 0");
    if (!(sol_->min_abs_f > 0)) throw nonvanishing_error("FormalPowerTable: f vanishes");
    Recursion rec(*sol_, N);
    X_ = std::move(rec.X);
    Xt_ = std::move(rec.Xt);
    const Interval iv = sol_->f.interval();
    const LGrid& grid = rec.grid;
    const int n = grid.M + 1;
    std::vector<LComplex> fv(n), inv_fv(n);
    for (int i = 0; i < n; ++i) {
        Complex fx = sol_->f(static_cast<double>(grid.xs[i]));
        fv[i] = LComplex(fx.real(), fx.imag());
        inv_fv[i] = 1.0L / fv[i];
    }
    phi_.reserve(N + 1);
    psi_.reserve(N + 1);
    std::vector<std::vector<LComplex>> phi_vals(N + 1);
    for (int k = 0; k <= N; ++k) {
        const auto& Xk = (k % 2 == 1) ? rec.Xv[k] : rec.Xtv[k];
        const auto& Xk_psi = (k % 2 == 1) ? rec.Xtv[k] : rec.Xv[k];
        std::vector<LComplex> pv(n), sv(n);
        for (int i = 0; i < n; ++i) {
            pv[i] = fv[i] * Xk[i];
            sv[i] = inv_fv[i] * Xk_psi[i];
        }
        phi_.push_back(round_to_double(iv, grid.to_coeffs(pv)));
        psi_.push_back(round_to_double(iv, grid.to_coeffs(sv)));
        phi_vals[k] = std::move(pv);
    }
    grid_.resize(n);
    for (int i = 0; i < n; ++i) grid_[i] = static_cast<double>(grid.xs[i]);
    tc_ext_.assign(N + 1, {});
    ts_ext_.assign(N + 1, {});
    tc_ext_[0] = phi_vals[0];
    ts_ext_[0].assign(n, LComplex(0));
    // Diagonal traces; binomial weights by multiplicative recurrence.
    traces_c_.reserve(N + 1);
    traces_s_.reserve(N + 1);
    traces_c_.push_back(phi_[0]);
    traces_s_.push_back(ChebyshevExpansion::constant(iv, 0.0));
    for (int m = 1; m <= N; ++m) {
        std::vector<LComplex> cv(n, LComplex(0)), sv(n, LComplex(0));
        for (int i = 0; i < n; ++i) {
            LReal binom = 1, xp = 1;
            for (int k = 0; k <= m; ++k) {
                LComplex term = binom * xp * phi_vals[m - k][i];
                if (k % 2 == 0)
                    cv[i] += term;
                else
                    sv[i] += term;
                binom *= static_cast<LReal>(m - k) / (k + 1);
                xp *= grid.xs[i];
            }
        }
        traces_c_.push_back(round_to_double(iv, grid.to_coeffs(cv)));
        traces_s_.push_back(round_to_double(iv, grid.to_coeffs(sv)));
        tc_ext_[m] = std::move(cv);
        ts_ext_[m] = std::move(sv);
    }
}

Complex FormalPowerTable::trace_c(int m, double x) const {
    if (m == 0) return sol_->f(x);
    Complex acc(0.0);
    double binom = 1.0, xp = 1.0;
    for (int k = 0; k <= m; ++k) {
        if (k % 2 == 0) acc += binom * xp * phi_[m - k](x);
        binom *= static_cast<double>(m - k) / (k + 1);
        xp *= x;
    }
    return acc;
}

Complex FormalPowerTable::trace_s(int m, double x) const {
    Complex acc(0.0);
    double binom = 1.0, xp = 1.0;
    for (int k = 0; k <= m; ++k) {
        if (k % 2 == 1) acc += binom * xp * phi_[m - k](x);
        binom *= static_cast<double>(m - k) / (k + 1);
        xp *= x;
    }
    return acc;
}

SppsSolution spps_solution(const FormalPowerTable& table, Complex lambda, int K) {
    if (2 * K + 1 > table.order())
        throw std::invalid_argument("spps_solution: table order too small for K");
    const Interval iv = table.interval();
    const auto& sol = table.solution();
    const int M = sol.f.degree();
    const auto xs = cheb_nodes(M, iv);
    const int n = static_cast<int>(xs.size());
    std::vector<Complex> ratio(n); // f'/f at the nodes
    for (int i = 0; i < n; ++i) ratio[i] = sol.f_prime(xs[i]) / sol.f(xs[i]);

    std::vector<Complex> y1(n, Complex(0.0)), y2(n, Complex(0.0)), d1(n), d2(n, Complex(0.0));
    for (int i = 0; i < n; ++i) d1[i] = sol.f_prime(xs[i]);
    Complex t = 1.0; // lambda^k/(2k)!
    Complex s = 1.0; // lambda^k/(2k+1)!
    for (int k = 0; k <= K; ++k) {
        if (k > 0) {
            t *= lambda / static_cast<double>((2 * k - 1) * 2 * k);
            s *= lambda / static_cast<double>(2 * k * (2 * k + 1));
        }
        for (int i = 0; i < n; ++i) {
            Complex p_even = table.phi()[2 * k](xs[i]);
            Complex p_odd = table.phi()[2 * k + 1](xs[i]);
            y1[i] += t * p_even;
            y2[i] += s * p_odd;
            if (k > 0)
                d1[i] += t * (ratio[i] * p_even +
                              2.0 * static_cast<double>(k) * table.psi()[2 * k - 1](xs[i]));
            d2[i] += s * (ratio[i] * p_odd +
                          static_cast<double>(2 * k + 1) * table.psi()[2 * k](xs[i]));
        }
    }
    return SppsSolution{
        ChebyshevExpansion::from_samples(iv, y1), ChebyshevExpansion::from_samples(iv, y2),
        ChebyshevExpansion::from_samples(iv, d1), ChebyshevExpansion::from_samples(iv, d2)};
}

namespace {

/// Coefficients in the series parameter of y(b), y'(b) for the solution
/// y = beta0 y1 - (alpha0 + beta0 h) y2 of the left boundary condition.
struct SeriesAtB {
    std::vector<Complex> val, der; // index k
};

SeriesAtB series_at_b(const FormalPowerTable& table, const ConstantBc& bc, int K) {
    const auto& sol = table.solution();
    const double b = table.interval().hi;
    const Complex C = bc.alpha0 + bc.beta0 * sol.h;
    const Complex ratio_b = sol.f_prime(b) / sol.f(b);
    SeriesAtB out;
    out.val.resize(K + 1);
    out.der.resize(K + 1);
    double fact_even = 1.0; // (2k)!
    double fact_odd = 1.0;  // (2k+1)!
    for (int k = 0; k <= K; ++k) {
        if (k > 0) {
            fact_even *= (2.0 * k - 1) * (2.0 * k);
            fact_odd *= (2.0 * k) * (2.0 * k + 1);
        }
        Complex p_even = table.phi()[2 * k](b);
        Complex p_odd = table.phi()[2 * k + 1](b);
        Complex A = p_even / fact_even;
        Complex B = p_odd / fact_odd;
        Complex dA = (k == 0) ? sol.f_prime(b)
                              : (ratio_b * p_even + 2.0 * k * table.psi()[2 * k - 1](b)) / fact_even;
        Complex dB = (ratio_b * p_odd + (2.0 * k + 1) * table.psi()[2 * k](b)) / fact_odd;
        out.val[k] = bc.beta0 * A - C * B;
        out.der[k] = bc.beta0 * dA - C * dB;
    }
    return out;
}

} // namespace

std::vector<Complex> spps_char_roots(const FormalPowerTable& table, const ConstantBc& bc, int K,
                                     double radius) {
    if (K < 1) throw std::invalid_argument("spps_char_roots: K must be >= 1");
    if (2 * K + 1 > table.order())
        throw std::invalid_argument("spps_char_roots: table order too small for K");
    auto sb = series_at_b(table, bc, K);
    // Polynomial in the scaled series parameter z = Lambda/radius, where
    // Lambda = -lambda (the series solves y'' - q y = Lambda y).
    std::vector<Complex> c(K + 1);
    double rk = 1.0;
    for (int k = 0; k <= K; ++k) {
        c[k] = (bc.alphab * sb.val[k] + bc.betab * sb.der[k]) * rk;
        rk *= radius;
    }
    auto zroots = poly_roots(std::move(c));
    std::vector<Complex> out;
    for (Complex z : zroots) {
        Complex lam = -radius * z;
        if (std::abs(lam) <= radius * (1 + 1e-9)) out.push_back(lam);
    }
    std::sort(out.begin(), out.end(),
              [](Complex a, Complex b2) { return std::abs(a) < std::abs(b2); });
    return out;
}

std::vector<Complex> spps_qwell_roots(const FormalPowerTable& table, int K, double beta_max) {
    if (K < 1) throw std::invalid_argument("spps_qwell_roots: K must be >= 1");
    if (2 * K + 1 > table.order())
        throw std::invalid_argument("spps_qwell_roots: table order too small for K");
    // Matching condition for decaying exterior states at omega = i beta:
    // y1'(b) + (beta - h) y2'(b) + beta y1(b) + beta (beta - h) y2(b) = 0,
    // with the series parameter Lambda = beta^2.
    const auto& sol = table.solution();
    const double b = table.interval().hi;
    const Complex h = sol.h;
    const Complex ratio_b = sol.f_prime(b) / sol.f(b);
    std::vector<Complex> A(K + 1), B(K + 1), dA(K + 1), dB(K + 1);
    double fact_even = 1.0, fact_odd = 1.0;
    for (int k = 0; k <= K; ++k) {
        if (k > 0) {
            fact_even *= (2.0 * k - 1) * (2.0 * k);
            fact_odd *= (2.0 * k) * (2.0 * k + 1);
        }
        Complex p_even = table.phi()[2 * k](b);
        Complex p_odd = table.phi()[2 * k + 1](b);
        A[k] = p_even / fact_even;
        B[k] = p_odd / fact_odd;
        dA[k] = (k == 0) ? sol.f_prime(b)
                         : (ratio_b * p_even + 2.0 * k * table.psi()[2 * k - 1](b)) / fact_even;
        dB[k] = (ratio_b * p_odd + (2.0 * k + 1) * table.psi()[2 * k](b)) / fact_odd;
    }
    // Assemble in powers of beta; even powers carry Lambda^k = beta^{2k}.
    const double scale = std::max(beta_max, 1e-6);
    std::vector<Complex> poly(2 * K + 3, Complex(0.0));
    double s2k = 1.0;
    for (int k = 0; k <= K; ++k) {
        double s = s2k; // scale^{2k}
        poly[2 * k] += s * (dA[k] - h * dB[k]);
        poly[2 * k + 1] += s * scale * (dB[k] + A[k] - h * B[k]);
        poly[2 * k + 2] += s * scale * scale * B[k];
        s2k *= scale * scale;
    }
    auto zroots = poly_roots(std::move(poly));
    std::vector<Complex> out;
    for (Complex z : zroots) {
        Complex beta = scale * z;
        if (std::abs(beta.imag()) < 1e-6 * (1 + std::abs(beta)) && beta.real() > 1e-9 &&
            beta.real() < beta_max)
            out.push_back(beta);
    }
    std::sort(out.begin(), out.end(),
              [](Complex a, Complex b2) { return a.real() < b2.real(); });
    return out;
}

SanityRatios sanity_ratio(const FormalPowerTable& table, double x) {
    const Interval iv = table.interval();
    if (!(x > iv.lo) || x > iv.hi + 1e-12 * iv.width())
        throw std::invalid_argument("sanity_ratio: x must lie in (0,b]");
    SanityRatios out;
    const int N = table.order();
    out.ratios.resize(N + 1);
    double rel = x - iv.lo;
    double xp = 1.0;
    for (int k = 0; k <= N; ++k) {
        out.ratios[k] = std::abs(table.phi()[k](x)) / xp;
        xp *= rel;
    }
    for (int k = (3 * N) / 4; k <= N; ++k)
        if (out.ratios[k] < 1e-3 || out.ratios[k] > 1e3) out.flagged = true;
    return out;
}

} // namespace slk
