#include "slk/nsbf.hpp"

#include <algorithm>
#include <cmath>

namespace slk {

namespace {

constexpr double kUnitRoundoff = 2.220446049250313e-16;

/// Scaled moments m_k = C_k/x^{k+1}, n_k = S_k/x^{k+2} with
/// C_k = int t^k cos(wt), S_k = int t^k sin(wt)/w. Working with the
/// scaled pair keeps every intermediate O(1) regardless of how deep the
/// downward recursion has to start.
struct ScaledMoments {
    std::vector<Complex> m, n;
};

void series_single(Complex w2x2, double x, int k, Complex& mk, Complex& nk) {
    // m_k = sum_j (-w^2 x^2)^j / ((2j)! (k+2j+1)),
    // n_k = sum_j (-w^2 x^2)^j / ((2j+1)! (k+2j+2)); both scaled by 1.
    Complex p(1.0), q(1.0);
    Complex accm = p / double(k + 1), accn = q / double(k + 2);
    for (int j = 1; j < 400; ++j) {
        p *= -w2x2 / double((2 * j - 1) * (2 * j));
        q *= -w2x2 / double((2 * j) * (2 * j + 1));
        Complex tm = p / double(k + 2 * j + 1), tn = q / double(k + 2 * j + 2);
        accm += tm;
        accn += tn;
        if (std::abs(tm) <= kUnitRoundoff * std::abs(accm) &&
            std::abs(tn) <= kUnitRoundoff * std::abs(accn))
            break;
    }
    (void)x;
    mk = accm;
    nk = accn;
}

ScaledMoments scaled_moments(Complex omega, double x, int k_max, MomentBranch branch) {
    ScaledMoments out;
    out.m.resize(k_max + 1);
    out.n.resize(k_max + 1);
    const Complex w2x2 = omega * omega * x * x;
    const double r = std::abs(omega) * x;

    bool use_series;
    switch (branch) {
        case MomentBranch::Series: use_series = true; break;
        case MomentBranch::Recurrence: use_series = false; break;
        default:
            // The series cancels like e^{|Re w| x} against a result of size
            // e^{|Im w| x}; it is safe when the exponent gap is small.
            use_series = r < 0.5 || (std::abs(omega.real()) - std::abs(omega.imag())) * x <= 8.0;
    }

    if (use_series) {
        for (int k = 0; k <= k_max; ++k) series_single(w2x2, x, k, out.m[k], out.n[k]);
        return out;
    }

    const Complex wx = omega * x;
    const Complex cosv = std::cos(wx);
    const Complex sinc = std::sin(wx) / wx; // sin(wx)/(w x), O(1)
    // Upward is stable while k stays below |w x|.
    const int k_up = std::min(k_max, static_cast<int>(std::floor(r)));
    out.m[0] = sinc;
    out.n[0] = (1.0 - cosv) / w2x2;
    for (int k = 1; k <= k_up; ++k) {
        out.m[k] = sinc - double(k) * out.n[k - 1];
        out.n[k] = (-cosv + double(k) * out.m[k - 1]) / w2x2;
    }
    if (k_up < k_max) {
        // Downward pass seeded with zeros high enough that the seed error
        // has contracted below roundoff by the time it reaches k_max.
        double contraction = 0;
        int kstar = k_max + 2;
        while (contraction < 42.0 && kstar < k_max + 700) {
            contraction += std::log(double(kstar) / r);
            ++kstar;
        }
        std::vector<Complex> dm(kstar + 1, Complex(0.0)), dn(kstar + 1, Complex(0.0));
        for (int k = kstar; k > k_up; --k) {
            dn[k - 1] = (sinc - dm[k]) / double(k);
            dm[k - 1] = (w2x2 * dn[k] + cosv) / double(k);
        }
        // dm/dn are the scaled moments themselves (the inhomogeneous terms
        // regenerate the solution as the seed error contracts).
        for (int k = k_up + 1; k <= k_max; ++k) {
            out.m[k] = dm[k];
            out.n[k] = dn[k];
        }
    }
    return out;
}

} // namespace

TrigMoments trig_moments_branch(Complex omega, double x, int k_max, MomentBranch branch) {
    if (k_max < 0) throw std::invalid_argument("trig_moments: k_max must be >= 0");
    if (x < 0) throw std::invalid_argument("trig_moments: x must be >= 0");
    TrigMoments out;
    out.omega = omega;
    out.x = x;
    out.sin_moments.assign(k_max + 1, Complex(0.0));
    out.cos_moments.assign(k_max + 1, Complex(0.0));
    out.sin_over_omega.assign(k_max + 1, Complex(0.0));
    if (x == 0) return out;
    auto sm = scaled_moments(omega, x, k_max, branch);
    double xk1 = x; // x^{k+1}
    for (int k = 0; k <= k_max; ++k) {
        out.cos_moments[k] = sm.m[k] * xk1;
        out.sin_over_omega[k] = sm.n[k] * xk1 * x;
        out.sin_moments[k] = omega * out.sin_over_omega[k];
        xk1 *= x;
    }
    return out;
}

TrigMoments trig_moments(Complex omega, double x, int k_max) {
    return trig_moments_branch(omega, x, k_max, MomentBranch::Auto);
}

SolutionBasis::SolutionBasis(KernelApproximation kernel) : kernel_(std::move(kernel)) {
    const auto& table = *kernel_.table;
    const double b = table.interval().hi;
    const int N = table.order();
    phi_b_.resize(N + 1);
    psi_b_.resize(N + 1);
    for (int k = 0; k <= N; ++k) {
        phi_b_[k] = table.phi()[k](b);
        psi_b_[k] = table.psi()[k](b);
    }
    const auto& sol = table.solution();
    ratio_b_ = sol.f_prime(b) / sol.f(b);
    binom_.resize(kernel_.N + 1);
    for (int n = 0; n <= kernel_.N; ++n) {
        binom_[n].resize(n + 1);
        binom_[n][0] = 1.0;
        for (int k = 1; k <= n; ++k) binom_[n][k] = binom_[n][k - 1] * double(n - k + 1) / k;
    }
}

SolutionBasis::Eval SolutionBasis::eval_all(Complex omega, double x) const {
    const Interval iv = interval();
    if (!iv.contains(x, 1e-12 * iv.width()))
        throw std::domain_error("SolutionBasis: x outside the interval");
    x = std::clamp(x, iv.lo, iv.hi);
    const int N = kernel_.N;
    const auto& table = *kernel_.table;
    const bool at_b = (x == iv.hi);

    Eval out;
    if (x == iv.lo) {
        out.c = 1.0;
        out.s = 0.0;
        out.dc = kernel_.h;
        out.ds = 1.0;
        return out;
    }

    auto mom = trig_moments(omega, x, N);
    const Complex wx = omega * x;
    const Complex cosv = std::cos(wx);
    const Complex sincv = (std::abs(wx) < 1e-8)
                              ? x * (1.0 - wx * wx / 6.0)
                              : std::sin(wx) / omega; // sin(wx)/w, entire limit at 0

    std::vector<Complex> phis(N + 1), psis(N + 1);
    for (int k = 0; k <= N; ++k) {
        phis[k] = at_b ? phi_b_[k] : table.phi()[k](x);
        psis[k] = at_b ? psi_b_[k] : table.psi()[k](x);
    }
    const auto& sol = table.solution();
    const Complex ratio = at_b ? ratio_b_ : sol.f_prime(x) / sol.f(x);

    Complex ac(0.0), as(0.0), adc(0.0), ads(0.0);
    for (int n = 0; n <= N; ++n) {
        Complex even_phi(0.0), odd_phi(0.0), even_psi(0.0), odd_psi(0.0);
        for (int k = 0; k <= n; ++k) {
            const double w = binom_[n][k];
            if (k % 2 == 0) {
                even_phi += w * phis[n - k] * mom.cos_moments[k];
                even_psi += w * psis[n - k] * mom.cos_moments[k];
            } else {
                odd_phi += w * phis[n - k] * mom.sin_over_omega[k];
                odd_psi += w * psis[n - k] * mom.sin_over_omega[k];
            }
        }
        ac += kernel_.a[n] * even_phi;
        as += kernel_.b[n] * odd_phi;
        adc += kernel_.a[n] * odd_psi;
        ads += kernel_.b[n] * even_psi;
    }
    const Complex w2 = omega * omega;
    out.c = cosv + 2.0 * ac;
    out.s = sincv + 2.0 * as;
    out.dc = -w2 * sincv + 2.0 * w2 * adc + ratio * out.c;
    out.ds = cosv - 2.0 * ads + ratio * out.s;
    return out;
}

Complex SolutionBasis::c(Complex omega, double x) const { return eval_all(omega, x).c; }
Complex SolutionBasis::s(Complex omega, double x) const { return eval_all(omega, x).s; }
Complex SolutionBasis::dc(Complex omega, double x) const { return eval_all(omega, x).dc; }
Complex SolutionBasis::ds(Complex omega, double x) const { return eval_all(omega, x).ds; }

Complex SolutionBasis::kernel_eval(double x, double t, Kernel which) const {
    const Interval iv = interval();
    const double tol = 1e-12 * iv.width();
    if (std::abs(t) > std::abs(x) + tol || std::abs(x) > iv.hi + tol)
        throw std::domain_error("kernel_eval: outside the triangle |t| <= |x| <= b");
    const int N = kernel_.N;
    const auto& table = *kernel_.table;
    std::vector<Complex> phis(N + 1), psis(N + 1);
    for (int k = 0; k <= N; ++k) {
        phis[k] = table.phi()[k](x);
        psis[k] = table.psi()[k](x);
    }
    // u_{2n-1} collects even powers of t with phi, u_{2n} odd powers;
    // v swaps the parity roles and uses psi.
    Complex acc(0.0);
    for (int n = 0; n <= N; ++n) {
        Complex even_phi(0.0), odd_phi(0.0), even_psi(0.0), odd_psi(0.0);
        double tk = 1.0;
        for (int k = 0; k <= n; ++k) {
            const double w = binom_[n][k] * tk;
            if (k % 2 == 0) {
                even_phi += w * phis[n - k];
                even_psi += w * psis[n - k];
            } else {
                odd_phi += w * phis[n - k];
                odd_psi += w * psis[n - k];
            }
            tk *= t;
        }
        switch (which) {
            case Kernel::Kf: acc += kernel_.a[n] * even_phi + kernel_.b[n] * odd_phi; break;
            case Kernel::C:
                acc += 2.0 * kernel_.a[n] * even_phi;
                break;
            case Kernel::S:
                if (n >= 1) acc += 2.0 * kernel_.b[n] * odd_phi;
                break;
            case Kernel::K1f:
                acc -= kernel_.a[n] * odd_psi + kernel_.b[n] * even_psi;
                break;
        }
    }
    return acc;
}

} // namespace slk
