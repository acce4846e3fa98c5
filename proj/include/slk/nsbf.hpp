#pragma once

#include <memory>
#include <vector>

#include "slk/traces.hpp"

namespace slk {

/// Moment integrals int_0^x t^k sin(wt) dt and int_0^x t^k cos(wt) dt,
/// k = 0..k_max, plus the entire-in-w family int_0^x t^k sin(wt)/w dt
/// that the solution formulas actually consume (finite at w = 0).
struct TrigMoments {
    Complex omega;
    double x = 0;
    std::vector<Complex> sin_moments, cos_moments, sin_over_omega;
};

TrigMoments trig_moments(Complex omega, double x, int k_max);

/// Branch override for consistency testing; Auto is what trig_moments does.
enum class MomentBranch { Auto, Series, Recurrence };
TrigMoments trig_moments_branch(Complex omega, double x, int k_max, MomentBranch branch);

/// Evaluator of the approximate solutions built from a kernel coefficient
/// fit. Immutable; all evaluations are pure.
class SolutionBasis {
  public:
    explicit SolutionBasis(KernelApproximation kernel);

    const KernelApproximation& kernel() const { return kernel_; }
    const FormalPowerTable& table() const { return *kernel_.table; }
    const Interval& interval() const { return kernel_.table->interval(); }

    /// c(w,x): solution of the spectral equation with value 1 and
    /// derivative h at 0; c(w,0) = 1 exactly.
    Complex c(Complex omega, double x) const;
    /// s(w,x): solution with value 0 and derivative 1 at 0; entire in w.
    Complex s(Complex omega, double x) const;
    /// Derivative surrogates built from the transposed kernel; these
    /// approximate c' and s' but are not pointwise derivatives of c and s.
    Complex dc(Complex omega, double x) const;
    Complex ds(Complex omega, double x) const;

    struct Eval {
        Complex c, s, dc, ds;
    };
    /// All four values sharing one moment computation.
    Eval eval_all(Complex omega, double x) const;

    enum class Kernel { Kf, K1f, C, S };
    /// Diagnostic kernel evaluation on the triangle |t| <= |x| <= b.
    Complex kernel_eval(double x, double t, Kernel which) const;

  private:
    KernelApproximation kernel_;
    std::vector<Complex> phi_b_, psi_b_; // cached values at x = b
    std::vector<std::vector<double>> binom_;
    Complex ratio_b_; // f'/f at b
};

} // namespace slk
