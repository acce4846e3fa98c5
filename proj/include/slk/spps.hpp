#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "slk/chebyshev.hpp"

namespace slk {

/// Non-vanishing solution of f'' = q f with f(0) = 1, h = f'(0).
struct ParticularSolution {
    ChebyshevExpansion f;
    ChebyshevExpansion f_prime;
    Complex h;
    double min_abs_f = 0.0; // min |f| over the nodes, recorded at construction
};

/// Builds f by Picard iteration on f = init + int int q f. For real q the
/// first basis solution is tried alone; if it vanishes somewhere the
/// combination f1 + i f2 is used. For complex q a fixed sweep of
/// f1 + gamma f2 candidates is tried.
ParticularSolution particular_solution(const ChebyshevExpansion& q);

/// Accepts caller-supplied samples of a known solution at the Chebyshev
/// nodes of the interval (values normalized so f(0) = 1 internally).
ParticularSolution particular_solution_from_samples(Interval iv,
                                                   std::span<const Complex> samples,
                                                   const ChebyshevExpansion& q);

/// X and Xt satisfy X(0) = Xt(0) = 1 and
/// X(n) = n * int_0^x X(n-1) (f^2)^((-1)^n), Xt analogously with the
/// opposite exponent parity.
std::pair<std::vector<ChebyshevExpansion>, std::vector<ChebyshevExpansion>>
recursive_integrals(const ParticularSolution& f, int N);

/// Formal powers phi_k, psi_k and the diagonal traces built from them,
/// all to order N. Immutable.
class FormalPowerTable {
  public:
    FormalPowerTable(std::shared_ptr<const ParticularSolution> sol, int N);

    int order() const { return N_; }
    const ParticularSolution& solution() const { return *sol_; }
    std::shared_ptr<const ParticularSolution> solution_ptr() const { return sol_; }
    const Interval& interval() const { return sol_->f.interval(); }

    const std::vector<ChebyshevExpansion>& X() const { return X_; }
    const std::vector<ChebyshevExpansion>& Xt() const { return Xt_; }
    const std::vector<ChebyshevExpansion>& phi() const { return phi_; }
    const std::vector<ChebyshevExpansion>& psi() const { return psi_; }
    const std::vector<ChebyshevExpansion>& traces_c() const { return traces_c_; }
    const std::vector<ChebyshevExpansion>& traces_s() const { return traces_s_; }

    /// Direct (alias-free) trace evaluation from the formal powers.
    /// trace_c(m,x) = sum over even k<=m of binom(m,k) x^k phi_{m-k}(x);
    /// trace_s sums over odd k. trace_c(0,x) = f(x).
    Complex trace_c(int m, double x) const;
    Complex trace_s(int m, double x) const;

    using ExtComplex = std::complex<long double>;
    /// Trace values on the construction grid (descending nodes), kept in
    /// the 80-bit precision of the recursion; rounding them to double
    /// before the kernel fit caps the attainable fit accuracy.
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<std::vector<ExtComplex>>& traces_c_ext() const { return tc_ext_; }
    const std::vector<std::vector<ExtComplex>>& traces_s_ext() const { return ts_ext_; }

  private:
    std::shared_ptr<const ParticularSolution> sol_;
    int N_;
    std::vector<ChebyshevExpansion> X_, Xt_, phi_, psi_, traces_c_, traces_s_;
    std::vector<double> grid_;
    std::vector<std::vector<ExtComplex>> tc_ext_, ts_ext_;
};

/// Truncated spectral parameter power series around Lambda = 0 for
/// y'' - q y = Lambda y. Returns y1, y2 and the series for their
/// derivatives; initial values y1(0)=1, y1'(0)=h, y2(0)=0, y2'(0)=1.
struct SppsSolution {
    ChebyshevExpansion y1, y2, dy1, dy2;
};
SppsSolution spps_solution(const FormalPowerTable& table, Complex lambda_series, int K);

/// Constant boundary condition coefficients for the characteristic
/// polynomial route: alpha0 y(0) + beta0 y'(0) = 0, alphab y(b) + betab y'(b) = 0.
struct ConstantBc {
    Complex alpha0, beta0, alphab, betab;
};

/// Roots of the degree-K characteristic polynomial in the spectral
/// parameter, found via companion-matrix eigenvalues. Only roots with
/// |lambda| <= radius are returned (the truncation is trusted near the
/// origin only), sorted by |lambda|. Sign convention: returned lambda
/// solve -y'' + q y = lambda y.
std::vector<Complex> spps_char_roots(const FormalPowerTable& table, const ConstantBc& bc, int K,
                                     double radius);

/// Quantum-well helper: roots beta in (0, beta_max) of the half-line
/// matching condition y1'(b) + (beta - h) y2'(b) + beta y1(b)
/// + beta (beta - h) y2(b), a polynomial of degree 2K+2 in beta
/// (bound-state energies are -beta^2).
std::vector<Complex> spps_qwell_roots(const FormalPowerTable& table, int K, double beta_max);

/// |phi_k(x)/x^k| for k = 0..N; flagged when the last quartile drifts
/// outside [1e-3, 1e3].
struct SanityRatios {
    std::vector<double> ratios;
    bool flagged = false;
};
SanityRatios sanity_ratio(const FormalPowerTable& table, double x);

} // namespace slk
