#pragma once

#include <span>
#include <vector>

#include "slk/types.hpp"

namespace slk {

/// Chebyshev–Lobatto abscissas (b-a)/2*(1+cos(k*pi/M)) + a, k = 0..M.
/// Returned in descending order; every routine in this library keeps
/// this ordering.
std::vector<double> cheb_nodes(int M, Interval iv);

/// A function on [a,b] represented by first-kind Chebyshev coefficients
/// c_0..c_M (basis mapped affinely to the interval). Immutable.
class ChebyshevExpansion {
  public:
    ChebyshevExpansion(Interval iv, std::vector<Complex> coeffs);

    static ChebyshevExpansion constant(Interval iv, Complex value, int degree = 0);

    /// Interpolant through samples taken at cheb_nodes(samples.size()-1, iv).
    static ChebyshevExpansion from_samples(Interval iv, std::span<const Complex> samples);
    static ChebyshevExpansion from_samples(Interval iv, std::span<const double> samples);

    const Interval& interval() const { return iv_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<Complex>& coeffs() const { return coeffs_; }

    /// Clenshaw evaluation. x may stray outside the interval by at most
    /// 1e-12 * width (it gets clamped); beyond that a domain error is thrown.
    Complex operator()(double x) const;

    /// Samples at cheb_nodes(degree(), interval()).
    std::vector<Complex> values_at_nodes() const;

    /// x -> integral of this from the left endpoint to x. Degree grows by one;
    /// the value at the left endpoint is exactly zero.
    ChebyshevExpansion antiderivative() const;

    /// Coefficientwise spectral derivative.
    ChebyshevExpansion derivative() const;

    ChebyshevExpansion operator+(const ChebyshevExpansion& other) const;
    ChebyshevExpansion operator-(const ChebyshevExpansion& other) const;
    ChebyshevExpansion operator*(Complex scalar) const;

    double max_abs() const; // max |value| over the nodes

  private:
    Interval iv_;
    std::vector<Complex> coeffs_;
};

/// Spec name for ChebyshevExpansion::from_samples.
inline ChebyshevExpansion to_expansion(Interval iv, std::span<const Complex> samples) {
    return ChebyshevExpansion::from_samples(iv, samples);
}

} // namespace slk
