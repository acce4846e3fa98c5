#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace slk {

using Complex = std::complex<double>;

/// Closed interval [lo, hi] on the real line.
struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double width() const { return hi - lo; }
    bool degenerate() const { return !(hi > lo); }
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

/// A non-vanishing particular solution could not be constructed.
class construction_error : public std::runtime_error {
  public:
    construction_error(const std::string& msg, double min_abs_f)
        : std::runtime_error(msg), min_abs_f(min_abs_f) {}
    double min_abs_f;
};

/// Least-squares system lost too many columns to rank deficiency.
class conditioning_error : public std::runtime_error {
  public:
    conditioning_error(const std::string& msg, int effective_rank)
        : std::runtime_error(msg), effective_rank(effective_rank) {}
    int effective_rank;
};

/// The particular solution vanished at a node where it must not.
class nonvanishing_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace slk
