#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "slk/spps.hpp"

namespace slk {

/// Coefficients of the kernel approximation by generalized wave
/// polynomials, together with the achieved fit errors.
struct KernelApproximation {
    int N = 0;
    std::vector<Complex> a, b; // a[0] = b[0] = h/2 by construction
    double eps1 = 0, eps2 = 0; // max residual over the fit grid
    Complex h;
    std::shared_ptr<const FormalPowerTable> table;
};

/// Goursat data of the kernel: g1 = h/2 + (1/4) int_0^x q,
/// g2 = (1/4) int_0^x q.
std::pair<ChebyshevExpansion, ChebyshevExpansion> goursat_targets(const ChebyshevExpansion& q,
                                                                  Complex h);

/// Least-squares fit of g1 - (h/2) c_0 against the trace columns c_1..c_N
/// and of g2 against s_1..s_N on the given grid. Columns are norm
/// equilibrated; the solve is a min-norm SVD solution. Throws a
/// conditioning error when more than half the columns fall below the
/// rank threshold.
KernelApproximation fit_kernel(std::shared_ptr<const FormalPowerTable> table,
                               const ChebyshevExpansion& g1, const ChebyshevExpansion& g2, int N,
                               std::span<const double> grid);

/// Same fit on the default grid (the Chebyshev nodes of the working
/// expansion).
KernelApproximation fit_kernel(std::shared_ptr<const FormalPowerTable> table,
                               const ChebyshevExpansion& g1, const ChebyshevExpansion& g2, int N);

} // namespace slk
