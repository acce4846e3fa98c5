#include "slk/traces.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace slk {

std::pair<ChebyshevExpansion, ChebyshevExpansion> goursat_targets(const ChebyshevExpansion& q,
                                                                  Complex h) {
    auto quarter = q.antiderivative() * Complex(0.25);
    auto g1 = quarter + ChebyshevExpansion::constant(q.interval(), 0.5 * h);
    return {std::move(g1), std::move(quarter)};
}

namespace {

struct FitResult {
    std::vector<Complex> coeffs; // length N, indices 1..N
    double eps;
    int rank;
};

/// Equilibrated min-norm least squares for one trace family. Rows are
/// weighted by 1/max(1,|f|): every trace column carries a factor of f,
/// so the weighting keeps growing particular solutions from drowning the
/// small-x information. The reported residual is unweighted.
FitResult fit_one(const FormalPowerTable& table, const std::vector<Complex>& target,
                  std::span<const double> grid, int N, bool cosine_family) {
    const int rows = static_cast<int>(grid.size());
    const auto& f = table.solution().f;
    Eigen::VectorXd w(rows);
    for (int i = 0; i < rows; ++i) w(i) = 1.0 / std::max(1.0, std::abs(f(grid[i])));

    Eigen::MatrixXcd A(rows, N);
    for (int n = 1; n <= N; ++n)
        for (int i = 0; i < rows; ++i)
            A(i, n - 1) =
                w(i) * (cosine_family ? table.trace_c(n, grid[i]) : table.trace_s(n, grid[i]));

    Eigen::VectorXd scale(N);
    for (int n = 0; n < N; ++n) {
        double s = A.col(n).norm();
        scale(n) = (s > 0) ? 1.0 / s : 1.0;
        A.col(n) *= scale(n);
    }
    Eigen::VectorXcd rhs(rows);
    for (int i = 0; i < rows; ++i) rhs(i) = w(i) * target[i];

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-14);
    int rank = static_cast<int>(svd.rank());
    if (2 * rank < N)
        throw conditioning_error("trace fit rank-deficient; lower the order", rank);
    Eigen::VectorXcd y = svd.solve(rhs);

    FitResult out;
    out.rank = rank;
    out.coeffs.resize(N);
    for (int n = 0; n < N; ++n) out.coeffs[n] = y(n) * scale(n);
    Eigen::VectorXcd resid = A * y - rhs;
    out.eps = (resid.cwiseQuotient(w.cast<Complex>())).lpNorm<Eigen::Infinity>();
    return out;
}

using LComplex = std::complex<long double>;
using MatrixXlcd = Eigen::Matrix<LComplex, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXlcd = Eigen::Matrix<LComplex, Eigen::Dynamic, 1>;

/// Extended-precision variant on the construction grid: the trace values
/// carry 80-bit accuracy there, so the SVD cutoff can sit well below
/// double roundoff and the attainable residual drops accordingly.
FitResult fit_one_ext(const FormalPowerTable& table, const std::vector<Complex>& target, int N,
                      bool cosine_family) {
    const auto& tr = cosine_family ? table.traces_c_ext() : table.traces_s_ext();
    const auto& fv = table.traces_c_ext()[0];
    const int rows = static_cast<int>(fv.size());
    Eigen::Matrix<long double, Eigen::Dynamic, 1> w(rows);
    for (int i = 0; i < rows; ++i) w(i) = 1.0L / std::max<long double>(1.0L, std::abs(fv[i]));

    MatrixXlcd A(rows, N);
    for (int n = 1; n <= N; ++n)
        for (int i = 0; i < rows; ++i) A(i, n - 1) = w(i) * tr[n][i];
    Eigen::Matrix<long double, Eigen::Dynamic, 1> scale(N);
    for (int n = 0; n < N; ++n) {
        long double s = A.col(n).norm();
        scale(n) = (s > 0) ? 1.0L / s : 1.0L;
        A.col(n) *= scale(n);
    }
    VectorXlcd rhs(rows);
    for (int i = 0; i < rows; ++i) rhs(i) = w(i) * LComplex(target[i].real(), target[i].imag());

    Eigen::JacobiSVD<MatrixXlcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-17L);
    int rank = static_cast<int>(svd.rank());
    if (2 * rank < N)
        throw conditioning_error("trace fit rank-deficient; lower the order", rank);
    VectorXlcd y = svd.solve(rhs);

    FitResult out;
    out.rank = rank;
    out.coeffs.resize(N);
    for (int n = 0; n < N; ++n) {
        LComplex c = y(n) * scale(n);
        out.coeffs[n] = Complex(static_cast<double>(c.real()), static_cast<double>(c.imag()));
    }
    VectorXlcd resid = A * y - rhs;
    long double mx = 0;
    for (int i = 0; i < rows; ++i) mx = std::max(mx, std::abs(resid(i)) / w(i));
    out.eps = static_cast<double>(mx);
    return out;
}

} // namespace

KernelApproximation fit_kernel(std::shared_ptr<const FormalPowerTable> table,
                               const ChebyshevExpansion& g1, const ChebyshevExpansion& g2, int N,
                               std::span<const double> grid) {
    if (N < 1 || N > table->order()) throw std::invalid_argument("fit_kernel: bad order");
    if (static_cast<int>(grid.size()) < 2 * (N + 1))
        throw std::invalid_argument("fit_kernel: grid too small");
    const Complex h = table->solution().h;

    std::vector<Complex> t1(grid.size()), t2(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        t1[i] = g1(grid[i]) - 0.5 * h * table->trace_c(0, grid[i]);
        t2[i] = g2(grid[i]);
    }
    auto r1 = fit_one(*table, t1, grid, N, true);
    auto r2 = fit_one(*table, t2, grid, N, false);

    KernelApproximation out;
    out.N = N;
    out.h = h;
    out.table = std::move(table);
    out.a.resize(N + 1);
    out.b.resize(N + 1);
    out.a[0] = 0.5 * h;
    out.b[0] = 0.5 * h;
    for (int n = 1; n <= N; ++n) {
        out.a[n] = r1.coeffs[n - 1];
        out.b[n] = r2.coeffs[n - 1];
    }
    out.eps1 = r1.eps;
    out.eps2 = r2.eps;
    return out;
}

KernelApproximation fit_kernel(std::shared_ptr<const FormalPowerTable> table,
                               const ChebyshevExpansion& g1, const ChebyshevExpansion& g2,
                               int N) {
    if (N < 1 || N > table->order()) throw std::invalid_argument("fit_kernel: bad order");
    const Complex h = table->solution().h;
    const auto& grid = table->grid();
    std::vector<Complex> t1(grid.size()), t2(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        t1[i] = g1(grid[i]) - 0.5 * h * table->trace_c(0, grid[i]);
        t2[i] = g2(grid[i]);
    }
    auto r1 = fit_one_ext(*table, t1, N, true);
    auto r2 = fit_one_ext(*table, t2, N, false);

    KernelApproximation out;
    out.N = N;
    out.h = h;
    out.table = std::move(table);
    out.a.resize(N + 1);
    out.b.resize(N + 1);
    out.a[0] = 0.5 * h;
    out.b[0] = 0.5 * h;
    for (int n = 1; n <= N; ++n) {
        out.a[n] = r1.coeffs[n - 1];
        out.b[n] = r2.coeffs[n - 1];
    }
    out.eps1 = r1.eps;
    out.eps2 = r2.eps;
    return out;
}

} // namespace slk
