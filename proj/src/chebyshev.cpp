#include "slk/chebyshev.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace slk {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// DCT-I plan cache. FFTW planning is not thread-safe; execution on
// caller-owned buffers via the new-array interface is.
class DctPlans {
  public:
    // y_k = x_0 + (-1)^k x_M + 2 sum_{j=1}^{M-1} x_j cos(pi j k / M), in place.
    void run(std::vector<double>& data) {
        const int n = static_cast<int>(data.size());
        fftw_plan plan;
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = plans_.find(n);
            if (it == plans_.end()) {
                std::vector<double> scratch(n);
                plan = fftw_plan_r2r_1d(n, scratch.data(), scratch.data(), FFTW_REDFT00,
                                        FFTW_ESTIMATE);
                plans_.emplace(n, plan);
            } else {
                plan = it->second;
            }
        }
        fftw_execute_r2r(plan, data.data(), data.data());
    }

  private:
    std::mutex mu_;
    std::map<int, fftw_plan> plans_;
};

DctPlans& dct_plans() {
    static DctPlans plans;
    return plans;
}

// Unnormalized DCT-I of complex data (size M+1). Fast path for M = 2^m,
// direct O(M^2) summation otherwise.
std::vector<Complex> dct1(std::span<const Complex> x) {
    const int n = static_cast<int>(x.size());
    const int M = n - 1;
    std::vector<Complex> y(n);
    if (M >= 2 && is_power_of_two(M)) {
        std::vector<double> re(n), im(n);
        for (int j = 0; j < n; ++j) {
            re[j] = x[j].real();
            im[j] = x[j].imag();
        }
        dct_plans().run(re);
        dct_plans().run(im);
        for (int k = 0; k < n; ++k) y[k] = Complex(re[k], im[k]);
        return y;
    }
    const double step = std::numbers::pi / std::max(M, 1);
    for (int k = 0; k < n; ++k) {
        Complex acc = x[0] + (k % 2 == 0 ? x[M] : -x[M]);
        for (int j = 1; j < M; ++j) acc += 2.0 * std::cos(step * j * k) * x[j];
        y[k] = acc;
    }
    return y;
}

} // namespace

std::vector<double> cheb_nodes(int M, Interval iv) {
    if (M < 1) throw std::invalid_argument("cheb_nodes: M must be >= 1");
    if (iv.degenerate()) throw std::invalid_argument("cheb_nodes: degenerate interval");
    std::vector<double> x(M + 1);
    const double half = 0.5 * iv.width();
    for (int k = 0; k <= M; ++k)
        x[k] = iv.lo + half * (1.0 + std::cos(k * std::numbers::pi / M));
    x[0] = iv.hi; // cos rounding must not move the endpoints
    x[M] = iv.lo;
    return x;
}

ChebyshevExpansion::ChebyshevExpansion(Interval iv, std::vector<Complex> coeffs)
    : iv_(iv), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw std::invalid_argument("ChebyshevExpansion: empty coefficients");
    if (iv_.degenerate()) throw std::invalid_argument("ChebyshevExpansion: degenerate interval");
}

ChebyshevExpansion ChebyshevExpansion::constant(Interval iv, Complex value, int degree) {
    std::vector<Complex> c(degree + 1, Complex(0.0));
    c[0] = value;
    return ChebyshevExpansion(iv, std::move(c));
}

ChebyshevExpansion ChebyshevExpansion::from_samples(Interval iv,
                                                    std::span<const Complex> samples) {
    const int M = static_cast<int>(samples.size()) - 1;
    if (M < 1) throw std::invalid_argument("from_samples: need at least two samples");
    std::vector<Complex> c = dct1(samples);
    const double scale = 1.0 / M;
    for (auto& v : c) v *= scale;
    c[0] *= 0.5;
    c[M] *= 0.5;
    return ChebyshevExpansion(iv, std::move(c));
}

ChebyshevExpansion ChebyshevExpansion::from_samples(Interval iv,
                                                    std::span<const double> samples) {
    std::vector<Complex> z(samples.begin(), samples.end());
    return from_samples(iv, z);
}

Complex ChebyshevExpansion::operator()(double x) const {
    const double tol = 1e-12 * iv_.width();
    if (x < iv_.lo - tol || x > iv_.hi + tol)
        throw std::domain_error("ChebyshevExpansion: evaluation outside interval");
    const double xi = std::clamp(2.0 * (x - iv_.lo) / iv_.width() - 1.0, -1.0, 1.0);
    Complex b1(0.0), b2(0.0);
    for (int k = degree(); k >= 1; --k) {
        Complex b0 = coeffs_[k] + 2.0 * xi * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return coeffs_[0] + xi * b1 - b2;
}

std::vector<Complex> ChebyshevExpansion::values_at_nodes() const {
    const int M = degree();
    if (M == 0) return {coeffs_[0]};
    // Inverse of from_samples: same DCT-I with the first/last coefficients doubled.
    std::vector<Complex> c = coeffs_;
    c[0] *= 2.0;
    c[M] *= 2.0;
    std::vector<Complex> v = dct1(c);
    for (auto& x : v) x *= 0.5;
    return v;
}

ChebyshevExpansion ChebyshevExpansion::antiderivative() const {
    const int M = degree();
    const double s = 0.5 * iv_.width();
    std::vector<Complex> b(M + 2, Complex(0.0));
    auto c = [&](int k) -> Complex { return k <= M ? coeffs_[k] : Complex(0.0); };
    b[1] = s * (c(0) - 0.5 * c(2));
    for (int k = 2; k <= M + 1; ++k) b[k] = s * (c(k - 1) - c(k + 1)) / (2.0 * k);
    // Fix the constant so the value at the left endpoint (xi = -1) is exactly 0.
    Complex at_left(0.0);
    for (int k = 1; k <= M + 1; ++k) at_left += (k % 2 == 0 ? b[k] : -b[k]);
    b[0] = -at_left;
    return ChebyshevExpansion(iv_, std::move(b));
}

ChebyshevExpansion ChebyshevExpansion::derivative() const {
    const int M = degree();
    const double inv_s = 2.0 / iv_.width();
    if (M == 0) return constant(iv_, 0.0);
    std::vector<Complex> full(M + 2, Complex(0.0));
    for (int k = M - 1; k >= 0; --k) full[k] = full[k + 2] + 2.0 * (k + 1) * coeffs_[k + 1];
    std::vector<Complex> d(M, Complex(0.0));
    for (int k = 0; k < M; ++k) d[k] = full[k] * inv_s;
    d[0] *= 0.5;
    return ChebyshevExpansion(iv_, std::move(d));
}

ChebyshevExpansion ChebyshevExpansion::operator+(const ChebyshevExpansion& other) const {
    std::vector<Complex> c(std::max(coeffs_.size(), other.coeffs_.size()), Complex(0.0));
    for (size_t k = 0; k < coeffs_.size(); ++k) c[k] += coeffs_[k];
    for (size_t k = 0; k < other.coeffs_.size(); ++k) c[k] += other.coeffs_[k];
    return ChebyshevExpansion(iv_, std::move(c));
}

ChebyshevExpansion ChebyshevExpansion::operator-(const ChebyshevExpansion& other) const {
    return *this + other * Complex(-1.0);
}

ChebyshevExpansion ChebyshevExpansion::operator*(Complex scalar) const {
    std::vector<Complex> c = coeffs_;
    for (auto& v : c) v *= scalar;
    return ChebyshevExpansion(iv_, std::move(c));
}

double ChebyshevExpansion::max_abs() const {
    double m = 0.0;
    for (const auto& v : values_at_nodes()) m = std::max(m, std::abs(v));
    return m;
}

} // namespace slk
