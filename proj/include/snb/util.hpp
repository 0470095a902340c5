#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace snb::util {

/// Trapezoid rule on a uniform grid, fixed left-to-right summation order.
inline double trapz(std::span<const double> f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t k = 1; k + 1 < f.size(); ++k) s += f[k];
    return s * h;
}

/// Cumulative trapezoid: out[k] = integral of f over [x0, x0 + k h].
inline void cumtrapz(std::span<const double> f, double h, std::span<double> out) {
    out[0] = 0.0;
    for (std::size_t k = 1; k < f.size(); ++k)
        out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
}

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms = 0.0; // rms residual of the fit
};

/// Least-squares straight line y = intercept + slope * x.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / double(n), my = sy / double(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double rr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - out.intercept - out.slope * x[i];
        rr += e * e;
    }
    out.rms = std::sqrt(rr / double(n));
    return out;
}

/// Golden-section maximizer of f on [a, b].
inline double golden_max(const std::function<double(double)>& f, double a, double b,
                         double xtol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > xtol) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// FNV-1a 64-bit hash, used for cache-file checksums.
inline std::uint64_t fnv1a(std::span<const char> data) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

/// Cubic Hermite interpolation on [0, h] given endpoint values and derivatives.
inline double hermite(double t, double h, double y0, double y1, double d0, double d1) {
    const double s = t / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 +
           (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

/// Derivative of the cubic Hermite interpolant above.
inline double hermite_deriv(double t, double h, double y0, double y1, double d0, double d1) {
    const double s = t / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * h * d0 +
            (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * h * d1) / h;
}

/// Simple xorshift RNG for reproducible property tests (seeded from config).
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed = 12345) : state(seed ? seed : 1) {}
    std::uint64_t next() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    }
    /// Uniform in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

} // namespace snb::util
