#pragma once
// Independent reference computations used by the tests. Nothing here calls
// into the library.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

/// sum_n x_n exp(+2 pi i k n / N) * delta, evaluated term by term.
inline cplx direct_dft(const std::vector<cplx>& x, long k, double delta) {
    const double n = static_cast<double>(x.size());
    cplx acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double ph = 2.0 * std::numbers::pi * static_cast<double>(k) * static_cast<double>(j) / n;
        acc += x[j] * cplx(std::cos(ph), std::sin(ph));
    }
    return acc * delta;
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14) {
    double flo = f(lo);
    for (int i = 0; i < 400 && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Midpoint rule over R^2 after w = tan(t) in each coordinate.
inline double integrate_plane(const std::function<double(double, double)>& f, int n) {
    const double h = std::numbers::pi / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t1 = -0.5 * std::numbers::pi + (i + 0.5) * h;
        const double w1 = std::tan(t1), j1 = 1.0 / (std::cos(t1) * std::cos(t1));
        for (int k = 0; k < n; ++k) {
            const double t2 = -0.5 * std::numbers::pi + (k + 0.5) * h;
            acc += f(w1, std::tan(t2)) * j1 / (std::cos(t2) * std::cos(t2));
        }
    }
    return acc * h * h;
}

/// Linear OPO signal spectra, external, vacuum = 1.
inline double linear_vy(double mu, double w) { return 1.0 - 4.0 * mu / ((1 + mu) * (1 + mu) + w * w); }
inline double linear_vx(double mu, double w) { return 1.0 + 4.0 * mu / ((1 - mu) * (1 - mu) + w * w); }

/// Stationary variance of dx = -k x dt + sqrt(D) dW.
inline double ou_variance(double k, double D) { return D / (2.0 * k); }

}  // namespace oracle
