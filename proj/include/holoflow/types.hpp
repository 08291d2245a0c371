#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <thread>

namespace holoflow {

using Complex = std::complex<double>;

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Axis-aligned rectangle in the complex plane.
struct Window {
    double xmin = -1, ymin = -1, xmax = 1, ymax = 1;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double diameter() const { return std::hypot(width(), height()); }
    Complex center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    bool valid() const { return xmin < xmax && ymin < ymax; }
    bool contains(Complex z, double margin = 0.0) const {
        return z.real() > xmin + margin && z.real() < xmax - margin &&
               z.imag() > ymin + margin && z.imag() < ymax - margin;
    }
    Window dilated(double factor) const {
        double dx = 0.5 * width() * factor, dy = 0.5 * height() * factor;
        return {xmin - dx, ymin - dy, xmax + dx, ymax + dy};
    }
};

inline bool complex_less(Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

/// Worker count: hardware concurrency capped by the HOLOFLOW_THREADS env var.
int worker_count();

/// Chunked parallel loop over [0, n); body(i) must only touch slot i state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  int threads = 0);

}  // namespace holoflow
