#pragma once

#include <cmath>
#include <utility>

namespace dephasing::detail {

/// Maximizes f over [lo, hi]: uniform scan with `samples` intervals, then
/// golden-section refinement inside the bracket around the best sample.
/// Returns (argmax, max). A scan point wins ties against the refined point.
template <class F>
std::pair<double, double> maximize_interval(F&& f, double lo, double hi, int samples, double xtol) {
    const double h = (hi - lo) / samples;
    double best_x = lo;
    double best_f = f(lo);
    int best_i = 0;
    for (int i = 1; i <= samples; ++i) {
        const double x = i == samples ? hi : lo + i * h;
        const double v = f(x);
        if (v > best_f) {
            best_f = v;
            best_x = x;
            best_i = i;
        }
    }

    double a = best_i == 0 ? lo : lo + (best_i - 1) * h;
    double b = best_i == samples ? hi : lo + (best_i + 1) * h;
    constexpr double inv_phi = 0.6180339887498948482;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > xtol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    const double v = f(x);
    if (v > best_f) return {x, v};
    return {best_x, best_f};
}

} // namespace dephasing::detail
