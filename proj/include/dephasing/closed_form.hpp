#pragma once

// Analytic optima of the unconstrained (and, for the qubit, energy
// constrained) discrimination problem in dimensions 2, 3 and 4.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "dephasing/channel.hpp"
#include "dephasing/detail/line_search.hpp"
#include "dephasing/errors.hpp"

namespace dephasing {

/// g-values below this are treated as exact zeros.
inline constexpr double kGapFlush = 1e-300;
/// |(g1 - g2)^2 - g1 g3| below this evaluates both qutrit-like branches.
inline constexpr double kRegionTieTol = 1e-13;
inline constexpr double kImagResidualTol = 1e-9;
inline constexpr double kAlphaDegenerateTol = 1e-14;

/// The three gap coefficients that enter the d <= 4 closed forms.
struct Gaps {
    double g1 = 0.0;
    double g2 = 0.0;
    double g3 = 0.0;

    static Gaps of(const GammaPair& g) {
        auto flush = [](double v) { return std::abs(v) < kGapFlush ? 0.0 : v; };
        return {flush(gap_coefficient(1, g)), flush(gap_coefficient(2, g)), flush(gap_coefficient(3, g))};
    }
};

// ---------------------------------------------------------------------------
// Qubit

/// Unconstrained optimum (1/2, 1/2), or with mean energy E fixed the unique
/// probe (1 - E, E).
inline DiscriminationResult qubit_optimal(const GammaPair& g, std::optional<double> energy = std::nullopt) {
    const double g1 = Gaps::of(g).g1;
    DiscriminationResult res;
    res.region = Region::qubit;
    res.method = Method::closed;
    if (!energy) {
        res.ps = success_from_norm(g1);
        res.coeffs = {0.5, 0.5};
        return res;
    }
    const double e = *energy;
    if (!std::isfinite(e) || e < 0.0 || e > 1.0) throw invalid_argument("qubit energy must lie in [0, 1]");
    res.ps = std::clamp(0.5 * (1.0 + g1 * std::sqrt(e * (1.0 - e))), 0.5, 1.0);
    res.coeffs = {1.0 - e, e};
    res.energy = e;
    return res;
}

// ---------------------------------------------------------------------------
// Qutrit

/// ||Delta||_1 for the probe (r0, 1 - 2 r0, r0).
inline double qutrit_norm(double r0, const GammaPair& g) {
    if (!(r0 >= 0.0 && r0 <= 0.5)) throw invalid_argument("qutrit_norm: r0 must lie in [0, 1/2]");
    const auto [g1, g2, g3] = Gaps::of(g);
    (void)g3;
    return std::sqrt(r0 * (g1 * g1 * (8.0 - 16.0 * r0) + g2 * g2 * r0)) + g2 * r0;
}

inline DiscriminationResult qutrit_optimal(const GammaPair& g) {
    const auto [g1, g2, g3] = Gaps::of(g);
    (void)g3;
    DiscriminationResult res;
    res.method = Method::closed;
    if (2.0 * g1 > g2) {
        const double den = 4.0 * g1 - g2;
        const double r0 = g1 / den;
        res.ps = success_from_norm(4.0 * g1 * g1 / den);
        res.coeffs = {r0, (2.0 * g1 - g2) / den, r0};
        res.region = Region::qutrit_i;
    } else {
        res.ps = success_from_norm(g2);
        res.coeffs = {0.5, 0.0, 0.5};
        res.region = Region::qutrit_ii;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Ququart
//
// Optimal ququart probes are mirror symmetric, (1/2 - t, t, t, 1/2 - t).
// zeta and xi_pm below are written in the inner weight t.

struct QuquartIntermediates {
    double zeta = 0.0;
    double xi_plus = 0.0;
    double xi_minus = 0.0;
};

namespace detail {

inline QuquartIntermediates intermediates(double t, const Gaps& g) {
    const auto [g1, g2, g3] = g;
    auto xi = [&](double s) {
        const double a = g1 + s * g2;
        return g3 * g3 + 4.0 * (2.0 * a * a - g3 * (g1 + g3)) * t +
               4.0 * ((g1 + g3) * (g1 + g3) - 4.0 * a * a) * t * t;
    };
    return {g3 + 2.0 * (g1 - g3) * t, xi(1.0), xi(-1.0)};
}

/// (g1 - g2)^2 - g1 g3; positive in region ii.
inline double region_discriminant(const Gaps& g) { return (g.g1 - g.g2) * (g.g1 - g.g2) - g.g1 * g.g3; }

inline double region_i_norm(const QuquartIntermediates& q) {
    return 0.5 * (q.zeta + std::sqrt(std::max(0.0, q.xi_plus)));
}

inline double region_ii_norm(const QuquartIntermediates& q) {
    return 0.5 * (std::sqrt(std::max(0.0, q.xi_minus)) + std::sqrt(std::max(0.0, q.xi_plus)));
}

} // namespace detail

inline QuquartIntermediates ququart_intermediates(double t, const GammaPair& g) {
    if (!(t >= 0.0 && t <= 0.5)) throw invalid_argument("ququart_intermediates: t must lie in [0, 1/2]");
    return detail::intermediates(t, Gaps::of(g));
}

/// ||Delta||_1 for the probe (r0, 1/2 - r0, 1/2 - r0, r0).
inline double ququart_norm(double r0, const GammaPair& g) {
    if (!(r0 >= 0.0 && r0 <= 0.5)) throw invalid_argument("ququart_norm: r0 must lie in [0, 1/2]");
    const Gaps gaps = Gaps::of(g);
    const auto q = detail::intermediates(0.5 - r0, gaps);
    return detail::region_discriminant(gaps) <= 0.0 ? detail::region_i_norm(q) : detail::region_ii_norm(q);
}

/// Coefficients and radical building blocks of the stationarity quartic
///
///     alpha t^4 - 4 beta t^3 + (chi / 2) t^2 + (mu / 2) t + nu / 8 = 0
///
/// of the region-ii norm in t. p, q, big_xi and big_q are its Ferrari
/// resolvent quantities; big_q is the principal complex cube root.
struct QuarticSymbols {
    double alpha = 0.0;
    double beta = 0.0;
    double chi = 0.0;
    double mu = 0.0;
    double nu = 0.0;
    double p = 0.0;
    double q = 0.0;
    double big_xi = 0.0;
    std::complex<double> big_q;
};

namespace detail {

inline QuarticSymbols symbols(double g1, double g2, double g3) {
    QuarticSymbols s;
    const double a2 = g1 * g1, b2 = g2 * g2, c2 = g3 * g3;
    s.alpha = 2.0 * ((g1 - g3) * (g1 - g3) - 4.0 * b2) * ((3.0 * g1 + g3) * (3.0 * g1 + g3) - 4.0 * b2);
    s.beta = a2 * (6.0 * a2 - 7.0 * g1 * g3 - 18.0 * b2 - 3.0 * c2) - g1 * (8.0 * b2 * g3 - 3.0 * c2 * g3) +
             8.0 * b2 * b2 - 6.0 * b2 * c2 + c2 * c2;
    s.chi = a2 * (18.0 * a2 - 19.0 * g1 * g3 - 6.0 * (7.0 * b2 + 3.0 * c2)) + g1 * (-20.0 * b2 * g3 + 13.0 * c2 * g3) +
            20.0 * b2 * b2 - 26.0 * b2 * c2 + 6.0 * c2 * c2;
    s.mu = c2 * (-2.0 * c2 - 3.0 * g1 * g3 + 5.0 * a2 + 6.0 * b2) + 2.0 * g1 * g3 * (a2 + b2) -
           2.0 * (a2 - b2) * (a2 - b2);
    s.nu = c2 * (c2 + g1 * g3 - 2.0 * (a2 + b2));

    const double scale = g1 + g2 + g3;
    if (!(std::abs(s.alpha) > kAlphaDegenerateTol * scale * scale * scale * scale)) {
        throw degenerate_case("quartic symbols: alpha vanishes", s.alpha);
    }
    const double al = s.alpha, be = s.beta, ch = s.chi, mu = s.mu, nu = s.nu;
    s.p = 16.0 * (3.0 * be * be - 0.25 * al * ch) / al;
    s.q = (al * al * mu + 2.0 * al * be * ch - 16.0 * be * be * be) / (2.0 * al * al * al);
    s.big_xi = 24.0 * al * nu + 96.0 * be * mu + 4.0 * ch * ch;
    const double x = 216.0 * al * mu * mu + 1728.0 * be * be * nu - 144.0 * al * ch * nu + 288.0 * be * ch * mu +
                     8.0 * ch * ch * ch;
    const std::complex<double> disc = std::sqrt(std::complex<double>(x * x - s.big_xi * s.big_xi * s.big_xi, 0.0));
    s.big_q = std::pow(disc + x, 1.0 / 3.0);
    return s;
}

} // namespace detail

/// Symbols for the given rates. Throws degenerate_case when alpha vanishes
/// (relative to (g1 + g2 + g3)^4), which happens on the ii.1 / ii.2 border.
inline QuarticSymbols appendix_symbols(const GammaPair& g) {
    if (g.coincident()) throw invalid_argument("appendix_symbols: rates must differ");
    const Gaps gaps = Gaps::of(g);
    return detail::symbols(gaps.g1, gaps.g2, gaps.g3);
}

enum class Branch { plus, minus };

struct TStar {
    double t = 0.0;
    Branch branch = Branch::plus;
    Method method = Method::closed;
    /// Largest |Im| among the radical values that were used.
    double imag_residual = 0.0;
};

namespace detail {

inline bool in_region_ii1(const Gaps& g) {
    const double d = g.g1 - g.g2;
    return 4.0 * d * d < (g.g1 + g.g3) * (g.g1 + g.g3);
}

inline TStar tstar_numeric(const Gaps& g) {
    auto f = [&](double t) { return region_ii_norm(intermediates(t, g)); };
    const auto [t, v] = maximize_interval(f, 0.0, 0.5, 2000, 1e-13);
    (void)v;
    return {t, Branch::plus, Method::numeric, 0.0};
}

inline std::complex<double> ferrari_root(const QuarticSymbols& s, double outer, double inner) {
    using C = std::complex<double>;
    const C q = s.big_q;
    const C r = s.p * q + s.big_xi + q * q;
    const C a = std::sqrt(r / (48.0 * s.alpha * q));
    const C in = (2.0 * s.p * q - s.big_xi - q * q) / (48.0 * s.alpha * q) - outer * s.q * std::sqrt(3.0 * s.alpha * q / r);
    return s.beta / s.alpha + outer * a + inner * std::sqrt(in);
}

/// Closed-form t*; nullopt when the radicals are unusable at this point.
inline std::optional<TStar> tstar_closed(const Gaps& g) {
    // Everything is homogeneous of degree zero in the gaps; normalize to keep
    // the degree-24 discriminant in range.
    const double m = std::max({g.g1, g.g2, g.g3});
    if (!(m > 0.0)) return std::nullopt;
    QuarticSymbols s;
    try {
        s = symbols(g.g1 / m, g.g2 / m, g.g3 / m);
    } catch (const degenerate_case&) {
        return std::nullopt;
    }
    if (s.big_q == 0.0) return std::nullopt;

    TStar out;
    if (in_region_ii1(g)) {
        const auto tp = ferrari_root(s, 1.0, 1.0);
        const auto tm = ferrari_root(s, -1.0, 1.0);
        out.imag_residual = std::max(std::abs(tp.imag()), std::abs(tm.imag()));
        out.branch = tp.real() >= tm.real() ? Branch::plus : Branch::minus;
        out.t = std::max(tp.real(), tm.real());
    } else {
        const auto tp = ferrari_root(s, 1.0, -1.0);
        out.imag_residual = std::abs(tp.imag());
        out.branch = Branch::plus;
        out.t = tp.real();
    }
    if (!std::isfinite(out.t) || !(out.imag_residual <= kImagResidualTol)) return std::nullopt;
    if (out.t < -1e-9 || out.t > 0.5 + 1e-9) return std::nullopt;
    out.t = std::clamp(out.t, 0.0, 0.5);

    // Local check: a spurious root of the squared stationarity condition is
    // not a maximum.
    const double f0 = region_ii_norm(intermediates(out.t, g));
    constexpr double probe = 1e-6;
    for (double dt : {-probe, probe}) {
        const double t = out.t + dt;
        if (t < 0.0 || t > 0.5) continue;
        if (region_ii_norm(intermediates(t, g)) > f0 + 1e-12 * std::max(1.0, f0)) return std::nullopt;
    }
    return out;
}

} // namespace detail

/// Optimal inner weight t* of the region-ii ququart probe.
///
/// Evaluated from the radical solution of the stationarity quartic with
/// complex intermediates; falls back to a 1-D numeric maximization (tagged
/// Method::numeric) when alpha is degenerate or the result is not real.
inline TStar ququart_tstar(const GammaPair& g) {
    const Gaps gaps = Gaps::of(g);
    if (!(detail::region_discriminant(gaps) > 0.0)) {
        throw invalid_argument("ququart_tstar: (g1 - g2)^2 > g1 g3 required");
    }
    if (auto closed = detail::tstar_closed(gaps)) return *closed;
    return detail::tstar_numeric(gaps);
}

namespace detail {

inline DiscriminationResult ququart_region_i(const Gaps& g) {
    const auto [g1, g2, g3] = g;
    DiscriminationResult res;
    res.method = Method::closed;
    if (g1 + g2 <= g3) {
        res.region = Region::ququart_i1;
        res.ps = success_from_norm(g3);
        res.coeffs = {0.5, 0.0, 0.0, 0.5};
    } else {
        res.region = Region::ququart_i2;
        const double den = g1 + 2.0 * g2 - g3;
        const double outer = g2 / (2.0 * den);
        const double inner = (g1 + g2 - g3) / (2.0 * den);
        res.ps = success_from_norm(((g1 + g2) * (g1 + g2) - g1 * g3) / den);
        res.coeffs = {outer, inner, inner, outer};
    }
    return res;
}

inline DiscriminationResult ququart_region_ii(const Gaps& g) {
    DiscriminationResult res;
    TStar ts;
    if (auto closed = tstar_closed(g)) {
        ts = *closed;
    } else {
        ts = tstar_numeric(g);
    }
    res.region = in_region_ii1(g) ? Region::ququart_ii1 : Region::ququart_ii2;
    res.method = ts.method;
    res.ps = success_from_norm(region_ii_norm(intermediates(ts.t, g)));
    res.coeffs = {0.5 - ts.t, ts.t, ts.t, 0.5 - ts.t};
    return res;
}

} // namespace detail

inline DiscriminationResult ququart_optimal(const GammaPair& g) {
    const Gaps gaps = Gaps::of(g);
    const double disc = detail::region_discriminant(gaps);
    if (std::abs(disc) < kRegionTieTol) {
        DiscriminationResult best = detail::ququart_region_i(gaps);
        if (disc > 0.0 || gaps.g1 > 0.0) {
            // The region-ii formula needs a non-degenerate quartic; it may
            // not exist on the curve itself.
            DiscriminationResult other = detail::ququart_region_ii(gaps);
            if (other.ps > best.ps) {
                other.region = best.region;
                best = other;
            }
        }
        return best;
    }
    if (disc < 0.0) return detail::ququart_region_i(gaps);
    return detail::ququart_region_ii(gaps);
}

/// Closed-form optimum for d in {2, 3, 4}.
inline DiscriminationResult closed_form_optimal(int d, const GammaPair& g) {
    switch (d) {
    case 2: return qubit_optimal(g);
    case 3: return qutrit_optimal(g);
    case 4: return ququart_optimal(g);
    default: throw invalid_argument("closed forms exist only for d = 2, 3, 4");
    }
}

} // namespace dephasing
