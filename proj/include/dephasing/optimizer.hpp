#pragma once

// Numerical maximization of the success probability over phase-free probes:
// the mirror-symmetric unconstrained family, the energy-constrained simplex,
// and detection of the locus where the top Fock level drops out of the
// constrained optimum.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "dephasing/channel.hpp"
#include "dephasing/errors.hpp"

namespace dephasing {

struct OptimizerOptions {
    int coarse_grid = 200;     ///< lattice divisions per free parameter
    double refine_tol = 1e-10; ///< final pattern-search step
    int max_refine_iters = 200;

    void validate() const {
        if (coarse_grid < 10) throw invalid_argument("coarse_grid must be >= 10");
        if (!(refine_tol > 0.0)) throw invalid_argument("refine_tol must be positive");
        if (max_refine_iters < 1) throw invalid_argument("max_refine_iters must be >= 1");
    }
};

struct BoundaryCurve {
    double energy = 0.0;
    std::vector<std::pair<double, double>> points;
    double resolved_tol = 1e-4;
};

inline constexpr double kTopLevelThreshold = 1e-6;
inline constexpr double kTieTol = 1e-12;
inline constexpr std::size_t kMaxCoarsePoints = 250000;

namespace detail {

inline double entropy(std::span<const double> r) {
    double h = 0.0;
    for (double x : r) {
        if (x > 0.0) h -= x * std::log(x);
    }
    return h;
}

struct Candidate {
    std::vector<double> x;
    double value = -std::numeric_limits<double>::infinity();
};

/// Strict preference used for tie-breaking among near-equal optima: larger
/// value, then larger entropy of the probe, then lexicographically smaller.
inline bool preferred(double va, std::span<const double> ra, double vb, std::span<const double> rb) {
    if (va > vb + kTieTol) return true;
    if (vb > va + kTieTol) return false;
    const double ha = entropy(ra), hb = entropy(rb);
    if (ha > hb + 1e-14) return true;
    if (hb > ha + 1e-14) return false;
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
}

/// Derivative-free pattern search on {x >= 0} along a fixed direction set.
/// Steps that would leave the non-negative orthant are shortened so that
/// the blocking coordinate lands exactly on zero. Only strict improvements
/// are accepted, so the returned value is never below the start value.
template <class F>
Candidate pattern_search(F&& f, Candidate start, const std::vector<std::vector<double>>& directions, double h0,
                         const OptimizerOptions& opts) {
    Candidate cur = std::move(start);
    const std::size_t n = cur.x.size();
    std::vector<double> trial(n);
    std::vector<double> best_trial(n);
    double h = h0;
    for (int iter = 0; iter < opts.max_refine_iters && h >= opts.refine_tol; ++iter) {
        double best = cur.value;
        bool improved = false;
        for (const auto& v : directions) {
            double step = h;
            std::size_t blocking = n;
            for (std::size_t c = 0; c < n; ++c) {
                if (v[c] < 0.0) {
                    const double s = cur.x[c] / -v[c];
                    if (s < step) {
                        step = s;
                        blocking = c;
                    }
                }
            }
            if (!(step > 0.0)) continue;
            for (std::size_t c = 0; c < n; ++c) trial[c] = std::max(0.0, cur.x[c] + step * v[c]);
            if (blocking < n) trial[blocking] = 0.0;
            const double fv = f(trial);
            if (fv > best) {
                best = fv;
                best_trial = trial;
                improved = true;
            }
        }
        if (improved) {
            cur.x = best_trial;
            cur.value = best;
        } else {
            h *= 0.5;
        }
    }
    return cur;
}

/// All compositions of `total` into `parts` non-negative integers.
inline void for_each_composition(int total, int parts, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> c(static_cast<std::size_t>(parts), 0);
    std::function<void(int, int)> rec = [&](int idx, int left) {
        if (idx == parts - 1) {
            c[static_cast<std::size_t>(idx)] = left;
            visit(c);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            c[static_cast<std::size_t>(idx)] = k;
            rec(idx + 1, left - k);
        }
    };
    rec(0, total);
}

inline double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

/// Lattice resolution for a simplex with `parts` orbits under the point cap.
inline int simplex_resolution(int requested, int parts) {
    int n = requested;
    while (n > 2 && binomial(n + parts - 1, parts - 1) > static_cast<double>(kMaxCoarsePoints)) --n;
    return n;
}

/// Lattice resolution per axis for a box with `free` dimensions.
inline int box_resolution(int requested, int free) {
    if (free <= 0) return requested;
    const double cap = std::pow(static_cast<double>(kMaxCoarsePoints), 1.0 / free);
    return std::max(2, std::min(requested, static_cast<int>(std::floor(cap + 1e-9))));
}

/// Orbits of the level-reversal symmetry: {j, d-1-j} pairs plus the middle
/// level for odd d.
inline std::vector<std::vector<int>> mirror_orbits(int d) {
    std::vector<std::vector<int>> orbits;
    for (int j = 0; j < d / 2; ++j) orbits.push_back({j, d - 1 - j});
    if (d % 2 == 1) orbits.push_back({d / 2});
    return orbits;
}

/// Expands orbit masses into probe coefficients (mass split evenly).
inline void expand_orbits(const std::vector<std::vector<int>>& orbits, std::span<const double> mass,
                          std::vector<double>& r) {
    for (std::size_t o = 0; o < orbits.size(); ++o) {
        const double each = mass[o] / static_cast<double>(orbits[o].size());
        for (int j : orbits[o]) r[static_cast<std::size_t>(j)] = each;
    }
}

/// Coarse-lattice scan followed by pattern-search refinement of the best few
/// lattice points. `objective` maps probe coefficients to the success
/// probability; `to_probe` maps search variables x to coefficients.
template <class Objective, class ToProbe>
class PolytopeSearch {
public:
    static constexpr std::size_t kRefined = 4;

    PolytopeSearch(int probe_dim, Objective objective, ToProbe to_probe)
        : objective_(std::move(objective)), to_probe_(std::move(to_probe)),
          r_(static_cast<std::size_t>(probe_dim)), best_r_(static_cast<std::size_t>(probe_dim)) {}

    double evaluate(std::span<const double> x) {
        to_probe_(x, r_);
        return objective_(std::span<const double>(r_));
    }

    void offer(std::span<const double> x) {
        const double v = evaluate(x);
        if (best_.x.empty() || preferred(v, r_, best_.value, best_r_)) {
            best_ = {std::vector<double>(x.begin(), x.end()), v};
            best_r_ = r_;
        }
        // Keep the kRefined largest raw values, ordered, first come first kept.
        auto pos = std::find_if(top_.begin(), top_.end(), [&](const Candidate& c) { return v > c.value; });
        if (top_.size() < kRefined || pos != top_.end()) {
            top_.insert(pos, Candidate{std::vector<double>(x.begin(), x.end()), v});
            if (top_.size() > kRefined) top_.pop_back();
        }
    }

    DiscriminationResult finish(const std::vector<std::vector<double>>& directions, double h0,
                                const OptimizerOptions& opts) {
        if (best_.x.empty()) throw numeric_error("optimizer: empty coarse lattice", 0.0);
        std::vector<Candidate> starts{best_};
        for (const auto& c : top_) {
            if (c.x != best_.x) starts.push_back(c);
        }
        auto f = [&](std::span<const double> x) { return evaluate(x); };

        Candidate winner;
        std::vector<double> winner_r(r_.size());
        for (auto& s : starts) {
            Candidate refined = directions.empty() || !(h0 > 0.0) ? s : pattern_search(f, s, directions, h0, opts);
            to_probe_(refined.x, r_);
            if (winner.x.empty() || preferred(refined.value, r_, winner.value, winner_r)) {
                winner = std::move(refined);
                winner_r = r_;
            }
        }
        DiscriminationResult res;
        res.ps = std::clamp(winner.value, 0.5, 1.0);
        res.coeffs = winner_r;
        res.region = Region::numeric;
        res.method = Method::numeric;
        return res;
    }

private:
    Objective objective_;
    ToProbe to_probe_;
    std::vector<double> r_;
    Candidate best_;
    std::vector<double> best_r_;
    std::vector<Candidate> top_;
};

template <class Objective, class ToProbe>
PolytopeSearch(int, Objective, ToProbe) -> PolytopeSearch<Objective, ToProbe>;

/// Maximizes objective(r) over mirror-symmetric probes of dimension d. The
/// search variables are the orbit masses, which live on a simplex.
template <class Objective>
DiscriminationResult maximize_mirror_family(int d, Objective objective, const OptimizerOptions& opts) {
    const auto orbits = mirror_orbits(d);
    const int parts = static_cast<int>(orbits.size());
    auto to_probe = [orbits](std::span<const double> mass, std::vector<double>& r) { expand_orbits(orbits, mass, r); };
    PolytopeSearch search(d, std::move(objective), to_probe);

    const int n = simplex_resolution(opts.coarse_grid, parts);
    std::vector<double> mass(static_cast<std::size_t>(parts));
    for_each_composition(n, parts, [&](const std::vector<int>& c) {
        for (std::size_t o = 0; o < mass.size(); ++o) mass[o] = static_cast<double>(c[o]) / n;
        search.offer(mass);
    });

    std::vector<std::vector<double>> dirs;
    for (int i = 0; i < parts; ++i) {
        for (int j = 0; j < parts; ++j) {
            if (i == j) continue;
            std::vector<double> v(static_cast<std::size_t>(parts), 0.0);
            v[static_cast<std::size_t>(i)] = 1.0;
            v[static_cast<std::size_t>(j)] = -1.0;
            dirs.push_back(std::move(v));
        }
    }
    return search.finish(dirs, 1.0 / n, opts);
}

/// Directions that move probability among three levels i < j < k while
/// keeping both sum_l r_l and sum_l l r_l fixed.
inline std::vector<std::vector<double>> energy_preserving_directions(int d) {
    std::vector<std::vector<double>> dirs;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            for (int k = j + 1; k < d; ++k) {
                std::vector<double> v(static_cast<std::size_t>(d), 0.0);
                v[static_cast<std::size_t>(i)] = k - j;
                v[static_cast<std::size_t>(j)] = -(k - i);
                v[static_cast<std::size_t>(k)] = j - i;
                const double scale = static_cast<double>(k - i);
                for (double& x : v) x /= scale;
                dirs.push_back(v);
                for (double& x : v) x = -x;
                dirs.push_back(std::move(v));
            }
        }
    }
    return dirs;
}

/// Energy-constrained maximization without the reflection shortcut. The
/// coarse lattice runs over r_2 .. r_{d-1}; r_0 and r_1 follow from the two
/// equality constraints.
inline DiscriminationResult constrained_direct(int d, const GammaPair& g, double energy, const OptimizerOptions& opts) {
    const GapTable gaps(g, d - 1);
    auto objective = [&gaps](std::span<const double> r) { return 0.5 * (1.0 + 0.5 * phase_free_trace_norm(r, gaps)); };
    auto identity = [](std::span<const double> x, std::vector<double>& r) { std::copy(x.begin(), x.end(), r.begin()); };
    PolytopeSearch search(d, objective, identity);

    const int free = d - 2;
    const int n = box_resolution(opts.coarse_grid, free);
    std::vector<double> upper(static_cast<std::size_t>(d), 0.0);
    double h0 = 0.0;
    for (int j = 2; j < d; ++j) {
        upper[static_cast<std::size_t>(j)] = std::min(1.0, energy / j);
        h0 = std::max(h0, upper[static_cast<std::size_t>(j)] / n);
    }
    if (d == 2) h0 = 0.0;

    std::vector<double> r(static_cast<std::size_t>(d), 0.0);
    std::vector<int> idx(static_cast<std::size_t>(std::max(free, 0)), 0);
    bool any = false;
    while (true) {
        double mass = 0.0, load = 0.0;
        for (int j = 2; j < d; ++j) {
            const auto u = static_cast<std::size_t>(j);
            r[u] = upper[u] * idx[u - 2] / n;
            mass += r[u];
            load += j * r[u];
        }
        const double r1 = energy - load;
        const double r0 = 1.0 - r1 - mass;
        if (r1 >= -1e-15 && r0 >= -1e-15) {
            r[1] = std::max(0.0, r1);
            r[0] = std::max(0.0, r0);
            search.offer(r);
            any = true;
        }
        // Odometer over the free coordinates; a zero-width axis has one value.
        int a = 0;
        for (; a < free; ++a) {
            const auto u = static_cast<std::size_t>(a);
            if (upper[u + 2] > 0.0 && idx[u] < n) {
                ++idx[u];
                break;
            }
            idx[u] = 0;
        }
        if (a == free) break;
    }
    if (!any) throw numeric_error("constrained optimizer: no feasible lattice point", energy);

    DiscriminationResult res = search.finish(d >= 3 ? energy_preserving_directions(d) : decltype(energy_preserving_directions(d)){},
                                             h0, opts);
    res.energy = energy;
    return res;
}

inline void check_dim(int d, int lo, int hi, const char* what) {
    if (d < lo || d > hi) throw invalid_argument(std::string(what) + ": dimension out of range");
}

} // namespace detail

/// Maximum over the mirror-symmetric family r_j = r_{d-1-j}.
inline DiscriminationResult brute_force_unconstrained(int d, const GammaPair& g, const OptimizerOptions& opts = {}) {
    detail::check_dim(d, 2, 8, "brute_force_unconstrained");
    opts.validate();
    const GapTable gaps(g, d - 1);
    return detail::maximize_mirror_family(
        d, [gaps](std::span<const double> r) { return 0.5 * (1.0 + 0.5 * phase_free_trace_norm(r, gaps)); }, opts);
}

/// Maximum over phase-free probes with sum_j j r_j = energy. Energies above
/// (d-1)/2 are solved at d-1-energy and the optimal probe is reversed.
inline DiscriminationResult constrained_optimize(int d, const GammaPair& g, double energy,
                                                 const OptimizerOptions& opts = {}) {
    detail::check_dim(d, 2, 8, "constrained_optimize");
    opts.validate();
    if (!std::isfinite(energy) || energy < 0.0 || energy > d - 1) {
        throw invalid_argument("constrained_optimize: energy must lie in [0, d-1]");
    }
    const double half = 0.5 * (d - 1);
    if (energy <= half) return detail::constrained_direct(d, g, energy, opts);
    DiscriminationResult res = detail::constrained_direct(d, g, (d - 1) - energy, opts);
    std::reverse(res.coeffs.begin(), res.coeffs.end());
    res.energy = energy;
    return res;
}

/// Locus, inside (0, gamma_max]^2 with gamma0 < gamma1, where the
/// constrained optimum stops using the top level |d-1> (its coefficient
/// falls below 1e-6). Each grid row gamma0 = gamma_max i / grid is scanned
/// along gamma1 and every change of that indicator is bisected to 1e-4.
inline BoundaryCurve dimension_transition(int d, double energy, int grid, double gamma_max,
                                          const OptimizerOptions& opts = {}) {
    if (d != 3 && d != 4) throw invalid_argument("dimension_transition: d must be 3 or 4");
    const double half = 0.5 * (d - 1);
    if (!std::isfinite(energy) || !(energy > 0.0) || energy > half) {
        throw invalid_argument("dimension_transition: energy must lie in (0, (d-1)/2]");
    }
    if (grid < 2) throw invalid_argument("dimension_transition: grid must be >= 2");
    if (!(gamma_max > 0.0) || !std::isfinite(gamma_max)) throw invalid_argument("dimension_transition: gamma_max must be positive");
    opts.validate();

    BoundaryCurve curve;
    curve.energy = energy;
    curve.resolved_tol = 1e-4;
    if (energy >= half - 1e-12) return curve;

    auto drops_top = [&](double g0, double g1) {
        const auto res = constrained_optimize(d, GammaPair(g0, g1), energy, opts);
        return res.coeffs.back() < kTopLevelThreshold;
    };
    const double step = gamma_max / grid;
    for (int i = 1; i < grid; ++i) {
        const double g0 = step * i;
        bool prev = drops_top(g0, step * (i + 1));
        for (int j = i + 2; j <= grid; ++j) {
            const double hi = step * j;
            const bool cur = drops_top(g0, hi);
            if (cur != prev) {
                double a = hi - step, b = hi;
                while (b - a > curve.resolved_tol) {
                    const double mid = 0.5 * (a + b);
                    if (drops_top(g0, mid) == prev) {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                curve.points.emplace_back(g0, 0.5 * (a + b));
            }
            prev = cur;
        }
    }
    return curve;
}

/// Smallest dimension d <= dmax whose constrained optimum is within 1e-7 of
/// the best over all feasible dimensions (those with energy <= d-1).
inline int best_dimension(const GammaPair& g, double energy, int dmax, const OptimizerOptions& opts = {}) {
    if (dmax < 2 || dmax > 4) throw invalid_argument("best_dimension: dmax must be 2, 3 or 4");
    if (!std::isfinite(energy) || energy < 0.0 || energy > dmax - 1) {
        throw invalid_argument("best_dimension: energy must lie in [0, dmax-1]");
    }
    std::vector<std::pair<int, double>> ps;
    for (int d = 2; d <= dmax; ++d) {
        if (energy <= d - 1) ps.emplace_back(d, constrained_optimize(d, g, energy, opts).ps);
    }
    double best = 0.0;
    for (const auto& [d, p] : ps) best = std::max(best, p);
    for (const auto& [d, p] : ps) {
        if (p >= best - 1e-7) return d;
    }
    return dmax;
}

} // namespace dephasing
