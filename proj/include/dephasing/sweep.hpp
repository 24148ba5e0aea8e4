#pragma once

// Grid sweeps and the flat-file formats consumed by the plotting scripts.
//
//   sweep     gamma0,gamma1,dim,energy,ps,region,r0,r1,r2,r3
//   classify  gamma0,gamma1,region
//   boundary  gamma0,gamma1   (preceded by '#' comment lines)
//
// Reals are written with 12 significant digits; absent values are empty.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <exception>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dephasing/channel.hpp"
#include "dephasing/closed_form.hpp"
#include "dephasing/errors.hpp"
#include "dephasing/optimizer.hpp"

namespace dephasing {

inline constexpr int kCsvCoeffColumns = 4;
inline constexpr std::string_view kSweepHeader = "gamma0,gamma1,dim,energy,ps,region,r0,r1,r2,r3";
inline constexpr std::string_view kClassifyHeader = "gamma0,gamma1,region";
inline constexpr std::string_view kBoundaryHeader = "gamma0,gamma1";

struct SweepRow {
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    int dim = 0;
    std::optional<double> energy;
    double ps = 0.5;
    Region region = Region::numeric;
    std::vector<double> coeffs;

    bool operator==(const SweepRow&) const = default;
};

inline std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// Value as it survives a write/read cycle.
inline double quantize(double x) { return std::stod(format_real(x)); }

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline double parse_real(std::string_view s) {
    const std::string tmp(s);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tmp, &used);
    } catch (const std::exception&) {
        throw invalid_argument("csv: malformed number '" + tmp + "'");
    }
    if (used != tmp.size()) throw invalid_argument("csv: malformed number '" + tmp + "'");
    return v;
}

} // namespace detail

inline std::string format_row(const SweepRow& row) {
    if (static_cast<int>(row.coeffs.size()) > kCsvCoeffColumns) {
        throw invalid_argument("csv rows hold at most four coefficients");
    }
    std::string s = format_real(row.gamma0) + ',' + format_real(row.gamma1) + ',' + std::to_string(row.dim) + ',';
    if (row.energy) s += format_real(*row.energy);
    s += ',' + format_real(row.ps) + ',' + std::string(to_string(row.region));
    for (int j = 0; j < kCsvCoeffColumns; ++j) {
        s += ',';
        if (j < static_cast<int>(row.coeffs.size())) s += format_real(row.coeffs[static_cast<std::size_t>(j)]);
    }
    return s;
}

inline SweepRow parse_row(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto f = detail::split_csv(line);
    if (f.size() != 6 + kCsvCoeffColumns) throw invalid_argument("csv: expected 10 fields");
    SweepRow row;
    row.gamma0 = detail::parse_real(f[0]);
    row.gamma1 = detail::parse_real(f[1]);
    row.dim = static_cast<int>(detail::parse_real(f[2]));
    if (!f[3].empty()) row.energy = detail::parse_real(f[3]);
    row.ps = detail::parse_real(f[4]);
    const auto region = parse_region(f[5]);
    if (!region) throw invalid_argument("csv: unknown region token '" + std::string(f[5]) + "'");
    row.region = *region;
    for (int j = 0; j < kCsvCoeffColumns; ++j) {
        const auto field = f[static_cast<std::size_t>(6 + j)];
        if (field.empty()) break;
        row.coeffs.push_back(detail::parse_real(field));
    }
    return row;
}

/// Evaluates fn(index) for index in [0, count) on up to `jobs` threads and
/// returns the results in index order. The first exception is rethrown.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, int jobs, Fn&& fn) {
    std::vector<std::optional<T>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(count, 1))));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<T> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

struct SweepSpec {
    int dim = 3;
    int grid = 100;
    double gamma_max = 3.0;
    std::optional<double> energy;
    Method method = Method::closed;
    int jobs = 1;
    OptimizerOptions opts;

    void validate() const {
        if (dim < 2 || dim > kCsvCoeffColumns) throw invalid_argument("sweep: d must lie in [2, 4]");
        if (grid < 2) throw invalid_argument("sweep: grid must be >= 2");
        if (!std::isfinite(gamma_max) || !(gamma_max > 0.0)) throw invalid_argument("sweep: gamma_max must be positive");
        if (energy && (!std::isfinite(*energy) || *energy < 0.0 || *energy > dim - 1)) {
            throw invalid_argument("sweep: energy must lie in [0, d-1]");
        }
        if (jobs < 1) throw invalid_argument("sweep: jobs must be >= 1");
        opts.validate();
    }

    /// Grid coordinate gamma_max (i+1) / grid, for i in [0, grid).
    double axis(int i) const { return gamma_max * (i + 1) / grid; }
};

/// Single grid point: closed forms when unconstrained and requested,
/// otherwise the numerical optimizers.
inline DiscriminationResult evaluate_point(int d, const GammaPair& g, std::optional<double> energy, Method method,
                                           const OptimizerOptions& opts) {
    if (energy) {
        if (d == 2) return qubit_optimal(g, energy);
        return constrained_optimize(d, g, *energy, opts);
    }
    if (method == Method::closed) return closed_form_optimal(d, g);
    return brute_force_unconstrained(d, g, opts);
}

/// Rows in row-major order: gamma0 varies slowest.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    const auto n = static_cast<std::size_t>(spec.grid);
    return parallel_map<SweepRow>(n * n, spec.jobs, [&](std::size_t idx) {
        SweepRow row;
        row.gamma0 = spec.axis(static_cast<int>(idx / n));
        row.gamma1 = spec.axis(static_cast<int>(idx % n));
        row.dim = spec.dim;
        row.energy = spec.energy;
        const auto res = evaluate_point(spec.dim, GammaPair(row.gamma0, row.gamma1), spec.energy, spec.method, spec.opts);
        row.ps = res.ps;
        row.region = res.region;
        row.coeffs = res.coeffs;
        return row;
    });
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << kSweepHeader << '\n';
    for (const auto& r : rows) os << format_row(r) << '\n';
}

struct ClassifiedPoint {
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    Region region = Region::numeric;
};

inline std::vector<ClassifiedPoint> run_classify(int d, int grid, double gamma_max, int jobs = 1) {
    if (d != 3 && d != 4) throw invalid_argument("classify: d must be 3 or 4");
    SweepSpec spec;
    spec.dim = d;
    spec.grid = grid;
    spec.gamma_max = gamma_max;
    spec.jobs = jobs;
    spec.validate();
    const auto n = static_cast<std::size_t>(grid);
    return parallel_map<ClassifiedPoint>(n * n, jobs, [&](std::size_t idx) {
        ClassifiedPoint p{spec.axis(static_cast<int>(idx / n)), spec.axis(static_cast<int>(idx % n)), Region::numeric};
        p.region = closed_form_optimal(d, GammaPair(p.gamma0, p.gamma1)).region;
        return p;
    });
}

inline void write_classify_csv(std::ostream& os, const std::vector<ClassifiedPoint>& pts) {
    os << kClassifyHeader << '\n';
    for (const auto& p : pts) {
        os << format_real(p.gamma0) << ',' << format_real(p.gamma1) << ',' << to_string(p.region) << '\n';
    }
}

inline void write_boundary_csv(std::ostream& os, int d, const BoundaryCurve& curve) {
    os << "# d=" << d << " energy=" << format_real(curve.energy) << " resolved_tol=" << format_real(curve.resolved_tol)
       << '\n';
    if (curve.points.empty()) os << "# empty\n";
    os << kBoundaryHeader << '\n';
    for (const auto& [g0, g1] : curve.points) os << format_real(g0) << ',' << format_real(g1) << '\n';
}

/// Reads a boundary CSV back, skipping comment lines.
inline std::vector<std::pair<double, double>> read_boundary_csv(std::istream& is) {
    std::vector<std::pair<double, double>> pts;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line != kBoundaryHeader) throw invalid_argument("boundary csv: bad header");
            header = true;
            continue;
        }
        const auto f = detail::split_csv(line);
        if (f.size() != 2) throw invalid_argument("boundary csv: expected 2 fields");
        pts.emplace_back(detail::parse_real(f[0]), detail::parse_real(f[1]));
    }
    return pts;
}

} // namespace dephasing
