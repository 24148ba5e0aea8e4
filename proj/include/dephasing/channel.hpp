#pragma once

// Probe states, density matrices and the finite-dimensional dephasing channel
//
//     N_gamma(rho)_{mn} = exp(-gamma (m - n)^2 / 2) rho_{mn}
//
// together with the Helstrom success probability for telling N_gamma0 from
// N_gamma1 with a single use and equal priors.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dephasing/errors.hpp"

namespace dephasing {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
/// Hermitian operator stored densely; the type does not enforce Hermiticity.
using HermitianMatrix = Eigen::MatrixXcd;

inline constexpr double kProbeNormTol = 1e-12;
inline constexpr double kProbeInputTol = 1e-9;
inline constexpr double kDensityTol = 1e-12;
inline constexpr double kPositivityTol = 1e-10;
inline constexpr double kHermitianTol = 1e-10;

// ---------------------------------------------------------------------------
// GammaPair

/// Ordered pair of dephasing rates with gamma0 <= gamma1.
///
/// The trace distance is symmetric in the two hypotheses, so construction
/// sorts its arguments.
class GammaPair {
public:
    GammaPair(double a, double b) {
        if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0) {
            throw invalid_argument("dephasing rates must be finite and non-negative");
        }
        gamma0_ = std::min(a, b);
        gamma1_ = std::max(a, b);
    }

    double gamma0() const noexcept { return gamma0_; }
    double gamma1() const noexcept { return gamma1_; }
    bool coincident() const noexcept { return gamma0_ == gamma1_; }

    friend bool operator==(const GammaPair&, const GammaPair&) = default;

private:
    double gamma0_ = 0.0;
    double gamma1_ = 0.0;
};

/// e^{-k^2 gamma0 / 2} - e^{-k^2 gamma1 / 2}: the damping gap on the k-th
/// off-diagonal.
inline double gap_coefficient(int k, const GammaPair& g) {
    if (k < 1) throw invalid_argument("gap_coefficient: k must be >= 1");
    const double k2 = static_cast<double>(k) * static_cast<double>(k);
    // For gamma1 > gamma0 the difference is written through expm1 to keep
    // relative accuracy when the rates are close.
    const double a = -0.5 * k2 * g.gamma0();
    const double b = -0.5 * k2 * g.gamma1();
    return -std::exp(a) * std::expm1(b - a);
}

/// Gap coefficients g_1 .. g_{kmax}, computed once for repeated evaluation.
class GapTable {
public:
    GapTable(const GammaPair& g, int kmax) : gaps_(static_cast<std::size_t>(kmax) + 1, 0.0) {
        for (int k = 1; k <= kmax; ++k) gaps_[static_cast<std::size_t>(k)] = gap_coefficient(k, g);
    }

    /// g_k; g_0 is zero by definition.
    double operator[](std::size_t k) const { return gaps_[k]; }
    int kmax() const noexcept { return static_cast<int>(gaps_.size()) - 1; }

private:
    std::vector<double> gaps_;
};

// ---------------------------------------------------------------------------
// ProbeState

struct ProbeSymmetries;

/// Pure input state sum_j sqrt(r_j) e^{i theta_j} |j> over the Fock basis.
class ProbeState {
public:
    int dim() const noexcept { return static_cast<int>(coeffs_.size()); }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    std::span<const double> phases() const noexcept { return phases_; }

    /// Tr(H rho) = sum_j j r_j.
    double average_energy() const noexcept {
        double e = 0.0;
        for (std::size_t j = 0; j < coeffs_.size(); ++j) e += static_cast<double>(j) * coeffs_[j];
        return e;
    }

    bool phase_free() const noexcept {
        return std::all_of(phases_.begin(), phases_.end(), [](double t) { return t == 0.0; });
    }

    Eigen::VectorXcd amplitudes() const {
        Eigen::VectorXcd psi(dim());
        for (int j = 0; j < dim(); ++j) {
            const auto u = static_cast<std::size_t>(j);
            psi(j) = std::polar(std::sqrt(coeffs_[u]), phases_[u]);
        }
        return psi;
    }

private:
    ProbeState(std::vector<double> coeffs, std::vector<double> phases)
        : coeffs_(std::move(coeffs)), phases_(std::move(phases)) {}

    friend ProbeState make_probe(std::vector<double>, std::optional<std::vector<double>>);
    friend ProbeSymmetries symmetry_transforms(const ProbeState&);

    std::vector<double> coeffs_;
    std::vector<double> phases_;
};

/// Validates and builds a probe. Coefficients are probabilities r_j; their sum
/// must already be one to within 1e-9 (the residual is then removed so the
/// stored state is normalized to 1e-12). Phases are reduced into [0, 2 pi).
inline ProbeState make_probe(std::vector<double> coeffs,
                             std::optional<std::vector<double>> phases = std::nullopt) {
    if (coeffs.size() < 2) throw invalid_argument("probe dimension must be >= 2");
    double sum = 0.0;
    for (double r : coeffs) {
        if (!std::isfinite(r) || r < 0.0) throw invalid_argument("probe coefficients must be non-negative");
        sum += r;
    }
    const double deviation = sum - 1.0;
    if (std::abs(deviation) > kProbeInputTol) {
        throw normalization_error("probe coefficients sum to " + std::to_string(sum) + ", not 1",
                                  deviation);
    }
    if (deviation != 0.0) {
        for (double& r : coeffs) r /= sum;
    }

    std::vector<double> th;
    if (phases) {
        if (phases->size() != coeffs.size()) throw invalid_argument("phase vector length must equal dimension");
        th = std::move(*phases);
        constexpr double two_pi = 6.283185307179586476925286766559;
        for (double& t : th) {
            if (!std::isfinite(t)) throw invalid_argument("phases must be finite");
            t = std::fmod(t, two_pi);
            if (t < 0.0) t += two_pi;
        }
    } else {
        th.assign(coeffs.size(), 0.0);
    }
    return ProbeState(std::move(coeffs), std::move(th));
}

// ---------------------------------------------------------------------------
// DensityMatrix

/// Unit-trace positive Hermitian operator. The checked constructor enforces
/// Hermiticity and trace to 1e-12 and eigenvalues >= -1e-10.
class DensityMatrix {
public:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() < 1) throw invalid_argument("density matrix must be square");
        if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kDensityTol) {
            throw invalid_argument("density matrix is not Hermitian");
        }
        if (std::abs(m_.trace() - cplx(1.0)) > kDensityTol) {
            throw invalid_argument("density matrix trace differs from 1");
        }
        if (min_eigenvalue() < -kPositivityTol) throw invalid_argument("density matrix is not positive");
    }

    static DensityMatrix from_pure(const Eigen::VectorXcd& psi) {
        return DensityMatrix(ComplexMatrix(psi * psi.adjoint()));
    }

    static DensityMatrix from_probe(const ProbeState& probe) { return from_pure(probe.amplitudes()); }

    /// Skips validation; for maps that provably preserve the invariants.
    static DensityMatrix trusted(ComplexMatrix m) { return DensityMatrix(unchecked{}, std::move(m)); }

    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    const ComplexMatrix& matrix() const noexcept { return m_; }
    cplx operator()(int m, int n) const { return m_(m, n); }

    double min_eigenvalue() const {
        const ComplexMatrix h = 0.5 * (m_ + m_.adjoint());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

private:
    struct unchecked {};
    DensityMatrix(unchecked, ComplexMatrix m) : m_(std::move(m)) {}

    ComplexMatrix m_;
};

// ---------------------------------------------------------------------------
// Results

enum class Region {
    qubit,
    qutrit_i,
    qutrit_ii,
    ququart_i1,
    ququart_i2,
    ququart_ii1,
    ququart_ii2,
    numeric,
};

enum class Method { closed, numeric };

inline constexpr std::array<std::pair<Region, std::string_view>, 8> kRegionTokens{{
    {Region::qubit, "qubit"},
    {Region::qutrit_i, "qutrit-i"},
    {Region::qutrit_ii, "qutrit-ii"},
    {Region::ququart_i1, "ququart-i.1"},
    {Region::ququart_i2, "ququart-i.2"},
    {Region::ququart_ii1, "ququart-ii.1"},
    {Region::ququart_ii2, "ququart-ii.2"},
    {Region::numeric, "numeric"},
}};

inline std::string_view to_string(Region r) {
    for (const auto& [region, token] : kRegionTokens) {
        if (region == r) return token;
    }
    return "numeric";
}

inline std::optional<Region> parse_region(std::string_view token) {
    for (const auto& [region, t] : kRegionTokens) {
        if (t == token) return region;
    }
    return std::nullopt;
}

inline std::string_view to_string(Method m) { return m == Method::closed ? "closed" : "numeric"; }

/// Optimal discrimination for one (gamma0, gamma1) point.
struct DiscriminationResult {
    double ps = 0.5;
    std::vector<double> coeffs;
    Region region = Region::numeric;
    std::optional<double> energy;
    Method method = Method::numeric;
};

// ---------------------------------------------------------------------------
// Channel action

/// Element-wise form of the channel.
inline DensityMatrix apply_dephasing(const DensityMatrix& rho, double gamma) {
    if (!std::isfinite(gamma) || gamma < 0.0) throw invalid_argument("gamma must be finite and non-negative");
    const int d = rho.dim();
    std::vector<double> damp(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) damp[static_cast<std::size_t>(k)] = std::exp(-0.5 * gamma * k * k);

    ComplexMatrix out = rho.matrix();
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            if (m != n) out(m, n) *= damp[static_cast<std::size_t>(std::abs(m - n))];
        }
    }
    return DensityMatrix::trusted(std::move(out));
}

/// Kraus form sum_j K_j rho K_j^dagger with
/// K_j = exp(-gamma H^2 / 2) (-i sqrt(gamma) H)^j / sqrt(j!).
///
/// Every term is positive, so its 1-norm is its trace. Summation stops once
/// three consecutive terms past the Poisson mode j ~ gamma (d-1)^2 have 1-norm
/// below tol * 1e-3; the hard cap is j <= 10 ceil(gamma (d-1)^2) + 64.
inline DensityMatrix apply_dephasing_kraus(const DensityMatrix& rho, double gamma, double tol) {
    if (!std::isfinite(gamma) || gamma < 0.0) throw invalid_argument("gamma must be finite and non-negative");
    if (!(tol > 0.0)) throw invalid_argument("tol must be positive");
    const int d = rho.dim();
    if (gamma == 0.0) return rho;

    const double spread = gamma * (d - 1) * (d - 1);
    const long mode = static_cast<long>(std::ceil(spread));
    const long cap = 10 * mode + 64;
    const double stop = tol * 1e-3;

    // |K_j(n,n)| in log space; the phase of K_j(n,n) is (-i)^j for n > 0.
    auto log_mag = [&](long j, int n) {
        if (n == 0) return j == 0 ? 0.0 : -INFINITY;
        return -0.5 * gamma * n * n + static_cast<double>(j) * std::log(std::sqrt(gamma) * n) -
               0.5 * std::lgamma(static_cast<double>(j) + 1.0);
    };

    ComplexMatrix acc = ComplexMatrix::Zero(d, d);
    std::vector<double> kd(static_cast<std::size_t>(d));
    int small_run = 0;
    double last_norm = 0.0;
    for (long j = 0; j <= cap; ++j) {
        for (int n = 0; n < d; ++n) kd[static_cast<std::size_t>(n)] = std::exp(log_mag(j, n));
        // K_j rho K_j^dagger: the (-i)^j (i)^j phases cancel.
        double term_norm = 0.0;
        for (int m = 0; m < d; ++m) {
            const double km = kd[static_cast<std::size_t>(m)];
            if (km == 0.0) continue;
            for (int n = 0; n < d; ++n) {
                const double kn = kd[static_cast<std::size_t>(n)];
                if (kn == 0.0) continue;
                acc(m, n) += km * kn * rho(m, n);
            }
            term_norm += km * km * rho(m, m).real();
        }
        last_norm = std::abs(term_norm);
        if (j >= mode && last_norm < stop) {
            if (++small_run >= 3) return DensityMatrix::trusted(std::move(acc));
        } else {
            small_run = 0;
        }
    }
    throw numeric_error("Kraus series did not converge within the iteration cap", last_norm);
}

// ---------------------------------------------------------------------------
// Discrimination figure of merit

/// Delta = N_gamma0(phi) - N_gamma1(phi) for the pure probe phi.
inline HermitianMatrix delta_matrix(const ProbeState& probe, const GammaPair& g) {
    const int d = probe.dim();
    const GapTable gaps(g, d - 1);
    const auto r = probe.coeffs();
    const auto th = probe.phases();
    std::vector<double> amp(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) amp[static_cast<std::size_t>(j)] = std::sqrt(r[static_cast<std::size_t>(j)]);

    HermitianMatrix delta = HermitianMatrix::Zero(d, d);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            if (m == n) continue;
            const auto um = static_cast<std::size_t>(m);
            const auto un = static_cast<std::size_t>(n);
            const double mag = amp[um] * amp[un] * gaps[static_cast<std::size_t>(std::abs(m - n))];
            const double phase = th[um] - th[un];
            delta(m, n) = phase == 0.0 ? cplx(mag, 0.0) : std::polar(mag, phase);
        }
    }
    return delta;
}

/// Sum of absolute eigenvalues of a Hermitian matrix. The input is
/// symmetrized before the Hermitian eigensolve; asymmetry above 1e-10 is an
/// error.
inline double trace_norm(const HermitianMatrix& m) {
    if (m.rows() != m.cols()) throw invalid_argument("trace_norm: matrix must be square");
    if (m.size() == 0) return 0.0;
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
        throw invalid_argument("trace_norm: matrix is not Hermitian");
    }
    const HermitianMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<HermitianMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

/// Real symmetric overload.
inline double trace_norm(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw invalid_argument("trace_norm: matrix must be square");
    if (m.size() == 0) return 0.0;
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kHermitianTol) {
        throw invalid_argument("trace_norm: matrix is not symmetric");
    }
    const Eigen::MatrixXd h = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

inline double success_from_norm(double norm) { return std::clamp(0.5 * (1.0 + 0.5 * norm), 0.5, 1.0); }

/// Helstrom success probability 1/2 (1 + 1/2 ||Delta||_1).
inline double helstrom_success(const ProbeState& probe, const GammaPair& g) {
    if (g.coincident()) return 0.5;
    return success_from_norm(trace_norm(delta_matrix(probe, g)));
}

/// ||Delta||_1 for the phase-free probe with coefficients r (hot path of the
/// optimizers; no validation of r).
inline double phase_free_trace_norm(std::span<const double> r, const GapTable& gaps) {
    const auto d = static_cast<Eigen::Index>(r.size());
    Eigen::MatrixXd delta(d, d);
    for (Eigen::Index m = 0; m < d; ++m) {
        delta(m, m) = 0.0;
        const double am = std::sqrt(r[static_cast<std::size_t>(m)]);
        for (Eigen::Index n = m + 1; n < d; ++n) {
            const double v = am * std::sqrt(r[static_cast<std::size_t>(n)]) * gaps[static_cast<std::size_t>(n - m)];
            delta(m, n) = v;
            delta(n, m) = v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(delta, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

struct ProbeSymmetries {
    ProbeState phase_stripped;
    ProbeState flipped;
};

/// U_phi (phase removal) and V (level reversal |i> -> |d-1-i>) images of a
/// probe. Both leave the success probability unchanged.
inline ProbeSymmetries symmetry_transforms(const ProbeState& probe) {
    std::vector<double> r(probe.coeffs().begin(), probe.coeffs().end());
    std::vector<double> rev(r.rbegin(), r.rend());
    std::vector<double> th(probe.phases().rbegin(), probe.phases().rend());
    std::vector<double> zeros(r.size(), 0.0);
    return {ProbeState(std::move(r), std::move(zeros)), ProbeState(std::move(rev), std::move(th))};
}

} // namespace dephasing
