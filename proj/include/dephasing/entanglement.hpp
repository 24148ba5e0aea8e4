#pragma once

// Side entanglement: the probe is sum_i sqrt(r_i)|i>|i> and only the second
// factor passes through the channel. Everything is computed on the full
// d^2-dimensional space so that equality with the single-system figure of
// merit is checked rather than assumed.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dephasing/channel.hpp"
#include "dephasing/errors.hpp"
#include "dephasing/optimizer.hpp"

namespace dephasing {

/// Two-qudit pure state in Schmidt form sum_i sqrt(r_i)|i>|i>.
class EntangledProbe {
public:
    /// The Schmidt vector follows the normalization policy of make_probe.
    EntangledProbe(int dim, std::vector<double> schmidt) {
        if (dim != static_cast<int>(schmidt.size())) throw invalid_argument("Schmidt vector length must equal dim");
        const ProbeState p = make_probe(std::move(schmidt));
        schmidt_.assign(p.coeffs().begin(), p.coeffs().end());
    }

    int dim() const noexcept { return static_cast<int>(schmidt_.size()); }
    std::span<const double> schmidt() const noexcept { return schmidt_; }

    /// Amplitudes on C^d (x) C^d; |a>|b> has index a*d + b.
    Eigen::VectorXcd amplitudes() const {
        const int d = dim();
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d * d);
        for (int i = 0; i < d; ++i) psi(i * d + i) = std::sqrt(schmidt_[static_cast<std::size_t>(i)]);
        return psi;
    }

private:
    std::vector<double> schmidt_;
};

/// (id (x) N_gamma)(psi) as a full d^2 x d^2 matrix. The channel damps
/// |a b><a' b'| by exp(-gamma (b-b')^2 / 2).
inline DensityMatrix extended_output(const EntangledProbe& psi, double gamma) {
    if (!std::isfinite(gamma) || gamma < 0.0) throw invalid_argument("gamma must be finite and non-negative");
    const int d = psi.dim();
    const Eigen::VectorXcd v = psi.amplitudes();
    ComplexMatrix out = v * v.adjoint();
    for (int row = 0; row < d * d; ++row) {
        for (int col = 0; col < d * d; ++col) {
            const int k = row % d - col % d;
            if (k != 0) out(row, col) *= std::exp(-0.5 * gamma * k * k);
        }
    }
    return DensityMatrix::trusted(std::move(out));
}

namespace detail {

/// Real d^2 x d^2 difference operator for Schmidt coefficients r, with the
/// same damping layout as extended_output.
inline double assisted_norm(std::span<const double> r, const GapTable& gaps) {
    const auto d = static_cast<Eigen::Index>(r.size());
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (i == j) continue;
            const double amp = std::sqrt(r[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(j)]);
            delta(i * d + i, j * d + j) = amp * gaps[static_cast<std::size_t>(std::abs(i - j))];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(delta, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

} // namespace detail

/// ||(id (x) N_gamma0)(psi) - (id (x) N_gamma1)(psi)||_1 on the full space.
inline double assisted_trace_distance(const EntangledProbe& psi, const GammaPair& g) {
    if (g.coincident()) return 0.0;
    const ComplexMatrix diff =
        extended_output(psi, g.gamma0()).matrix() - extended_output(psi, g.gamma1()).matrix();
    return trace_norm(diff);
}

/// Best assisted success probability over Schmidt vectors, searched over
/// the same mirror-symmetric family as brute_force_unconstrained.
inline DiscriminationResult assisted_optimum(int d, const GammaPair& g, const OptimizerOptions& opts = {}) {
    detail::check_dim(d, 2, 6, "assisted_optimum");
    opts.validate();
    const GapTable gaps(g, d - 1);
    return detail::maximize_mirror_family(
        d, [gaps](std::span<const double> r) { return 0.5 * (1.0 + 0.5 * detail::assisted_norm(r, gaps)); }, opts);
}

} // namespace dephasing
