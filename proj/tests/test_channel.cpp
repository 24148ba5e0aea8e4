#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dephasing/channel.hpp"
#include "oracle.hpp"
#include "random_inputs.hpp"

using namespace dephasing;

namespace {

const double kLn2 = std::log(2.0);

Eigen::MatrixXcd to_eigen(const oracle::Cplx& m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXcd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) out(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return out;
}

} // namespace

TEST(GammaPair, CanonicalOrderAndValidation) {
    GammaPair g(2.0, 1.0);
    EXPECT_EQ(g.gamma0(), 1.0);
    EXPECT_EQ(g.gamma1(), 2.0);
    EXPECT_FALSE(g.coincident());
    EXPECT_TRUE(GammaPair(0.4, 0.4).coincident());
    EXPECT_THROW(GammaPair(-0.1, 1.0), invalid_argument);
    EXPECT_THROW(GammaPair(0.0, std::nan("")), invalid_argument);
    EXPECT_THROW(GammaPair(0.0, INFINITY), invalid_argument);
}

TEST(GapCoefficient, Values) {
    EXPECT_EQ(gap_coefficient(1, GammaPair(0.7, 0.7)), 0.0);
    EXPECT_NEAR(gap_coefficient(1, GammaPair(0.0, 2 * kLn2)), 0.5, 1e-15);
    EXPECT_NEAR(gap_coefficient(2, GammaPair(0.05, 0.1)), 0.0861066649579777, 1e-15);
    EXPECT_NEAR(gap_coefficient(3, GammaPair(0.0, 0.1)), 0.362371848378227, 1e-15);
    EXPECT_THROW(gap_coefficient(0, GammaPair(0.0, 1.0)), invalid_argument);
    EXPECT_THROW(gap_coefficient(-2, GammaPair(0.0, 1.0)), invalid_argument);
}

TEST(GapCoefficient, NonNegativeUnderCanonicalOrder) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (int i = 0; i < 500; ++i) {
        const GammaPair g(u(rng), u(rng));
        for (int k = 1; k <= 7; ++k) EXPECT_GE(gap_coefficient(k, g), 0.0);
    }
}

TEST(MakeProbe, Examples) {
    const auto q = make_probe({0.5, 0.5});
    EXPECT_EQ(q.dim(), 2);
    EXPECT_DOUBLE_EQ(q.average_energy(), 0.5);
    EXPECT_TRUE(q.phase_free());
    EXPECT_THROW(make_probe({0.5, 0.4}), normalization_error);
    EXPECT_DOUBLE_EQ(make_probe({0.25, 0.25, 0.25, 0.25}).average_energy(), 1.5);
}

TEST(MakeProbe, Errors) {
    EXPECT_THROW(make_probe({1.0}), invalid_argument);
    EXPECT_THROW(make_probe({1.2, -0.2}), invalid_argument);
    EXPECT_THROW(make_probe({0.5, 0.5}, std::vector<double>{0.0}), invalid_argument);
    try {
        make_probe({0.3, 0.3});
        FAIL();
    } catch (const normalization_error& e) {
        EXPECT_NEAR(e.deviation(), -0.4, 1e-15);
    }
}

TEST(MakeProbe, SmallResidualRemovedAndPhasesReduced) {
    const auto p = make_probe({0.5 + 4e-10, 0.5}, std::vector<double>{-1.0, 7.0});
    double s = 0.0;
    for (double r : p.coeffs()) s += r;
    EXPECT_NEAR(s, 1.0, 1e-15);
    EXPECT_NEAR(p.phases()[0], 2 * M_PI - 1.0, 1e-15);
    EXPECT_NEAR(p.phases()[1], 7.0 - 2 * M_PI, 1e-15);
}

TEST(DensityMatrix, Validation) {
    Eigen::MatrixXcd m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    EXPECT_NO_THROW(DensityMatrix{m});
    Eigen::MatrixXcd bad = m;
    bad(0, 1) = 0.4;
    EXPECT_THROW(DensityMatrix{bad}, invalid_argument);
    Eigen::MatrixXcd neg(2, 2);
    neg << 1.5, 0.0, 0.0, -0.5;
    EXPECT_THROW(DensityMatrix{neg}, invalid_argument);
    Eigen::MatrixXcd tr = m * 2.0;
    EXPECT_THROW(DensityMatrix{tr}, invalid_argument);
}

TEST(ApplyDephasing, Examples) {
    Eigen::MatrixXcd plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    const auto out = apply_dephasing(DensityMatrix(plus), 2 * kLn2);
    EXPECT_NEAR(out(0, 1).real(), 0.25, 1e-15);
    EXPECT_NEAR(out(1, 0).real(), 0.25, 1e-15);

    Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(3, 3);
    diag(0, 0) = 0.2;
    diag(1, 1) = 0.3;
    diag(2, 2) = 0.5;
    EXPECT_EQ(apply_dephasing(DensityMatrix(diag), 5.0).matrix(), diag);
    EXPECT_THROW(apply_dephasing(DensityMatrix(diag), -1.0), invalid_argument);
}

TEST(ApplyDephasing, MatchesEntrywiseOracle) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const int d = 2 + static_cast<int>(rng() % 5);
        const auto r = testing_inputs::simplex(rng, d);
        const auto th = testing_inputs::phases(rng, d);
        const double gamma = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
        const auto probe = make_probe(r, th);
        const auto out = apply_dephasing(DensityMatrix::from_probe(probe), gamma);
        const auto ref = to_eigen(oracle::dephased(std::vector<double>(probe.coeffs().begin(), probe.coeffs().end()),
                                                   std::vector<double>(probe.phases().begin(), probe.phases().end()),
                                                   gamma));
        EXPECT_LT((out.matrix() - ref).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(ApplyDephasing, TraceAndPositivityPreserved) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 500; ++i) {
        const int d = 2 + static_cast<int>(rng() % 5);
        const auto rho = testing_inputs::mixed_state(rng, d);
        const double gamma = std::uniform_real_distribution<double>(0.0, 50.0)(rng);
        const auto out = apply_dephasing(rho, gamma);
        EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-12);
        EXPECT_NEAR(out.matrix().trace().imag(), 0.0, 1e-12);
        EXPECT_GE(out.min_eigenvalue(), -1e-10);
    }
}

TEST(ApplyDephasing, Semigroup) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int i = 0; i < 500; ++i) {
        const int d = 2 + static_cast<int>(rng() % 5);
        const auto rho = testing_inputs::mixed_state(rng, d);
        const double a = i == 0 ? 0.3 : u(rng), b = i == 0 ? 0.7 : u(rng);
        const auto twice = apply_dephasing(apply_dephasing(rho, a), b);
        const auto once = apply_dephasing(rho, a + b);
        EXPECT_LT((twice.matrix() - once.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ApplyDephasingKraus, Examples) {
    std::mt19937_64 rng(6);
    const auto rho = testing_inputs::mixed_state(rng, 3);
    EXPECT_LT((apply_dephasing_kraus(rho, 0.0, 1e-12).matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((apply_dephasing_kraus(rho, 1.0, 1e-12).matrix() - apply_dephasing(rho, 1.0).matrix())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);

    Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(4, 4);
    for (int j = 0; j < 4; ++j) diag(j, j) = 0.25;
    // A diagonal input stays diagonal at any truncation; the diagonal itself
    // is exact up to the truncation tolerance.
    for (double tol : {1e-3, 1e-6, 1e-12}) {
        const auto out = apply_dephasing_kraus(DensityMatrix(diag), 3.0, tol);
        for (int m = 0; m < 4; ++m) {
            for (int n = 0; n < 4; ++n) {
                if (m != n) {
                    EXPECT_EQ(out(m, n), cplx(0.0));
                }
            }
            EXPECT_NEAR(out(m, m).real(), 0.25, tol);
        }
    }
    EXPECT_THROW(apply_dephasing_kraus(rho, 1.0, 0.0), invalid_argument);
}

TEST(ApplyDephasingKraus, AgreesWithEntrywiseForm) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int i = 0; i < 500; ++i) {
        const int d = 2 + static_cast<int>(rng() % 5);
        const auto rho = testing_inputs::mixed_state(rng, d);
        const double gamma = u(rng);
        const auto k = apply_dephasing_kraus(rho, gamma, 1e-12);
        const auto e = apply_dephasing(rho, gamma);
        EXPECT_LT((k.matrix() - e.matrix()).cwiseAbs().maxCoeff(), 1e-12) << "d=" << d << " gamma=" << gamma;
    }
}

TEST(DeltaMatrix, Structure) {
    const auto p = make_probe({0.2, 0.3, 0.5});
    EXPECT_EQ(delta_matrix(p, GammaPair(0.8, 0.8)).cwiseAbs().maxCoeff(), 0.0);

    const GammaPair g(1.0, 2.0);
    const double r0 = 0.3;
    const auto q = make_probe({r0, 1 - 2 * r0, r0});
    const auto delta = delta_matrix(q, g);
    const double g1 = gap_coefficient(1, g), g2 = gap_coefficient(2, g);
    EXPECT_NEAR(delta(0, 1).real(), g1 * std::sqrt(r0 * (1 - 2 * r0)), 1e-15);
    EXPECT_NEAR(delta(1, 2).real(), g1 * std::sqrt(r0 * (1 - 2 * r0)), 1e-15);
    EXPECT_NEAR(delta(0, 2).real(), g2 * r0, 1e-15);
    for (int j = 0; j < 3; ++j) EXPECT_EQ(delta(j, j), cplx(0.0));
    EXPECT_EQ(delta, delta.transpose());
    EXPECT_EQ(delta.imag().cwiseAbs().maxCoeff(), 0.0);
}

TEST(TraceNorm, Examples) {
    EXPECT_EQ(trace_norm(Eigen::MatrixXcd::Zero(3, 3).eval()), 0.0);
    Eigen::MatrixXd d(2, 2);
    d << 1, 0, 0, -1;
    EXPECT_NEAR(trace_norm(d), 2.0, 1e-15);
    Eigen::MatrixXd o(2, 2);
    o << 0, 0.25, 0.25, 0;
    EXPECT_NEAR(trace_norm(o), 0.5, 1e-15);
    Eigen::MatrixXd bad(2, 2);
    bad << 0, 1, 0, 0;
    EXPECT_THROW(trace_norm(bad), invalid_argument);
    Eigen::MatrixXcd cbad(2, 2);
    cbad << 0, cplx(0, 1), cplx(0, 1), 0;
    EXPECT_THROW(trace_norm(cbad), invalid_argument);
}

TEST(TraceNorm, MatchesJacobiOracle) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const int d = 1 + static_cast<int>(rng() % 8);
        oracle::Cplx h(static_cast<std::size_t>(d), std::vector<std::complex<double>>(static_cast<std::size_t>(d)));
        for (int a = 0; a < d; ++a) {
            h[a][a] = n(rng);
            for (int b = a + 1; b < d; ++b) {
                h[a][b] = {n(rng), n(rng)};
                h[b][a] = std::conj(h[a][b]);
            }
        }
        EXPECT_NEAR(trace_norm(to_eigen(h)), oracle::trace_norm(h), 1e-12);
    }
}

TEST(HelstromSuccess, Examples) {
    EXPECT_EQ(helstrom_success(make_probe({0.1, 0.2, 0.7}), GammaPair(1.3, 1.3)), 0.5);
    EXPECT_NEAR(helstrom_success(make_probe({0.5, 0.5}), GammaPair(0.0, 2 * kLn2)), 0.625, 1e-15);
    EXPECT_NEAR(helstrom_success(make_probe({1 / 3.0, 1 / 3.0, 1 / 3.0}), GammaPair(1.0, 2.0)), 0.566841285709624,
                1e-14);
}

TEST(HelstromSuccess, MatchesOracleAndIsSwapSymmetric) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 6.0);
    for (int i = 0; i < 500; ++i) {
        const int d = 2 + static_cast<int>(rng() % 6);
        const auto r = testing_inputs::simplex(rng, d);
        const auto th = testing_inputs::phases(rng, d);
        const double a = u(rng), b = u(rng);
        const auto p = make_probe(r, th);
        const double ps = helstrom_success(p, GammaPair(a, b));
        EXPECT_EQ(ps, helstrom_success(p, GammaPair(b, a)));
        const double ref = oracle::success(std::vector<double>(p.coeffs().begin(), p.coeffs().end()),
                                           std::vector<double>(p.phases().begin(), p.phases().end()), a, b);
        EXPECT_NEAR(ps, ref, 1e-12);
        EXPECT_NEAR(ref, oracle::success(std::vector<double>(p.coeffs().begin(), p.coeffs().end()),
                                         std::vector<double>(p.phases().begin(), p.phases().end()), b, a),
                    1e-12);
        EXPECT_GE(ps, 0.5);
        EXPECT_LE(ps, 1.0);
    }
}

TEST(HelstromSuccess, PhaseFreeHotPathMatches) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 6.0);
    for (int i = 0; i < 200; ++i) {
        const int d = 2 + static_cast<int>(rng() % 7);
        const auto r = testing_inputs::simplex(rng, d);
        const GammaPair g(u(rng), u(rng));
        const auto p = make_probe(r);
        EXPECT_NEAR(success_from_norm(phase_free_trace_norm(p.coeffs(), GapTable(g, d - 1))), helstrom_success(p, g),
                    1e-14);
    }
}

TEST(SymmetryTransforms, Examples) {
    const auto p = make_probe({0.2, 0.5, 0.3}, std::vector<double>{0.3, 2.0, 5.1});
    const GammaPair g(1.0, 2.0);
    const auto s = symmetry_transforms(p);
    EXPECT_TRUE(s.phase_stripped.phase_free());
    EXPECT_NEAR(helstrom_success(s.phase_stripped, g), helstrom_success(p, g), 1e-12);

    const auto q = symmetry_transforms(make_probe({0.7, 0.3}));
    EXPECT_EQ(q.flipped.coeffs()[0], 0.3);
    EXPECT_EQ(q.flipped.coeffs()[1], 0.7);
    EXPECT_NEAR(helstrom_success(q.flipped, g), helstrom_success(make_probe({0.7, 0.3}), g), 1e-15);

    const auto sym = make_probe({0.2, 0.3, 0.3, 0.2});
    const auto t = symmetry_transforms(sym);
    EXPECT_TRUE(std::ranges::equal(t.phase_stripped.coeffs(), sym.coeffs()));
    EXPECT_TRUE(std::ranges::equal(t.flipped.coeffs(), sym.coeffs()));
    EXPECT_TRUE(t.flipped.phase_free());
}

TEST(SymmetryTransforms, PhaseAndFlipInvariance) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 6.0);
    for (int i = 0; i < 500; ++i) {
        const int d = 2 + static_cast<int>(rng() % 6);
        const auto p = make_probe(testing_inputs::simplex(rng, d), testing_inputs::phases(rng, d));
        const GammaPair g(u(rng), u(rng));
        const auto s = symmetry_transforms(p);
        const double ps = helstrom_success(p, g);
        EXPECT_NEAR(helstrom_success(s.phase_stripped, g), ps, 1e-12);
        EXPECT_NEAR(helstrom_success(s.flipped, g), ps, 1e-12);
    }
}

TEST(Observation, MixturesNeverBeatTheirBestComponent) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int i = 0; i < 500; ++i) {
        const GammaPair g(u(rng), u(rng));
        const int k = 2 + static_cast<int>(rng() % 3);
        const auto w = testing_inputs::simplex(rng, k);
        Eigen::MatrixXcd mix = Eigen::MatrixXcd::Zero(3, 3);
        double best = 0.0;
        for (int c = 0; c < k; ++c) {
            const auto p = make_probe(testing_inputs::simplex(rng, 3), testing_inputs::phases(rng, 3));
            const auto pure = DensityMatrix::from_probe(p);
            mix += w[static_cast<std::size_t>(c)] * pure.matrix();
            best = std::max(best, trace_norm(delta_matrix(p, g)));
        }
        const DensityMatrix rho(mix);
        const Eigen::MatrixXcd d =
            apply_dephasing(rho, g.gamma0()).matrix() - apply_dephasing(rho, g.gamma1()).matrix();
        EXPECT_LE(trace_norm(d), best + 1e-12);
    }
}
