#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <numbers>

#include "oracles.hpp"
#include "wgm/model.hpp"

using namespace wgm;
using std::numbers::pi;

namespace {

double max_abs(const DenseMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

ModelParams fig2() {
    ModelParams p = ModelParams::reference();
    p.drive = 0.0;
    p.kerr = 0.0;
    return p;
}

} // namespace

TEST(Model, ValidateRejectsUnphysicalParameters) {
    ModelParams p = ModelParams::reference();
    EXPECT_NO_THROW(p.validate());
    auto expect_bad = [](ModelParams q) { EXPECT_THROW(q.validate(), InvalidParameter); };
    ModelParams q = p; q.gamma_in = 0.0; expect_bad(q);
    q = p; q.gamma_ex = -0.1; expect_bad(q);
    q = p; q.kerr = -1.0; expect_bad(q);
    q = p; q.drive = -1.0; expect_bad(q);
    q = p; q.m = 0; expect_bad(q);
    q = p; q.eps1 = {1.0, 0.01}; expect_bad(q);
}

TEST(Model, NormalizationDividesByGammaIn) {
    ModelParams p = ModelParams::reference();
    p.gamma_in = 2.0;
    p.delta = 0.6;
    const ModelParams n = p.normalized();
    EXPECT_EQ(n.gamma_in, 1.0);
    EXPECT_EQ(n.gamma_ex, 0.5);
    EXPECT_EQ(n.delta, 0.3);
    EXPECT_EQ(n.eps1, p.eps1 / 2.0);
    EXPECT_EQ(n.kerr, p.kerr / 2.0);
    EXPECT_EQ(n.beta, p.beta);
}

TEST(Model, CavityDetuningRoundTrip) {
    ModelParams p = ModelParams::reference();
    p.set_cavity_detuning(-1.0);
    EXPECT_NEAR(p.delta, -1.0 + 2.9999, 1e-14);
    EXPECT_NEAR(p.cavity_detuning(), -1.0, 1e-14);
}

TEST(Model, BackscatterSpecExamples) {
    ModelParams p = fig2();
    p.beta = 0.0;
    auto [a, b] = backscatter_coeffs(p);
    EXPECT_EQ(a, p.eps1 + p.eps2);
    EXPECT_EQ(b, p.eps1 + p.eps2);

    p.beta = pi / 8;
    std::tie(a, b) = backscatter_coeffs(p);
    EXPECT_NEAR(std::abs(a - (p.eps1 - p.eps2)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(b - (p.eps1 - p.eps2)), 0.0, 1e-14);

    p.beta = pi / 16;
    std::tie(a, b) = backscatter_coeffs(p);
    EXPECT_NEAR(std::abs(a - (p.eps1 - kI * p.eps2)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(b - (p.eps1 + kI * p.eps2)), 0.0, 1e-14);
}

TEST(Model, BackscatterProductIdentity) {
    oracle::Gen gen(101);
    for (int trial = 0; trial < 100; ++trial) {
        const ModelParams p = gen.params();
        const auto [a, b] = backscatter_coeffs(p);
        const Complex expected = p.eps1 * p.eps1 + p.eps2 * p.eps2 +
                                 2.0 * p.eps1 * p.eps2 * std::cos(2.0 * p.m * p.beta);
        EXPECT_NEAR(std::abs(a * b - expected), 0.0, 1e-12);
    }
}

TEST(Model, BackscatterPeriodicity) {
    oracle::Gen gen(102);
    for (int trial = 0; trial < 100; ++trial) {
        ModelParams p = gen.params();
        const auto [a, b] = backscatter_coeffs(p);
        p.beta += 2.0 * pi / (2.0 * p.m);
        const auto [a2, b2] = backscatter_coeffs(p);
        EXPECT_NEAR(std::abs(a - a2), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(b - b2), 0.0, 1e-12);
    }
}

// Exchanging the scatterers and mirroring the angle rotates J1 by the phase
// e^{+i 2 m beta} and J2 by its conjugate; the product and the magnitudes
// are what stays fixed.
TEST(Model, ScattererSwapSymmetry) {
    oracle::Gen gen(103);
    for (int trial = 0; trial < 100; ++trial) {
        const ModelParams p = gen.params();
        ModelParams q = p;
        std::swap(q.eps1, q.eps2);
        q.beta = -p.beta;
        const auto [a, b] = backscatter_coeffs(p);
        const auto [a2, b2] = backscatter_coeffs(q);
        const Complex phase = std::polar(1.0, 2.0 * p.m * p.beta);
        EXPECT_NEAR(std::abs(a2 - phase * a), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(b2 - std::conj(phase) * b), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(a2 * b2 - a * b), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(a2), std::abs(a), 1e-12);
        EXPECT_NEAR(std::abs(b2), std::abs(b), 1e-12);
    }
}

TEST(Model, TotalLossConventions) {
    ModelParams p;
    p.loss = LossConvention::IncludeExternal;
    EXPECT_DOUBLE_EQ(total_loss(p), 2.0);
    ModelParams f = fig2();
    f.loss = LossConvention::PaperLiteral;
    EXPECT_NEAR(total_loss(f), 1.201489, 1e-12);
    f.loss = LossConvention::IncludeExternal;
    EXPECT_NEAR(total_loss(f), 2.201489, 1e-12);
}

TEST(Model, LossConventionStrings) {
    EXPECT_EQ(loss_convention_from_string("include_ex"), LossConvention::IncludeExternal);
    EXPECT_EQ(loss_convention_from_string("paper_literal"), LossConvention::PaperLiteral);
    EXPECT_EQ(to_string(LossConvention::PaperLiteral), "paper_literal");
    EXPECT_THROW(loss_convention_from_string("other"), ConfigError);
}

TEST(Model, SpectrumMatchesDenseEigensolver) {
    ModelParams p = fig2();
    p.beta = pi / 16;
    const EffectiveModeSpectrum s = effective_spectrum(p);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(effective_matrix(p));
    std::vector<Complex> ref = {es.eigenvalues()(0), es.eigenvalues()(1)};
    for (const Complex& ev : s.eigenvalues) {
        const double d = std::min(std::abs(ev - ref[0]), std::abs(ev - ref[1]));
        EXPECT_LE(d, 1e-12);
    }
    EXPECT_FALSE(s.degenerate);
}

TEST(Model, SpectrumInvariantsOnRandomParameters) {
    oracle::Gen gen(104);
    for (int trial = 0; trial < 100; ++trial) {
        const ModelParams p = gen.params();
        const EffectiveModeSpectrum s = effective_spectrum(p);
        const auto [a, b] = backscatter_coeffs(p);
        EXPECT_NEAR(std::abs(s.eigenvalues[0] + s.eigenvalues[1] - 2.0 * s.omega), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(s.eigenvalues[0] - s.eigenvalues[1] - s.splitting), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(s.splitting - 2.0 * std::sqrt(a * b)), 0.0, 1e-12);
        const Eigen::Matrix2cd h = effective_matrix(p);
        for (int k = 0; k < 2; ++k) {
            const Eigen::Vector2cd v = s.eigenvectors[static_cast<std::size_t>(k)];
            EXPECT_LE((h * v - s.eigenvalues[static_cast<std::size_t>(k)] * v).norm(), 1e-12 * (1.0 + v.norm()));
        }
    }
}

TEST(Model, SpectrumSpecExamples) {
    ModelParams p;
    const EffectiveModeSpectrum ep = effective_spectrum(p);
    EXPECT_TRUE(ep.degenerate);
    EXPECT_EQ(ep.eigenvalues[0], ep.omega);
    EXPECT_EQ(ep.eigenvalues[1], ep.omega);

    p.eps1 = {0.7, 0.0};
    p.eps2 = {0.7, 0.0};
    p.beta = 0.0;
    const EffectiveModeSpectrum sym = effective_spectrum(p);
    EXPECT_NEAR(std::abs(sym.splitting - Complex(2.8)), 0.0, 1e-14);
    const Eigen::Vector2cd v0 = sym.eigenvectors[0] / sym.eigenvectors[0](0);
    const Eigen::Vector2cd v1 = sym.eigenvectors[1] / sym.eigenvectors[1](0);
    EXPECT_NEAR(std::abs(v0(1) - Complex(1.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(v1(1) - Complex(-1.0)), 0.0, 1e-14);
}

TEST(Model, ExceptionalAnglesEqualArguments) {
    ModelParams p;
    p.eps1 = {1.0, -0.2};
    p.eps2 = p.eps1;
    p.m = 4;
    const auto angles = exceptional_angles(p, {1});
    ASSERT_EQ(angles.size(), 2u);
    for (const auto& a : angles) {
        EXPECT_NEAR(a.beta, pi / 8, 1e-15);
        EXPECT_LT(a.splitting_abs, 1e-6 * std::abs(p.eps1));
    }
}

TEST(Model, ExceptionalAnglesReferenceParameters) {
    const ModelParams p = fig2();
    const auto angles = exceptional_angles(p, {1, 3, 5});
    ASSERT_EQ(angles.size(), 6u);
    const double arg_diff = std::arg(p.eps1) - std::arg(p.eps2);
    for (const auto& a : angles) {
        const double sign = a.vanishing == VanishingCoupling::J1 ? -1.0 : 1.0;
        EXPECT_NEAR(a.beta, a.l * pi / 8 + sign * arg_diff / 8, 1e-15);
        ModelParams at = p;
        at.beta = a.beta;
        const auto [j1, j2] = backscatter_coeffs(at);
        EXPECT_LT(std::min(std::abs(j1), std::abs(j2)), 1e-6 * std::abs(p.eps1));
        EXPECT_EQ(a.coupling_abs, std::abs(a.vanishing == VanishingCoupling::J1 ? j1 : j2));
    }
    EXPECT_GE(angles[0].beta, 0.39);
    EXPECT_LE(angles[0].beta, 0.40);
}

TEST(Model, ExceptionalAnglesErrors) {
    ModelParams p;
    p.eps1 = {1.0, 0.0};
    p.eps2 = {1.1, 0.0};
    EXPECT_THROW(exceptional_angles(p, {1}), AmplitudeMismatch);
    p.eps2 = {1.0, 0.0};
    EXPECT_THROW(exceptional_angles(p, {2}), InvalidParameter);
    ModelParams zero;
    EXPECT_THROW(exceptional_angles(zero, {1}), AmplitudeMismatch);
}

TEST(Model, HamiltonianMatchesMatrixElementOracle) {
    oracle::Gen gen(105);
    for (int trial = 0; trial < 10; ++trial) {
        const ModelParams p = gen.params(1.0);
        const int n = gen.integer(2, 5);
        const FockOperator h = build_hamiltonian(p, n);
        EXPECT_EQ(h.dims, (std::vector<int>{n, n}));
        EXPECT_LE(max_abs(h.dense() - oracle::dense_hamiltonian(p, n)), 1e-13);
    }
}

TEST(Model, HamiltonianSpecExamples) {
    ModelParams p;
    p.delta = 0.7;
    const DenseMatrix h0 = build_hamiltonian(p, 3).dense();
    EXPECT_LE(max_abs(h0 - DenseMatrix(h0.diagonal().asDiagonal())), 0.0);
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 3; ++a) EXPECT_NEAR(h0(3 * c + a, 3 * c + a).real(), 0.7 * (c + a), 1e-15);

    ModelParams q = fig2();
    q.beta = 0.3;
    q.delta = 0.4;
    const auto [j1, j2] = backscatter_coeffs(q);
    const DenseMatrix h = build_hamiltonian(q, 3).dense();
    const int s10 = 3, s01 = 1;
    EXPECT_NEAR(std::abs(h(s10, s10) - Complex(0.4)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(h(s01, s01) - Complex(0.4)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(h(s10, s01) - j2), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(h(s01, s10) - j1), 0.0, 1e-15);

    q.kerr = 0.059;
    const DenseMatrix hk = build_hamiltonian(q, 3).dense();
    EXPECT_NEAR(std::abs(hk(6, 6) - Complex(2 * 0.4 + 2 * 0.059)), 0.0, 1e-15);
    EXPECT_THROW(build_hamiltonian(q, 1), InvalidParameter);
}

TEST(Model, HamiltonianHermitianWhenCouplingsConjugate) {
    oracle::Gen gen(106);
    for (int trial = 0; trial < 20; ++trial) {
        ModelParams p = gen.params(0.5);
        p.eps1 = {gen.uniform(-1, 1), 0.0};
        p.eps2 = {gen.uniform(-1, 1), 0.0};
        const auto [j1, j2] = backscatter_coeffs(p);
        ASSERT_NEAR(std::abs(j1 - std::conj(j2)), 0.0, 1e-14);
        // the drive enters as i(F aC^+ - F* aC), itself Hermitian
        EXPECT_LE(relative_nonhermiticity(build_hamiltonian(p, 4)), 1e-15);
        p.drive = 0.0;
        EXPECT_LE(relative_nonhermiticity(build_hamiltonian(p, 4)), 1e-15);
    }
}

TEST(Model, HamiltonianNonHermitianOffConjugacy) {
    ModelParams p = fig2();
    p.beta = pi / 16;
    EXPECT_GT(relative_nonhermiticity(build_hamiltonian(p, 3)), 1e-3);
}
