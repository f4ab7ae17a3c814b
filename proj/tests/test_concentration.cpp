#include "mcdual/concentration.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace mcdual;

TEST(Concentration, ExchangeSymmetry)
{
    const auto base = spectral_from_kappas(-1.0, {1.0, 1.0}, {1.0, 1.0});
    const std::vector<double> m = {1.0};
    const auto rep = concentration_sweep(base, 0, m);
    EXPECT_NEAR(rep.fractions[0][0], 0.5, 1e-10);
    EXPECT_NEAR(rep.fractions[0][1], 0.5, 1e-10);
}

TEST(Concentration, WeightSweepGathersTheState)
{
    const auto base = spectral_from_kappas(-1.0, {1.0, std::sqrt(2.0)}, {1.0, 1.0});
    const std::vector<double> m = {1.0, 10.0, 100.0, 1000.0};
    const auto rep = concentration_sweep(base, 0, m);
    ASSERT_EQ(rep.fractions.size(), 4u);
    for (std::size_t k = 1; k < 4; ++k) {
        EXPECT_GT(rep.fractions[k][0], rep.fractions[k - 1][0]);
    }
    EXPECT_GT(rep.fractions[3][0], 0.99);
    EXPECT_EQ(rep.sweep_values, m);
    EXPECT_EQ(rep.target_channel, 0u);
}

TEST(Concentration, NormsMatchAnIndependentQuadrature)
{
    // Trapezoid rule on a fine grid; the integrand is smooth and decays fast.
    const auto s = spectral_from_kappas(-1.0, {1.0, std::sqrt(2.0)}, {10.0, 1.0});
    const auto b = bound_state(s);
    std::vector<double> norms(2, 0.0);
    const double h = 1e-3;
    for (double x = -60.0; x <= 40.0; x += h) {
        const Eigen::VectorXd psi = b.components(x);
        norms[0] += h * psi[0] * psi[0];
        norms[1] += h * psi[1] * psi[1];
    }
    EXPECT_NEAR(b.channel_norms()[0], norms[0], 1e-8);
    EXPECT_NEAR(b.channel_norms()[1], norms[1], 1e-8);
}

TEST(Concentration, SlopesAtOriginAreDiagnostics)
{
    const auto base = spectral_from_kappas(-1.0, {1.0, std::sqrt(2.0)}, {1.0, 1.0});
    const std::vector<double> m = {2.0};
    const auto rep = concentration_sweep(base, 0, m);
    auto s = base;
    s.weights[0] = 2.0;
    const auto b = bound_state(s);
    const Eigen::VectorXd fd = (b.components(1e-5) - b.components(-1e-5)) / 2e-5;
    EXPECT_NEAR(rep.slopes_at_origin[0][0], fd[0], 1e-8);
    EXPECT_NEAR(rep.slopes_at_origin[0][1], fd[1], 1e-8);
}

TEST(Concentration, Validation)
{
    const auto base = spectral_from_kappas(-1.0, {1.0, std::sqrt(2.0)}, {1.0, 1.0});
    EXPECT_THROW(concentration_sweep(base, 2, std::vector<double>{1.0}), validation_error);
    EXPECT_THROW(concentration_sweep(base, 0, std::vector<double>{}), validation_error);
    EXPECT_THROW(concentration_sweep(base, 0, std::vector<double>{1.0, 1.0}), validation_error);
    EXPECT_THROW(concentration_sweep(base, 0, std::vector<double>{-1.0}), validation_error);
}

TEST(ConcentrationProperty, FractionsSumToOne)
{
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = oracle::random_spectral(rng, 1 + trial % 4);
        std::vector<double> m = {0.5, 3.0, 40.0};
        const auto rep = concentration_sweep(s, trial % s.n_channels, m, 2);
        for (const auto& f : rep.fractions) {
            EXPECT_NEAR(std::accumulate(f.begin(), f.end(), 0.0), 1.0, 1e-10);
            for (double x : f) {
                EXPECT_GE(x, 0.0);
            }
        }
    }
}
