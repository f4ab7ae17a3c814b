#include "mcdual/bound_state.hpp"
#include "mcdual/duality.hpp"
#include "mcdual/integrate.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace mcdual;

namespace {

PotentialMatrix sech_potential() { return build_reflectionless(spectral_from_kappas(-1.0, {1.0}, {std::sqrt(2.0)})); }

}  // namespace

TEST(Duality, ZeroSystemHasNoForce)
{
    const auto sys = dualize(zero_potential(1), {0.0});
    for (double t : {-3.0, 0.0, 4.0}) {
        EXPECT_EQ(force(sys, t, Eigen::VectorXd::Constant(1, 2.5))[0], 0.0);
    }
    const auto sys3 = dualize(zero_potential(3), {0.0, 0.0, 0.0});
    EXPECT_EQ(force(sys3, 1.0, Eigen::Vector3d(1, 2, 3)), Eigen::VectorXd::Zero(3));
}

TEST(Duality, SechSquaredForce)
{
    const auto sys = dualize(sech_potential(), {-1.0});
    EXPECT_NEAR(force(sys, 0.0, Eigen::VectorXd::Constant(1, 1.0))[0], -1.0, 1e-15);
    for (double t = -5.0; t <= 5.0; t += 0.5) {
        const double s = oracle::sech(t);
        EXPECT_NEAR(force(sys, t, Eigen::VectorXd::Constant(1, 0.3))[0], (-2.0 * s * s + 1.0) * 0.3, 1e-14);
    }
}

TEST(Duality, ZeroStateHasNoForce)
{
    const auto sys = dualize(build_reflectionless(spectral_from_kappas(-1.0, {1.0, 2.0}, {1.0, 3.0})), {0.5, -2.0});
    EXPECT_EQ(force(sys, 0.3, Eigen::VectorXd::Zero(2)), Eigen::VectorXd::Zero(2));
}

TEST(Duality, ForceIsTermByTerm)
{
    const auto v = build_reflectionless(spectral_from_kappas(-1.0, {1.0, 1.5, 0.7}, {1.0, 2.0, 0.5}));
    const std::vector<double> e = {-0.3, 0.8, -1.7};
    const auto sys = dualize(v, e);
    const Eigen::Vector3d z(0.2, -1.1, 0.7);
    const double t = 0.4;
    const Eigen::VectorXd f = force(sys, t, z);
    const Eigen::MatrixXd m = v(t);
    for (int i = 0; i < 3; ++i) {
        double ref = -e[i] * z[i];
        for (int j = 0; j < 3; ++j) {
            ref += m(i, j) * z[j];
        }
        EXPECT_NEAR(f[i], ref, 1e-14);
    }
}

TEST(Duality, DimensionChecks)
{
    EXPECT_THROW(dualize(zero_potential(2), {0.0}), validation_error);
    EXPECT_THROW(dualize(zero_potential(2), {0.0, 0.0}, Interpretation::single_particle_3d), validation_error);
    const auto sys = dualize(zero_potential(2), {0.0, 0.0});
    EXPECT_THROW(force(sys, 0.0, Eigen::VectorXd::Zero(3)), validation_error);
}

TEST(Duality, InterpretationLabels)
{
    const auto few = dualize(zero_potential(3), {0.0, 0.0, 0.0});
    EXPECT_EQ(few.coordinate_names(), (std::vector<std::string>{"z_1", "z_2", "z_3"}));
    const auto three = dualize(zero_potential(3), {0.0, 0.0, 0.0}, Interpretation::single_particle_3d);
    EXPECT_EQ(three.coordinate_names(), (std::vector<std::string>{"x", "y", "z"}));
    EXPECT_EQ(force(few, 1.0, Eigen::Vector3d(1, 2, 3)), force(three, 1.0, Eigen::Vector3d(1, 2, 3)));
}

TEST(Duality, QuantumEnergyOf)
{
    EXPECT_EQ(quantum_energy_of(std::vector<double>{-1.0}, std::vector<double>{0.0}), -1.0);
    EXPECT_EQ(quantum_energy_of(std::vector<double>{-1.0, -2.0}, std::vector<double>{0.0, 1.0}), -1.0);
    EXPECT_THROW(quantum_energy_of(std::vector<double>{-1.0, 0.0}, std::vector<double>{0.0, 0.0}), validation_error);
    EXPECT_THROW(quantum_energy_of(std::vector<double>{-1.0}, std::vector<double>{0.0, 0.0}), validation_error);
}

TEST(Duality, ChannelEnergiesRoundTrip)
{
    const std::vector<double> th = {0.0, 1.0, -0.5};
    const auto e = channel_energies(0.25, th);
    EXPECT_EQ(e, (std::vector<double>{0.25, -0.75, 0.75}));
    EXPECT_DOUBLE_EQ(quantum_energy_of(e, th), 0.25);
}

TEST(DualityProperty, Linearity)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 4;
        const auto s = oracle::random_spectral(rng, n);
        std::vector<double> e(n);
        for (auto& x : e) {
            x = u(rng);
        }
        const auto sys = dualize(build_reflectionless(s), e);
        Eigen::VectorXd z1(n), z2(n);
        for (std::size_t i = 0; i < n; ++i) {
            z1[i] = u(rng);
            z2[i] = u(rng);
        }
        const double a = u(rng), b = u(rng), t = u(rng);
        const Eigen::VectorXd lhs = force(sys, t, a * z1 + b * z2);
        const Eigen::VectorXd rhs = a * force(sys, t, z1) + b * force(sys, t, z2);
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + rhs.cwiseAbs().maxCoeff()));
        EXPECT_LT((force(sys, t, 2.0 * z1) - 2.0 * force(sys, t, z1)).cwiseAbs().maxCoeff(), 1e-15 * 64);
    }
}

TEST(DualityProperty, RoundTripWithStationaryEquation)
{
    // Along the analytic bound state, zdot' - F equals minus the stationary residual.
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 10; ++trial) {
        const auto s = oracle::random_spectral(rng, 1 + trial % 3);
        const auto v = build_reflectionless(s);
        const auto b = bound_state(s);
        const auto sys = dualize(v, channel_energies(s.e_bound, s.thresholds));
        for (double t = -6.0; t <= 6.0; t += 0.25) {
            const Eigen::VectorXd psi = b.components(t);
            Eigen::VectorXd stationary = v(t) * psi;
            for (std::size_t i = 0; i < s.n_channels; ++i) {
                stationary[i] -= (s.e_bound - s.thresholds[i]) * psi[i];
            }
            EXPECT_LT((force(sys, t, psi) - stationary).cwiseAbs().maxCoeff(), 1e-14);
        }
    }
}

TEST(DualityProperty, SuperpositionOfIntegratedSolutions)
{
    const auto sys = dualize(build_reflectionless(spectral_from_kappas(-1.0, {1.0, 1.5}, {1.0, 2.0})), {-0.4, 0.3});
    const double rel = 1e-11, abs = 1e-13;
    IntegrateOptions opt;
    opt.sample_step = 0.1;
    const ClassicalState s1{-4.0, Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 0.5)};
    const ClassicalState s2{-4.0, Eigen::Vector2d(-0.3, 2.0), Eigen::Vector2d(1.0, 0.0)};
    const ClassicalState s3{-4.0, 2.0 * s1.z - 3.0 * s2.z, 2.0 * s1.zdot - 3.0 * s2.zdot};
    const auto a = integrate(sys, s1, 4.0, rel, abs, opt);
    const auto b = integrate(sys, s2, 4.0, rel, abs, opt);
    const auto c = integrate(sys, s3, 4.0, rel, abs, opt);
    ASSERT_EQ(a.samples.size(), c.samples.size());
    for (std::size_t k = 0; k < c.samples.size(); ++k) {
        const Eigen::VectorXd combo = 2.0 * a.samples[k].z - 3.0 * b.samples[k].z;
        EXPECT_LT((combo - c.samples[k].z).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + combo.cwiseAbs().maxCoeff()));
    }
}
