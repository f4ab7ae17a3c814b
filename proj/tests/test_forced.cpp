#include "mcdual/forced.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace mcdual;

namespace {

ClassicalState scalar_state(double t, double z, double zdot)
{
    return {t, Eigen::VectorXd::Constant(1, z), Eigen::VectorXd::Constant(1, zdot)};
}

SourceTerm scalar_source(std::function<double(double)> f)
{
    return SourceTerm(1, [f](double t) { return Eigen::VectorXd::Constant(1, f(t)); });
}

ForceSystem sech_system()
{
    return dualize(build_reflectionless(spectral_from_kappas(-1.0, {1.0}, {std::sqrt(2.0)})), {-1.0});
}

}  // namespace

TEST(Forced, ConstantForce)
{
    const auto sys = dualize(zero_potential(1), {0.0});
    const auto g = scalar_source([](double) { return 2.0; });
    const auto vop = solve_with_source(sys, g, scalar_state(0, 0, 0), 3.0, 1e-10, 1e-12);
    EXPECT_NEAR(vop.back().z[0], 9.0, 1e-8);
    const auto direct = integrate_forced(sys, g, scalar_state(0, 0, 0), 3.0, 1e-10, 1e-12);
    EXPECT_NEAR(direct.back().z[0], 9.0, 1e-8);

    ForcedOptions opt;
    opt.sample_step = 0.25;
    const auto general = solve_with_source(sys, scalar_source([](double) { return -0.5; }),
                                           scalar_state(1.0, 0.3, 1.2), 4.0, 1e-10, 1e-12, opt);
    for (const auto& s : general.samples) {
        const double u = s.t - 1.0;
        EXPECT_NEAR(s.z[0], 0.3 + 1.2 * u - 0.25 * u * u, 1e-8);
    }
}

TEST(Forced, SineForce)
{
    const auto sys = dualize(zero_potential(1), {0.0});
    const auto g = scalar_source([](double t) { return std::sin(t); });
    ForcedOptions opt;
    opt.sample_step = 0.1;
    const auto vop = solve_with_source(sys, g, scalar_state(0, 0, 0), M_PI, 1e-10, 1e-12, opt);
    EXPECT_NEAR(vop.back().z[0], M_PI, 1e-8);
    for (const auto& s : vop.samples) {
        EXPECT_NEAR(s.z[0], s.t - std::sin(s.t), 1e-8);
        EXPECT_NEAR(s.zdot[0], 1.0 - std::cos(s.t), 1e-8);
    }
}

TEST(Forced, BackwardSpan)
{
    const auto sys = dualize(zero_potential(1), {0.0});
    const auto g = scalar_source([](double t) { return std::sin(t); });
    const auto vop = solve_with_source(sys, g, scalar_state(M_PI, M_PI, 2.0), 0.0, 1e-10, 1e-12);
    EXPECT_EQ(vop.front().t, 0.0);
    EXPECT_NEAR(vop.front().z[0], 0.0, 1e-8);
    EXPECT_NEAR(vop.front().zdot[0], 0.0, 1e-8);
}

TEST(Forced, VariationOfParametersMatchesDirectIntegration)
{
    const auto sys = sech_system();
    const auto g = scalar_source([](double t) { return std::exp(-t * t); });
    ForcedOptions opt;
    opt.sample_step = 0.5;
    const auto vop = solve_with_source(sys, g, scalar_state(-10, 0, 0), 10.0, 1e-10, 1e-12, opt);
    const auto direct = integrate_forced(sys, g, scalar_state(-10, 0, 0), 10.0, 1e-10, 1e-12);
    for (const auto& s : vop.samples) {
        const Eigen::VectorXd y = direct.state_at(s.t);
        EXPECT_NEAR(s.z[0], y[0], 1e-6) << "t = " << s.t;
        EXPECT_NEAR(s.zdot[0], y[1], 1e-6) << "t = " << s.t;
    }
}

TEST(Forced, MultichannelCrossCheck)
{
    const auto sys =
        dualize(build_reflectionless(spectral_from_kappas(-1.0, {1.0, std::sqrt(2.0)}, {1.0, 1.0})), {0.4, -0.6});
    const SourceTerm g(2, [](double t) { return Eigen::Vector2d(std::cos(2.0 * t), std::exp(-(t - 1) * (t - 1))); });
    const ClassicalState init{-5.0, Eigen::Vector2d(0.1, 0.0), Eigen::Vector2d(0.0, -0.2)};
    ForcedOptions opt;
    opt.sample_step = 0.5;
    const auto vop = solve_with_source(sys, g, init, 5.0, 1e-10, 1e-12, opt);
    const auto direct = integrate_forced(sys, g, init, 5.0, 1e-10, 1e-12);
    for (const auto& s : vop.samples) {
        const Eigen::VectorXd y = direct.state_at(s.t);
        EXPECT_LT((y.head(2) - s.z).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, s.z.cwiseAbs().maxCoeff()));
    }
}

TEST(Forced, SourceValidation)
{
    EXPECT_THROW(SourceTerm(0, [](double) { return Eigen::VectorXd(); }), validation_error);
    const auto sys = dualize(zero_potential(2), {0.0, 0.0});
    const auto g1 = scalar_source([](double) { return 1.0; });
    const ClassicalState init{0.0, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)};
    EXPECT_THROW(solve_with_source(sys, g1, init, 1.0, 1e-10, 1e-12), validation_error);
    const SourceTerm bad(2, [](double) { return Eigen::Vector2d(1.0, std::nan("")); });
    EXPECT_THROW(integrate_forced(sys, bad, init, 1.0, 1e-10, 1e-12), validation_error);
    const SourceTerm ok(2, [](double) { return Eigen::Vector2d(1.0, 0.0); });
    EXPECT_THROW(solve_with_source(sys, ok, init, 0.0, 1e-10, 1e-12), validation_error);
    EXPECT_THROW(solve_with_source(sys, ok, init, 1.0, 1e-2, 1e-12), validation_error);
}

TEST(ForcedProperty, Superposition)
{
    const auto sys = sech_system();
    const auto g1 = scalar_source([](double t) { return std::exp(-t * t); });
    const auto g2 = scalar_source([](double t) { return 0.3 * std::cos(1.7 * t); });
    const auto g12 = scalar_source([](double t) { return std::exp(-t * t) + 0.3 * std::cos(1.7 * t); });
    ForcedOptions opt;
    opt.sample_step = 0.5;
    const auto a = solve_with_source(sys, g1, scalar_state(-8, 0, 0), 6.0, 1e-10, 1e-12, opt);
    const auto b = solve_with_source(sys, g2, scalar_state(-8, 0, 0), 6.0, 1e-10, 1e-12, opt);
    const auto c = solve_with_source(sys, g12, scalar_state(-8, 0, 0), 6.0, 1e-10, 1e-12, opt);
    ASSERT_EQ(a.samples.size(), c.samples.size());
    for (std::size_t k = 0; k < c.samples.size(); ++k) {
        EXPECT_NEAR(a.samples[k].z[0] + b.samples[k].z[0], c.samples[k].z[0], 1e-6);
    }
}

TEST(ForcedProperty, DefectOfTheForcedSolution)
{
    // Differentiate the sampled solution and check z'' = F + g.
    const auto sys = sech_system();
    const auto g = scalar_source([](double t) { return std::exp(-t * t); });
    ForcedOptions opt;
    opt.sample_step = 0.01;
    const auto vop = solve_with_source(sys, g, scalar_state(-3, 0, 0), 3.0, 1e-11, 1e-13, opt);
    for (std::size_t k = 1; k + 1 < vop.samples.size(); ++k) {
        const auto& s = vop.samples[k];
        const double h = vop.samples[k + 1].t - s.t;
        const double acc = (vop.samples[k + 1].zdot[0] - vop.samples[k - 1].zdot[0]) / (2.0 * h);
        const double expected = force(sys, s.t, s.z)[0] + std::exp(-s.t * s.t);
        // Central difference truncation is about h^2/6 |z''''|, and z grows like e^t here.
        EXPECT_NEAR(acc, expected, 1e-4 * (1.0 + std::abs(expected))) << "t = " << s.t;
    }
}
