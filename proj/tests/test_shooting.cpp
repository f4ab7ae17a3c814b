#include "mcdual/integrate.hpp"
#include "mcdual/shooting.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace mcdual;

namespace {

PotentialMatrix sech_potential() { return build_reflectionless(spectral_from_kappas(-1.0, {1.0}, {std::sqrt(2.0)})); }

const std::vector<double> one_threshold = {0.0};

}  // namespace

TEST(Shooting, FreeLine)
{
    const auto traj = shoot_schrodinger(zero_potential(1), 0.0, one_threshold, -10.0, 10.0, Line{2.0, 1.0, 0});
    EXPECT_EQ(traj.front().t, -10.0);
    EXPECT_NEAR(traj.front().z[0], -19.0, 1e-14);
    EXPECT_NEAR(traj.back().z[0], 21.0, 1e-9);
}

TEST(Shooting, DecayingAtBoundEnergyIsSech)
{
    ShootOptions opt;
    opt.integrate.sample_step = 0.25;
    const auto traj = shoot_schrodinger(sech_potential(), -1.0, one_threshold, -25.0, 25.0, Decaying{}, opt);
    double peak = 0.0;
    for (const auto& s : traj.samples) {
        peak = std::max(peak, std::abs(s.z[0]));
    }
    // Normalize at the peak and compare where the growing partner is still negligible.
    const double scale = 1.0 / peak;
    for (const auto& s : traj.samples) {
        if (s.t <= 8.0) {
            EXPECT_NEAR(s.z[0] * scale, oracle::sech(s.t), 1e-6) << "x = " << s.t;
        }
    }
}

TEST(Shooting, BlowsUpAboveTheLevel)
{
    const auto traj = shoot_schrodinger(sech_potential(), -0.5, one_threshold, -25.0, 25.0, Decaying{});
    double near_origin = 0.0;
    for (const auto& s : traj.samples) {
        if (std::abs(s.t) <= 2.0) {
            near_origin = std::max(near_origin, std::abs(s.z[0]));
        }
    }
    EXPECT_GT(std::abs(traj.back().z[0]), 1e3 * near_origin);
}

TEST(Shooting, ModeValidation)
{
    const auto v = sech_potential();
    EXPECT_THROW(shoot_schrodinger(v, -0.5, one_threshold, -25.0, 25.0, Line{}), validation_error);
    EXPECT_THROW(shoot_schrodinger(v, -0.5, one_threshold, -25.0, 25.0, PlaneWave{0}), validation_error);
    EXPECT_THROW(shoot_schrodinger(v, 0.5, one_threshold, -25.0, 25.0, Decaying{}), validation_error);
    EXPECT_THROW(shoot_schrodinger(v, 0.0, one_threshold, -25.0, 25.0, Line{1, 0, 1}), validation_error);
    EXPECT_THROW(shoot_schrodinger(v, -1.0, one_threshold, -1.0, 25.0, Decaying{}), validation_error);
    EXPECT_THROW(shoot_schrodinger(v, -1.0, std::vector<double>{0.0, 0.0}, -25.0, 25.0, Decaying{}),
                 validation_error);
}

TEST(Shooting, PlaneWaveLayout)
{
    const auto traj = shoot_schrodinger(zero_potential(2), 1.0, std::vector<double>{0.0, 0.5}, 5.0, -5.0,
                                        PlaneWave{1});
    EXPECT_EQ(traj.coordinate_names, (std::vector<std::string>{"re_1", "re_2", "im_1", "im_2"}));
    const double k = std::sqrt(0.5);
    const auto& s = traj.front();
    EXPECT_NEAR(s.z[1], std::cos(-5.0 * k), 1e-8);
    EXPECT_NEAR(s.z[3], std::sin(-5.0 * k), 1e-8);
    EXPECT_NEAR(s.z[0], 0.0, 1e-15);
}

TEST(ShootingProperty, SameOdeAsNewtonSystem)
{
    const auto v = sech_potential();
    for (double e : {-1.0, 0.0, 1.0}) {
        const StartMode mode = e < 0 ? StartMode(Decaying{}) : e == 0 ? StartMode(Line{1.0, 0.0, 0}) : PlaneWave{0};
        const auto q = shoot_schrodinger(v, e, one_threshold, -25.0, 25.0, mode);
        const auto sys = dualize(v, {e});
        const auto& first = q.front();
        const ClassicalState init{first.t, first.z.head(1), first.zdot.head(1)};
        const auto c = integrate(sys, init, 25.0, 1e-10, 1e-12);
        for (const auto& s : q.samples) {
            const double diff = std::abs(c.state_at(s.t)[0] - s.z[0]);
            EXPECT_LT(diff, 1e-8 * std::max(1.0, std::abs(s.z[0]))) << "E = " << e << " x = " << s.t;
        }
    }
}

TEST(ShootingProperty, WronskianOfIndependentSolutions)
{
    const auto v = build_reflectionless(spectral_from_kappas(-1.0, {1.0, std::sqrt(2.0)}, {1.0, 1.0}));
    const auto sys = dualize(v, {0.3, 0.5});
    const Interval w = v.working_interval();
    const ClassicalState s1{w.lo, Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 0.2)};
    const ClassicalState s2{w.lo, Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 0.5)};
    const auto a = integrate(sys, s1, w.hi, 1e-12, 1e-14);
    const auto b = integrate(sys, s2, w.hi, 1e-12, 1e-14);
    const double w0 = s1.z.dot(s2.zdot) - s2.z.dot(s1.zdot);
    for (double x = w.lo; x <= w.hi; x += 0.5) {
        const Eigen::VectorXd ya = a.state_at(x);
        const Eigen::VectorXd yb = b.state_at(x);
        const double wx = ya.head(2).dot(yb.tail(2)) - yb.head(2).dot(ya.tail(2));
        EXPECT_NEAR(wx, w0, 1e-8 * std::abs(w0)) << "x = " << x;
    }
}
