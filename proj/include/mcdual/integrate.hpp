#pragma once

#include "mcdual/duality.hpp"
#include "mcdual/ode.hpp"
#include "mcdual/trajectory.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace mcdual {

struct IntegrateOptions {
    double max_step = 0.25;
    /// > 0 samples on a uniform grid from the dense output; 0 keeps every step.
    double sample_step = 0.0;
    bool keep_dense = true;
    double growth_limit = 1e250;
};

namespace detail {

/// Integrates the second-order system z'' = accel(t, z) written in first-order
/// form y = (z, zdot). The acceptance test of each step bounds the midpoint
/// defect |zdot'(t) - accel(t, z(t))|_inf of the dense output by
/// 10 * (abs_tol + rel_tol * |y(t)|_inf).
template <class Real, class Accel>
BasicTrajectory<Real> integrate_second_order(Accel&& accel, Real t0, const vector_t<Real>& z0,
                                             const vector_t<Real>& zdot0, Real t_end, double rel_tol,
                                             double abs_tol, const IntegrateOptions& opt)
{
    const Eigen::Index n = z0.size();
    if (zdot0.size() != n) {
        throw validation_error("initial position and velocity have different dimensions");
    }
    vector_t<Real> y0(2 * n);
    y0 << z0, zdot0;

    OdeOptions<Real> o;
    o.rel_tol = Real(rel_tol);
    o.abs_tol = Real(abs_tol);
    o.max_step = Real(opt.max_step);
    o.sample_step = Real(opt.sample_step);
    o.keep_dense = opt.keep_dense;
    o.growth_limit = Real(opt.growth_limit);

    vector_t<Real> acc(n);
    auto rhs = [&](Real t, const vector_t<Real>& y, vector_t<Real>& dy) {
        dy.head(n) = y.tail(n);
        accel(t, y.head(n), dy.tail(n));
    };
    auto defect = [&](Real t, const vector_t<Real>& y, const vector_t<Real>& dy) {
        accel(t, y.head(n), acc);
        const Real d = (dy.tail(n) - acc).cwiseAbs().maxCoeff();
        const Real bound = Real(10) * (o.abs_tol + o.rel_tol * y.cwiseAbs().maxCoeff());
        return std::pair<Real, Real>{d, bound};
    };
    auto sol = dopri5<Real>(rhs, t0, std::move(y0), t_end, o, defect);

    BasicTrajectory<Real> traj;
    traj.samples.reserve(sol.t.size());
    for (std::size_t k = 0; k < sol.t.size(); ++k) {
        traj.samples.push_back({sol.t[k], sol.y[k].head(n), sol.y[k].tail(n)});
    }
    if (t_end < t0) {
        std::reverse(traj.samples.begin(), traj.samples.end());
    }
    traj.rel_tol = rel_tol;
    traj.abs_tol = abs_tol;
    traj.growth_flag = sol.truncated;
    traj.max_defect_ratio = static_cast<double>(sol.max_defect_ratio);
    traj.accepted_steps = sol.accepted;
    traj.rejected_steps = sol.rejected;
    traj.dense = std::move(sol.segments);
    return traj;
}

}  // namespace detail

/// Integrates the Newton system z'' = F(t, z) of `system` from `initial` to
/// t_end (either direction) with an adaptive Dormand-Prince 5(4) pair.
///
/// Exponential runaway past IntegrateOptions::growth_limit stops the run early
/// and sets growth_flag on the partial trajectory; a step-size underflow
/// throws numerical_error.
template <class Real = double>
BasicTrajectory<Real> integrate(const ForceSystem& system, const ClassicalState& initial, double t_end,
                                double rel_tol, double abs_tol, const IntegrateOptions& opt = {})
{
    const auto n = static_cast<Eigen::Index>(system.n_bodies());
    if (initial.z.size() != n || initial.zdot.size() != n) {
        throw validation_error("integrate: initial state dimension does not match the system");
    }
    if (!initial.z.allFinite() || !initial.zdot.allFinite() || !std::isfinite(initial.t)) {
        throw validation_error("integrate: initial state must be finite");
    }
    matrix_t<Real> scratch;
    auto accel = [&](Real t, const auto& z, auto&& out) { system.accelerate(t, z, out, scratch); };
    auto traj = detail::integrate_second_order<Real>(accel, Real(initial.t), initial.z.cast<Real>(),
                                                     initial.zdot.cast<Real>(), Real(t_end), rel_tol, abs_tol, opt);
    traj.coordinate_names = system.coordinate_names();
    traj.e_params.assign(system.e_params().data(), system.e_params().data() + system.e_params().size());
    return traj;
}

}  // namespace mcdual
