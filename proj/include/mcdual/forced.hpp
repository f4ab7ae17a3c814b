#pragma once

#include "mcdual/integrate.hpp"
#include "mcdual/quadrature.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <utility>
#include <vector>

namespace mcdual {

/// Coordinate-independent force g(t) added to the linear Newton system, the
/// classical face of an inhomogeneous (source) term.
class SourceTerm {
public:
    using function = std::function<Eigen::VectorXd(double)>;

    SourceTerm(std::size_t n, function g) : n_(n), g_(std::move(g))
    {
        if (n_ == 0 || !g_) {
            throw validation_error("source term needs a dimension and an evaluator");
        }
    }

    std::size_t size() const { return n_; }

    Eigen::VectorXd operator()(double t) const
    {
        Eigen::VectorXd v = g_(t);
        if (static_cast<std::size_t>(v.size()) != n_) {
            throw validation_error("source term returned the wrong dimension");
        }
        if (!v.allFinite()) {
            throw validation_error("source term is not finite at t = " + std::to_string(t));
        }
        return v;
    }

private:
    std::size_t n_;
    function g_;
};

namespace detail {

inline void check_forced_inputs(const ForceSystem& system, const SourceTerm& source, const ClassicalState& initial)
{
    const auto n = static_cast<Eigen::Index>(system.n_bodies());
    if (static_cast<Eigen::Index>(source.size()) != n) {
        throw validation_error("source dimension does not match the system");
    }
    if (initial.z.size() != n || initial.zdot.size() != n) {
        throw validation_error("initial state dimension does not match the system");
    }
}

}  // namespace detail

/// Direct integration of z'' = F(t, z) + g(t).
inline Trajectory integrate_forced(const ForceSystem& system, const SourceTerm& source, const ClassicalState& initial,
                                   double t_end, double rel_tol, double abs_tol, const IntegrateOptions& opt = {})
{
    detail::check_forced_inputs(system, source, initial);
    Eigen::MatrixXd scratch;
    auto accel = [&](double t, const auto& z, auto&& out) {
        system.accelerate(t, z, out, scratch);
        out += source(t);
    };
    auto traj = detail::integrate_second_order<double>(accel, initial.t, initial.z, initial.zdot, t_end, rel_tol,
                                                       abs_tol, opt);
    traj.coordinate_names = system.coordinate_names();
    traj.e_params.assign(system.e_params().data(), system.e_params().data() + system.e_params().size());
    return traj;
}

struct ForcedOptions {
    /// Length of the windows on which a fresh fundamental matrix is built.
    double segment_length = 1.0;
    /// > 0 adds output samples on this uniform grid; segment ends are always sampled.
    double sample_step = 0.0;
    double max_step = 0.25;
};

/// Forced solution by variation of parameters.
///
/// The span is cut into windows [t_k, t_k+1]. On each window the 2N x 2N
/// fundamental matrix Phi_k (Phi_k(t_k) = I) is integrated from the 2N unit
/// initial conditions of the homogeneous system, and
///   y(t) = Phi_k(t) [ y(t_k) + int_{t_k}^{t} Phi_k(s)^{-1} (0, g(s)) ds ],
/// with y = (z, zdot). Restarting Phi on short windows keeps it well
/// conditioned where the homogeneous solutions grow exponentially. The
/// quadrature uses the same relative tolerance as the integrator.
inline Trajectory solve_with_source(const ForceSystem& system, const SourceTerm& source, const ClassicalState& initial,
                                    double t_end, double rel_tol, double abs_tol, const ForcedOptions& opt = {})
{
    detail::check_forced_inputs(system, source, initial);
    check_tolerances(rel_tol, abs_tol);
    if (t_end == initial.t || !std::isfinite(t_end)) {
        throw validation_error("solve_with_source: need a non-empty finite span");
    }
    if (!(opt.segment_length > 0.0)) {
        throw validation_error("solve_with_source: segment_length must be positive");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(system.n_bodies());
    const Eigen::Index m = 2 * n;
    const double t0 = initial.t;
    const double dir = t_end > t0 ? 1.0 : -1.0;
    const double span = std::abs(t_end - t0);

    // Window ends and output times, measured as offsets from t0 along dir.
    std::vector<double> ends;
    for (double s = opt.segment_length; s < span; s += opt.segment_length) {
        ends.push_back(s);
    }
    ends.push_back(span);
    std::set<double> outputs(ends.begin(), ends.end());
    if (opt.sample_step > 0.0) {
        for (std::size_t k = 1; static_cast<double>(k) * opt.sample_step < span; ++k) {
            outputs.insert(static_cast<double>(k) * opt.sample_step);
        }
    }

    Eigen::MatrixXd scratch;
    auto batch_accel = [&](double t, const auto& zs, auto&& out) {
        for (Eigen::Index c = 0; c < m; ++c) {
            system.accelerate(t, zs.segment(c * n, n), out.segment(c * n, n), scratch);
        }
    };
    IntegrateOptions io;
    io.max_step = opt.max_step;
    io.keep_dense = true;

    Trajectory traj;
    traj.coordinate_names = system.coordinate_names();
    traj.e_params.assign(system.e_params().data(), system.e_params().data() + system.e_params().size());
    traj.rel_tol = rel_tol;
    traj.abs_tol = abs_tol;
    traj.samples.push_back({t0, initial.z, initial.zdot});

    Eigen::VectorXd y(m);
    y << initial.z, initial.zdot;
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(n * m);
    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(n * m);
    for (Eigen::Index c = 0; c < n; ++c) {
        z0[c * n + c] = 1.0;
        v0[(n + c) * n + c] = 1.0;
    }

    double start = 0.0;
    auto next_output = outputs.begin();
    for (double end : ends) {
        const double ta = t0 + dir * start;
        const double tb = t0 + dir * end;
        const auto basis = detail::integrate_second_order<double>(batch_accel, ta, z0, v0, tb, rel_tol, abs_tol, io);
        traj.max_defect_ratio = std::max(traj.max_defect_ratio, basis.max_defect_ratio);
        traj.accepted_steps += basis.accepted_steps;
        traj.rejected_steps += basis.rejected_steps;
        traj.growth_flag = traj.growth_flag || basis.growth_flag;
        if (basis.growth_flag) {
            throw numerical_error("solve_with_source: fundamental matrix overflowed");
        }

        const auto phi_at = [&](double t) {
            const Eigen::VectorXd s = basis.state_at(t);
            Eigen::MatrixXd phi(m, m);
            for (Eigen::Index c = 0; c < m; ++c) {
                phi.block(0, c, n, 1) = s.segment(c * n, n);
                phi.block(n, c, n, 1) = s.segment(n * m + c * n, n);
            }
            return phi;
        };
        const auto integrand = [&](double s) -> Eigen::VectorXd {
            Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
            b.tail(n) = source(s);
            return phi_at(s).partialPivLu().solve(b);
        };
        const auto propagate = [&](double t) -> Eigen::VectorXd {
            const auto q = integrate_adaptive(integrand, ta, t, rel_tol, abs_tol);
            return phi_at(t) * (y + q.value);
        };

        for (; next_output != outputs.end() && *next_output <= end; ++next_output) {
            const double t = t0 + dir * *next_output;
            const Eigen::VectorXd yt = propagate(*next_output == end ? tb : t);
            traj.samples.push_back({t, yt.head(n), yt.tail(n)});
        }
        y << traj.samples.back().z, traj.samples.back().zdot;
        start = end;
    }
    if (dir < 0) {
        std::reverse(traj.samples.begin(), traj.samples.end());
    }
    return traj;
}

}  // namespace mcdual
