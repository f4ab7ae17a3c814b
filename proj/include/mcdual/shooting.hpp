#pragma once

#include "mcdual/integrate.hpp"

#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mcdual {

/// psi_i proportional to exp(kappa_i(E) |x - x_start|) at the start: the
/// solution that decays into the asymptotic region behind x_start. Needs every
/// channel closed. Empty weights mean one in every channel.
struct Decaying {
    std::vector<double> weights;
};

/// psi = a x + b in one channel (others start at rest at zero); the channel
/// must sit exactly at its threshold, E_i = 0.
struct Line {
    double a = 1.0;
    double b = 0.0;
    std::size_t channel = 0;
};

/// Unit-amplitude exp(i k x) in one open channel. The complex solution is
/// carried as a doubled real system: coordinates 0..N-1 hold Re psi and
/// N..2N-1 hold Im psi.
struct PlaneWave {
    std::size_t channel = 0;
};

using StartMode = std::variant<Decaying, Line, PlaneWave>;

struct ShootOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    IntegrateOptions integrate;
    /// Reject starting points where the potential is not yet flat.
    bool require_flat_start = true;
};

namespace detail {

inline void check_shoot_inputs(const PotentialMatrix& potential, std::span<const double> thresholds, double energy,
                               double x_start, double x_end, const ShootOptions& opt)
{
    if (thresholds.size() != potential.size()) {
        throw validation_error("shoot: thresholds do not match the potential size");
    }
    if (!std::isfinite(energy) || !std::isfinite(x_start) || !std::isfinite(x_end) || x_start == x_end) {
        throw validation_error("shoot: energy and a non-empty finite span are required");
    }
    if (opt.require_flat_start && potential.max_abs(x_start) >= flat_threshold) {
        throw validation_error("shoot: x_start = " + std::to_string(x_start) +
                               " is not in the asymptotically flat region");
    }
}

/// psi_i'' = sum_j v_ij psi_j - (E - eps_i) psi_i, evaluated for `copies`
/// stacked copies of the N channels (copies = 2 for complex solutions).
template <class Real>
struct schrodinger_rhs {
    const PotentialMatrix& potential;
    std::vector<Real> channel_energy;
    Eigen::Index copies;
    matrix_t<Real> v;

    template <class In, class Out>
    void operator()(Real x, const In& psi, Out&& out)
    {
        potential.evaluate_into(x, v);
        const Eigen::Index n = v.rows();
        for (Eigen::Index c = 0; c < copies; ++c) {
            out.segment(c * n, n).noalias() = v * psi.segment(c * n, n);
            for (Eigen::Index i = 0; i < n; ++i) {
                out[c * n + i] -= channel_energy[i] * psi[c * n + i];
            }
        }
    }
};

template <class Real>
BasicTrajectory<Real> shoot(const PotentialMatrix& potential, double energy, std::span<const double> thresholds,
                            double x_start, double x_end, const StartMode& mode, const ShootOptions& opt)
{
    check_shoot_inputs(potential, thresholds, energy, x_start, x_end, opt);
    const auto n = static_cast<Eigen::Index>(potential.size());
    const Real e = Real(energy);
    schrodinger_rhs<Real> rhs{potential, {}, 1, {}};
    for (double eps : thresholds) {
        rhs.channel_energy.push_back(e - Real(eps));
    }
    const Real xs = Real(x_start);
    const Real dir = x_end > x_start ? Real(1) : Real(-1);

    vector_t<Real> psi;
    vector_t<Real> dpsi;
    std::vector<std::string> names;
    if (const auto* d = std::get_if<Decaying>(&mode)) {
        std::vector<double> w = d->weights.empty() ? std::vector<double>(n, 1.0) : d->weights;
        if (static_cast<Eigen::Index>(w.size()) != n) {
            throw validation_error("shoot: decaying mode needs one weight per channel");
        }
        psi.resize(n);
        dpsi.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!(energy < thresholds[i])) {
                throw validation_error("shoot: decaying mode needs every channel closed (E below all thresholds)");
            }
            const Real kappa = std::sqrt(Real(thresholds[i]) - e);
            psi[i] = Real(w[i]);
            dpsi[i] = dir * kappa * Real(w[i]);
        }
    } else if (const auto* l = std::get_if<Line>(&mode)) {
        if (static_cast<Eigen::Index>(l->channel) >= n) {
            throw validation_error("shoot: line channel out of range");
        }
        if (std::abs(energy - thresholds[l->channel]) > 1e-12) {
            throw validation_error("shoot: line asymptotics need E_i = 0 in the launch channel");
        }
        psi = vector_t<Real>::Zero(n);
        dpsi = vector_t<Real>::Zero(n);
        psi[l->channel] = Real(l->a) * xs + Real(l->b);
        dpsi[l->channel] = Real(l->a);
    } else {
        const auto& p = std::get<PlaneWave>(mode);
        if (static_cast<Eigen::Index>(p.channel) >= n) {
            throw validation_error("shoot: plane-wave channel out of range");
        }
        if (!(energy > thresholds[p.channel])) {
            throw validation_error("shoot: plane-wave mode needs an open channel (E above its threshold)");
        }
        const Real k = std::sqrt(e - Real(thresholds[p.channel]));
        rhs.copies = 2;
        psi = vector_t<Real>::Zero(2 * n);
        dpsi = vector_t<Real>::Zero(2 * n);
        using std::cos;
        using std::sin;
        psi[p.channel] = cos(k * xs);
        psi[n + p.channel] = sin(k * xs);
        dpsi[p.channel] = -k * sin(k * xs);
        dpsi[n + p.channel] = k * cos(k * xs);
    }

    const Eigen::Index dim = psi.size();
    for (Eigen::Index i = 0; i < dim; ++i) {
        const std::string idx = std::to_string(i % n + 1);
        names.push_back(rhs.copies == 2 ? (i < n ? "re_" : "im_") + idx : "z_" + idx);
    }
    auto accel = [&rhs](Real x, const auto& z, auto&& out) { rhs(x, z, out); };
    auto traj = integrate_second_order<Real>(accel, xs, psi, dpsi, Real(x_end), opt.rel_tol, opt.abs_tol,
                                             opt.integrate);
    traj.coordinate_names = std::move(names);
    for (double eps : thresholds) {
        traj.e_params.push_back(energy - eps);
    }
    return traj;
}

}  // namespace detail

/// Integrates the multichannel stationary equation
///   -psi_i'' + sum_j v_ij psi_j = (E - eps_i) psi_i
/// from x_start (in the flat asymptotic region) to x_end with the requested
/// asymptotic launch data. The returned trajectory uses t for x.
inline Trajectory shoot_schrodinger(const PotentialMatrix& potential, double energy,
                                    std::span<const double> thresholds, double x_start, double x_end,
                                    const StartMode& mode, const ShootOptions& opt = {})
{
    return detail::shoot<double>(potential, energy, thresholds, x_start, x_end, mode, opt);
}

}  // namespace mcdual
