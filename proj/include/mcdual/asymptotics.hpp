#pragma once

#include "mcdual/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mcdual {

enum class Side { left, right };

inline std::string to_string(Side s) { return s == Side::left ? "left" : "right"; }

/// z_channel(t) ~ a t + b far out on one side.
struct AsymptoticLine {
    double a = 0.0;
    double b = 0.0;
    double rms_residual = 0.0;
    std::size_t samples_used = 0;
};

/// Least-squares line through the outer tenth of the samples (at least two)
/// on the requested side. Only meaningful when the channel force parameter is
/// zero (a zero-energy channel, where the free motion is linear).
inline AsymptoticLine fit_asymptotic_line(const Trajectory& traj, Side side, std::size_t channel = 0)
{
    if (traj.samples.size() < 2) {
        throw validation_error("asymptotic line: trajectory has fewer than two samples");
    }
    if (channel >= traj.dimension()) {
        throw validation_error("asymptotic line: channel out of range");
    }
    if (channel < traj.e_params.size() && std::abs(traj.e_params[channel]) > 1e-12) {
        throw validation_error("asymptote is not a line (E_" + std::to_string(channel + 1) + " = " +
                               format_number(traj.e_params[channel]) + ")");
    }
    const std::size_t count = traj.samples.size();
    const std::size_t used = std::max<std::size_t>(2, (count + 9) / 10);
    const std::size_t first = side == Side::left ? 0 : count - used;
    const auto z_of = [&](std::size_t k) { return traj.samples[k].z[static_cast<Eigen::Index>(channel)]; };

    double s0 = 0.0;
    double st = 0.0;
    double stt = 0.0;
    double sz = 0.0;
    double stz = 0.0;
    for (std::size_t k = first; k < first + used; ++k) {
        const double t = traj.samples[k].t;
        s0 += 1.0;
        st += t;
        stt += t * t;
        sz += z_of(k);
        stz += t * z_of(k);
    }
    const double det = s0 * stt - st * st;
    if (!(std::abs(det) > 0.0)) {
        throw validation_error("asymptotic line: degenerate samples on the " + to_string(side) + " side");
    }
    AsymptoticLine line;
    line.a = (s0 * stz - st * sz) / det;
    line.b = (sz - line.a * st) / s0;
    line.samples_used = used;

    double ss = 0.0;
    for (std::size_t k = first; k < first + used; ++k) {
        const double r = z_of(k) - (line.a * traj.samples[k].t + line.b);
        ss += r * r;
    }
    line.rms_residual = std::sqrt(ss / s0);
    return line;
}

}  // namespace mcdual
