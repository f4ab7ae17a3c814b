#pragma once

#include "mcdual/shooting.hpp"

#include <complex>
#include <span>
#include <vector>

namespace mcdual {

struct ScatteringResult {
    double energy = 0.0;
    std::size_t incoming_channel = 0;
    /// Flux-weighted norms: |R|^2 = sum_i (k_i / k_in) |r_i|^2, likewise |T|.
    double reflection_norm = 0.0;
    double transmission_norm = 0.0;
    std::vector<std::size_t> open_channels;
    std::vector<std::complex<double>> reflection_amplitudes;
    std::vector<std::complex<double>> transmission_amplitudes;
};

/// Scattering of a unit plane wave incident from the left in one channel.
///
/// For each channel j a purely outgoing wave exp(i k_j x) is launched at the
/// right edge of the working interval and integrated leftward; at the left
/// edge every channel is split into exp(+ikx) and exp(-ikx) parts. The
/// combination whose incoming part is the unit vector of `incoming_channel`
/// gives the transmitted amplitudes (its coefficients) and the reflected ones.
///
/// Only energies above every threshold are accepted. Throws numerical_error
/// when |R|^2 + |T|^2 misses one by more than 1e-6.
inline ScatteringResult reflection(const PotentialMatrix& potential, std::span<const double> thresholds,
                                   double energy, std::size_t incoming_channel, const ShootOptions& opt = {})
{
    using cd = std::complex<double>;
    const std::size_t n = potential.size();
    if (thresholds.size() != n) {
        throw validation_error("reflection: thresholds do not match the potential size");
    }
    if (incoming_channel >= n) {
        throw validation_error("reflection: incoming channel out of range");
    }
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(energy > thresholds[i])) {
            throw validation_error("reflection: every channel must be open (E above all thresholds)");
        }
        k[i] = std::sqrt(energy - thresholds[i]);
    }

    const Interval domain = potential.working_interval();
    ShootOptions o = opt;
    o.integrate.keep_dense = false;
    Eigen::MatrixXcd incoming(n, n);
    Eigen::MatrixXcd reflected(n, n);
    const cd ii(0.0, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto traj = shoot_schrodinger(potential, energy, thresholds, domain.hi, domain.lo, PlaneWave{j}, o);
        const auto& left = traj.front();
        const double x = left.t;
        for (std::size_t i = 0; i < n; ++i) {
            const cd psi(left.z[i], left.z[n + i]);
            const cd dpsi(left.zdot[i], left.zdot[n + i]);
            const cd ratio = dpsi / (ii * k[i]);
            incoming(i, j) = 0.5 * (psi + ratio) * std::exp(-ii * k[i] * x);
            reflected(i, j) = 0.5 * (psi - ratio) * std::exp(ii * k[i] * x);
        }
    }

    Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(n);
    unit[incoming_channel] = 1.0;
    const Eigen::VectorXcd t = incoming.fullPivLu().solve(unit);
    const Eigen::VectorXcd r = reflected * t;

    ScatteringResult res;
    res.energy = energy;
    res.incoming_channel = incoming_channel;
    double r2 = 0.0;
    double t2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        res.open_channels.push_back(i);
        r2 += k[i] / k[incoming_channel] * std::norm(r[i]);
        t2 += k[i] / k[incoming_channel] * std::norm(t[i]);
        res.reflection_amplitudes.push_back(r[i]);
        res.transmission_amplitudes.push_back(t[i]);
    }
    res.reflection_norm = std::sqrt(r2);
    res.transmission_norm = std::sqrt(t2);
    if (std::abs(r2 + t2 - 1.0) > 1e-6) {
        throw numerical_error("reflection: flux not conserved (|R|^2 + |T|^2 = " + std::to_string(r2 + t2) + ")");
    }
    return res;
}

}  // namespace mcdual
