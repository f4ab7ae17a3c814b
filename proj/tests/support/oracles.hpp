#pragma once

// Reference computations used only by the tests. None of them call into the
// library's closed forms.

#include "mcdual/spectral.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// R_ij(x) = M_i M_j exp(-(k_i + k_j) x) / D(x), evaluated in long double.
inline long double ratio(const mcdual::SpectralData& s, std::size_t i, std::size_t j, long double x)
{
    long double d = 1.0L;
    for (std::size_t m = 0; m < s.n_channels; ++m) {
        const long double k = std::sqrt(static_cast<long double>(s.thresholds[m]) - s.e_bound);
        const long double w = s.weights[m];
        d += w * w / (2.0L * k) * std::exp(-2.0L * k * x);
    }
    const long double ki = std::sqrt(static_cast<long double>(s.thresholds[i]) - s.e_bound);
    const long double kj = std::sqrt(static_cast<long double>(s.thresholds[j]) - s.e_bound);
    return static_cast<long double>(s.weights[i]) * s.weights[j] * std::exp(-(ki + kj) * x) / d;
}

/// v_ij = 2 dR_ij/dx by central difference.
inline double potential_fd(const mcdual::SpectralData& s, std::size_t i, std::size_t j, double x, double h = 1e-5)
{
    return static_cast<double>(2.0L * (ratio(s, i, j, x + h) - ratio(s, i, j, x - h)) / (2.0L * h));
}

/// Five-point second derivative.
template <class F>
Eigen::VectorXd second_derivative(F&& f, double x, double h = 1e-3)
{
    return (-f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2 * h)) / (12.0 * h * h);
}

inline double sech(double x) { return 1.0 / std::cosh(x); }

/// Classical fourth-order Runge-Kutta with a fixed step for z'' = a(t, z).
struct Rk4Result {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> z;
    std::vector<Eigen::VectorXd> zdot;
};

inline Rk4Result rk4(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& accel, double t0,
                     Eigen::VectorXd z, Eigen::VectorXd v, double t1, std::size_t steps, std::size_t keep_every = 1)
{
    Rk4Result out;
    const double h = (t1 - t0) / static_cast<double>(steps);
    double t = t0;
    out.t.push_back(t);
    out.z.push_back(z);
    out.zdot.push_back(v);
    for (std::size_t k = 1; k <= steps; ++k) {
        const Eigen::VectorXd a1 = accel(t, z);
        const Eigen::VectorXd z2 = z + 0.5 * h * v, v2 = v + 0.5 * h * a1;
        const Eigen::VectorXd a2 = accel(t + 0.5 * h, z2);
        const Eigen::VectorXd z3 = z + 0.5 * h * v2, v3 = v + 0.5 * h * a2;
        const Eigen::VectorXd a3 = accel(t + 0.5 * h, z3);
        const Eigen::VectorXd z4 = z + h * v3, v4 = v + h * a3;
        const Eigen::VectorXd a4 = accel(t + h, z4);
        z += h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
        v += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        t = t0 + h * static_cast<double>(k);
        if (k % keep_every == 0 || k == steps) {
            out.t.push_back(t);
            out.z.push_back(z);
            out.zdot.push_back(v);
        }
    }
    return out;
}

/// Random spectral data with N channels, kappa in [k_lo, k_hi], M in [m_lo, m_hi].
inline mcdual::SpectralData random_spectral(std::mt19937_64& rng, std::size_t n, double k_lo = 0.3,
                                            double k_hi = 3.0, double m_lo = 0.1, double m_hi = 10.0)
{
    std::uniform_real_distribution<double> kd(k_lo, k_hi);
    std::uniform_real_distribution<double> md(m_lo, m_hi);
    std::uniform_real_distribution<double> ed(-2.0, 1.0);
    std::vector<double> k(n);
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) {
        k[i] = kd(rng);
        m[i] = md(rng);
    }
    return mcdual::spectral_from_kappas(ed(rng), k, m);
}

}  // namespace oracle
