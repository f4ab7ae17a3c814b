#pragma once

#include "mcdual/errors.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace mcdual {

struct QuadratureResult {
    Eigen::VectorXd value;
    double error = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct gk_segment {
    double a, b;
    Eigen::VectorXd value;
    double error;
    bool operator<(const gk_segment& o) const { return error < o.error; }
};

template <class F>
gk_segment gk15(F& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    Eigen::VectorXd fc = f(c);
    Eigen::VectorXd kronrod = kronrod_weights[7] * fc;
    Eigen::VectorXd gauss = gauss_weights[3] * fc;
    for (std::size_t i = 0; i < 7; ++i) {
        const double dx = h * kronrod_nodes[i];
        Eigen::VectorXd sum = f(c - dx) + f(c + dx);
        kronrod += kronrod_weights[i] * sum;
        if (i % 2 == 1) {
            gauss += gauss_weights[i / 2] * sum;
        }
    }
    kronrod *= h;
    gauss *= h;
    return {a, b, kronrod, (kronrod - gauss).cwiseAbs().maxCoeff()};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of a vector-valued
/// integrand on [a, b]. Either bound may be infinite; infinite ranges are
/// mapped onto (-1, 1) by x = t / (1 - t^2). Stops once the summed error
/// estimate is below max(abs_tol, rel_tol * |I|_inf).
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                                    std::size_t max_segments = 20000)
{
    const bool infinite = std::isinf(a) || std::isinf(b);
    if (infinite && !(std::isinf(a) && std::isinf(b) && a < 0 && b > 0)) {
        throw validation_error("quadrature: only (-inf, inf) is supported among infinite ranges");
    }
    std::size_t evaluations = 0;
    auto integrand = [&](double t) -> Eigen::VectorXd {
        ++evaluations;
        if (!infinite) {
            return f(t);
        }
        const double d = 1.0 - t * t;
        const double x = t / d;
        const double jac = (1.0 + t * t) / (d * d);
        Eigen::VectorXd y = f(x) * jac;
        // Endpoint limits are zero for integrands that decay faster than 1/x^2.
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (!std::isfinite(y[i])) {
                y[i] = 0.0;
            }
        }
        return y;
    };
    const double lo = infinite ? -1.0 : a;
    const double hi = infinite ? 1.0 : b;

    std::priority_queue<detail::gk_segment> work;
    auto first = detail::gk15(integrand, lo, hi);
    Eigen::VectorXd total = first.value;
    double error = first.error;
    work.push(std::move(first));
    while (error > std::max(abs_tol, rel_tol * total.cwiseAbs().maxCoeff())) {
        if (work.size() >= max_segments) {
            throw numerical_error("quadrature: segment budget exhausted before reaching tolerance");
        }
        auto worst = work.top();
        work.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gk15(integrand, worst.a, mid);
        auto right = detail::gk15(integrand, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        work.push(std::move(left));
        work.push(std::move(right));
        if (worst.b - worst.a < 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) {
            break;
        }
    }
    // Recompute from the segments to drop the running-sum drift.
    total.setZero();
    error = 0.0;
    while (!work.empty()) {
        total += work.top().value;
        error += work.top().error;
        work.pop();
    }
    return {total, error, evaluations};
}

}  // namespace mcdual
