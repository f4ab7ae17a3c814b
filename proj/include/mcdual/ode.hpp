#pragma once

#include "mcdual/errors.hpp"
#include "mcdual/potential.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace mcdual {

template <class Real>
struct OdeOptions {
    Real rel_tol = Real(1e-10);
    Real abs_tol = Real(1e-12);
    /// Upper bound on |h|; keeps the stepper from striding over a localized
    /// potential when the solution is locally polynomial.
    Real max_step = Real(0.25);
    /// > 0: emit samples on the uniform grid t0 + k * sample_step (plus t_end)
    /// from the dense output. 0: emit every accepted step.
    Real sample_step = Real(0);
    /// Keep the per-step interpolants so the solution can be evaluated anywhere.
    bool keep_dense = true;
    /// A state whose max-norm passes this is reported as a blowup.
    Real growth_limit = Real(1e250);
    std::size_t max_steps = 5'000'000;
};

/// Validates tolerances against the supported window [1e-14, 1e-3].
template <class Real>
void check_tolerances(Real rel_tol, Real abs_tol)
{
    const auto ok = [](Real v) { return v >= Real(1e-14) && v <= Real(1e-3); };
    if (!ok(rel_tol) || !ok(abs_tol)) {
        throw validation_error("tolerances must lie in [1e-14, 1e-3]");
    }
}

/// Fourth-order continuous extension of one Dormand-Prince step.
template <class Real>
struct DenseSegment {
    Real t0 = Real(0);
    Real h = Real(0);
    std::array<vector_t<Real>, 5> r;

    Real t1() const { return t0 + h; }

    vector_t<Real> value(Real t) const
    {
        const Real th = (t - t0) / h;
        const Real th1 = Real(1) - th;
        return r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
    }

    /// Time derivative of value(t).
    vector_t<Real> derivative(Real t) const
    {
        const Real th = (t - t0) / h;
        const Real th1 = Real(1) - th;
        const vector_t<Real> c = r[3] + th1 * r[4];
        const vector_t<Real> dc = -r[4];
        const vector_t<Real> b = r[2] + th * c;
        const vector_t<Real> db = c + th * dc;
        const vector_t<Real> a = r[1] + th1 * b;
        const vector_t<Real> da = -b + th1 * db;
        return (a + th * da) / h;
    }
};

template <class Real>
struct OdeSolution {
    std::vector<Real> t;
    std::vector<vector_t<Real>> y;
    std::vector<DenseSegment<Real>> segments;
    bool truncated = false;       // stopped early by the growth limit
    Real max_defect_ratio = Real(0);
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

namespace detail {

template <class Real>
struct dopri5_tableau {
    static constexpr Real c2 = Real(1) / 5, c3 = Real(3) / 10, c4 = Real(4) / 5, c5 = Real(8) / 9;
    static constexpr Real a21 = Real(1) / 5;
    static constexpr Real a31 = Real(3) / 40, a32 = Real(9) / 40;
    static constexpr Real a41 = Real(44) / 45, a42 = Real(-56) / 15, a43 = Real(32) / 9;
    static constexpr Real a51 = Real(19372) / 6561, a52 = Real(-25360) / 2187, a53 = Real(64448) / 6561,
                          a54 = Real(-212) / 729;
    static constexpr Real a61 = Real(9017) / 3168, a62 = Real(-355) / 33, a63 = Real(46732) / 5247,
                          a64 = Real(49) / 176, a65 = Real(-5103) / 18656;
    static constexpr Real a71 = Real(35) / 384, a73 = Real(500) / 1113, a74 = Real(125) / 192,
                          a75 = Real(-2187) / 6784, a76 = Real(11) / 84;
    static constexpr Real e1 = Real(71) / 57600, e3 = Real(-71) / 16695, e4 = Real(71) / 1920,
                          e5 = Real(-17253) / 339200, e6 = Real(22) / 525, e7 = Real(-1) / 40;
    static constexpr Real d1 = Real(-12715105075) / Real(11282082432), d3 = Real(87487479700) / Real(32700410799),
                          d4 = Real(-10690763975) / Real(1880347072), d5 = Real(701980252875) / Real(199316789632),
                          d6 = Real(-1453857185) / Real(822651844), d7 = Real(69997945) / Real(29380423);
};

template <class Real>
Real scaled_rms(const vector_t<Real>& e, const vector_t<Real>& y0, const vector_t<Real>& y1, Real rtol, Real atol)
{
    using std::abs;
    using std::sqrt;
    Real sum = Real(0);
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const Real sk = atol + rtol * std::max(abs(y0[i]), abs(y1[i]));
        const Real q = e[i] / sk;
        sum += q * q;
    }
    return sqrt(sum / Real(e.size()));
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of y' = f(t, y) from t0 to t_end
/// (either direction).
///
/// `rhs(t, y, dy)` writes the derivative. `defect(t, y, dy)` receives the
/// dense-output state and its time derivative at each step midpoint and
/// returns {defect, admissible defect}; a step is accepted only when the
/// embedded error estimate is within tolerance and the defect is within its
/// bound (or within the rounding floor of the interpolant derivative, which
/// no step-size reduction can lower).
template <class Real, class Rhs, class Defect>
OdeSolution<Real> dopri5(Rhs&& rhs, Real t0, vector_t<Real> y0, Real t_end, const OdeOptions<Real>& opt,
                         Defect&& defect)
{
    using std::abs;
    using std::pow;
    using T = detail::dopri5_tableau<Real>;
    using vec = vector_t<Real>;

    if (t_end == t0) {
        throw validation_error("integration span must be non-empty");
    }
    check_tolerances(opt.rel_tol, opt.abs_tol);
    const Real dir = t_end > t0 ? Real(1) : Real(-1);
    const Real rtol = opt.rel_tol;
    const Real atol = opt.abs_tol;
    const Eigen::Index n = y0.size();

    OdeSolution<Real> sol;
    Real t = t0;
    vec y = std::move(y0);
    vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n), err(n);
    rhs(t, y, k1);

    // Initial step guess following Hairer, Norsett & Wanner.
    Real h;
    {
        const vec zero = vec::Zero(n);
        const Real d0 = detail::scaled_rms<Real>(y, y, zero, rtol, atol);
        const Real d1 = detail::scaled_rms<Real>(k1, y, zero, rtol, atol);
        Real h0 = (d0 < Real(1e-5) || d1 < Real(1e-5)) ? Real(1e-6) : Real(0.01) * d0 / d1;
        h0 = std::min(h0, opt.max_step);
        ytmp = y + dir * h0 * k1;
        rhs(t + dir * h0, ytmp, k2);
        const Real d2 = detail::scaled_rms<Real>(vec(k2 - k1), y, zero, rtol, atol) / h0;
        const Real dm = std::max(d1, d2);
        const Real h1 = dm <= Real(1e-15) ? std::max(Real(1e-6), h0 * Real(1e-3)) : pow(Real(0.01) / dm, Real(0.2));
        h = std::min({Real(100) * h0, h1, opt.max_step, abs(t_end - t0)});
    }

    const auto emit = [&](Real ts, const vec& ys) {
        sol.t.push_back(ts);
        sol.y.push_back(ys);
    };
    emit(t, y);
    std::size_t next_sample = 1;
    const Real span = abs(t_end - t0);

    bool last_rejected = false;
    while (true) {
        if (sol.accepted + sol.rejected >= opt.max_steps) {
            throw numerical_error("integration exceeded the step budget");
        }
        bool last = false;
        if (h >= abs(t_end - t)) {
            h = abs(t_end - t);
            last = true;
        }
        if (h <= Real(16) * std::numeric_limits<Real>::epsilon() * std::max(Real(1), abs(t))) {
            throw numerical_error("step size underflow near t = " + std::to_string(static_cast<double>(t)));
        }
        const Real hs = dir * h;

        ytmp = y + hs * (T::a21 * k1);
        rhs(t + T::c2 * hs, ytmp, k2);
        ytmp = y + hs * (T::a31 * k1 + T::a32 * k2);
        rhs(t + T::c3 * hs, ytmp, k3);
        ytmp = y + hs * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
        rhs(t + T::c4 * hs, ytmp, k4);
        ytmp = y + hs * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
        rhs(t + T::c5 * hs, ytmp, k5);
        ytmp = y + hs * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
        const Real t_new = last ? t_end : t + hs;
        rhs(t + hs, ytmp, k6);
        y1 = y + hs * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
        rhs(t_new, y1, k7);
        err = hs * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);

        Real err_norm = detail::scaled_rms<Real>(err, y, y1, rtol, atol);
        if (!std::isfinite(static_cast<double>(err_norm))) {
            err_norm = Real(1e10);
        }

        DenseSegment<Real> seg;
        Real ratio = Real(0);
        bool defect_ok = false;
        if (err_norm <= Real(1)) {
            seg.t0 = t;
            seg.h = hs;
            const vec ydiff = y1 - y;
            const vec bspl = hs * k1 - ydiff;
            seg.r[0] = y;
            seg.r[1] = ydiff;
            seg.r[2] = bspl;
            seg.r[3] = ydiff - hs * k7 - bspl;
            seg.r[4] = hs * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 + T::d7 * k7);
            const Real tm = t + hs / Real(2);
            const vec ym = seg.value(tm);
            const auto [d, bound] = defect(tm, ym, seg.derivative(tm));
            const Real floor = Real(256) * std::numeric_limits<Real>::epsilon() * ym.cwiseAbs().maxCoeff() / h;
            ratio = d / bound;
            defect_ok = d <= std::max(bound, floor);
            if (!std::isfinite(static_cast<double>(ratio))) {
                ratio = Real(1e10);
                defect_ok = false;
            }
        }

        if (err_norm <= Real(1) && defect_ok) {
            ++sol.accepted;
            sol.max_defect_ratio = std::max(sol.max_defect_ratio, ratio);
            if (opt.sample_step > Real(0)) {
                while (true) {
                    const Real ts = t0 + dir * Real(next_sample) * opt.sample_step;
                    if (abs(ts - t0) >= span || dir * (ts - t_new) > Real(0)) {
                        break;
                    }
                    emit(ts, seg.value(ts));
                    ++next_sample;
                }
                if (last) {
                    emit(t_new, y1);
                }
            } else {
                emit(t_new, y1);
            }
            if (opt.keep_dense) {
                sol.segments.push_back(std::move(seg));
            }
            t = t_new;
            y.swap(y1);
            k1.swap(k7);
            if (y.cwiseAbs().maxCoeff() > opt.growth_limit) {
                sol.truncated = true;
                if (opt.sample_step > Real(0) && sol.t.back() != t) {
                    emit(t, y);
                }
                break;
            }
            if (last) {
                break;
            }
            Real fac = err_norm > Real(0) ? Real(0.9) * pow(err_norm, Real(-0.2)) : Real(10);
            fac = std::clamp(fac, Real(0.2), last_rejected ? Real(1) : Real(10));
            if (ratio > Real(0)) {
                fac = std::min(fac, Real(0.9) * pow(ratio, Real(-0.25)));
            }
            h = std::min(h * std::max(fac, Real(0.2)), opt.max_step);
            last_rejected = false;
        } else {
            ++sol.rejected;
            Real fac = Real(0.9) * pow(std::max(err_norm, Real(1e-10)), Real(-0.2));
            if (ratio > Real(1)) {
                fac = std::min(fac, Real(0.9) * pow(ratio, Real(-0.25)));
            }
            h *= std::clamp(fac, Real(0.1), Real(0.9));
            last_rejected = true;
        }
    }
    return sol;
}

/// Evaluates a dense solution at t by locating the covering segment.
template <class Real>
const DenseSegment<Real>& find_segment(const std::vector<DenseSegment<Real>>& segments, Real t)
{
    if (segments.empty()) {
        throw validation_error("solution carries no dense output");
    }
    // Segments are stored in integration order; their lower ends are monotone.
    const bool forward = segments.front().h > Real(0);
    std::size_t lo = 0;
    std::size_t hi = segments.size();
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        const bool after = forward ? t >= segments[mid].t0 : t <= segments[mid].t0;
        if (after) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return segments[lo];
}

}  // namespace mcdual
