#pragma once

#include "mcdual/parallel.hpp"
#include "mcdual/shooting.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace mcdual {

struct BifurcationPoint {
    double energy = 0.0;
    Interval bracket;
    /// Sign changes of the decaying-left solution at the lower bracket end.
    int node_count_below = 0;
    /// Sign of the dominant right-asymptotic component on either side of E*.
    int sign_below = 0;
    int sign_above = 0;
    /// Channel weights of the decaying-left launch that returns at E*.
    std::vector<double> launch_weights;
};

struct ScanReport {
    std::vector<BifurcationPoint> bifurcation_points;
    Interval scan_range;
    double grid_step = 0.0;
    double tolerance = 0.0;
};

struct ScanOptions {
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
    unsigned workers = 0;
};

namespace detail {

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

/// Decaying-left launches e_j (one per channel) integrated across the domain.
inline std::vector<Trajectory> launch_family(const PotentialMatrix& potential, std::span<const double> thresholds,
                                             double energy, Interval domain, const ScanOptions& opt,
                                             double sample_step, bool require_flat_start = true)
{
    const std::size_t n = potential.size();
    ShootOptions so;
    so.rel_tol = opt.rel_tol;
    so.abs_tol = opt.abs_tol;
    so.integrate.keep_dense = false;
    so.integrate.sample_step = sample_step;
    so.require_flat_start = require_flat_start;
    std::vector<Trajectory> family;
    family.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> w(n, 0.0);
        w[j] = 1.0;
        family.push_back(shoot_schrodinger(potential, energy, thresholds, domain.lo, domain.hi, Decaying{w}, so));
    }
    return family;
}

/// Growing parts (psi_i + psi_i' / kappa_i) / 2 at the end of each launch.
/// Column j is launch e_j, row i is channel i.
inline Eigen::MatrixXd growth_matrix(const std::vector<Trajectory>& family, std::span<const double> thresholds,
                                     double energy)
{
    const std::size_t n = family.size();
    Eigen::MatrixXd g(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& end = family[j].back();
        for (std::size_t i = 0; i < n; ++i) {
            const double kappa = std::sqrt(thresholds[i] - energy);
            g(i, j) = 0.5 * (end.z[i] + end.zdot[i] / kappa);
        }
    }
    return g;
}

inline Eigen::MatrixXd right_growth(const PotentialMatrix& potential, std::span<const double> thresholds,
                                    double energy, Interval domain, const ScanOptions& opt,
                                    bool require_flat_start = true)
{
    return growth_matrix(launch_family(potential, thresholds, energy, domain, opt, domain.width(), require_flat_start),
                         thresholds, energy);
}

/// Superposition sum_j c_j family[j]; all members share one sample grid.
inline Trajectory superpose(const std::vector<Trajectory>& family, const Eigen::VectorXd& c)
{
    Trajectory out = family.front();
    for (std::size_t k = 0; k < out.samples.size(); ++k) {
        out.samples[k].z *= c[0];
        out.samples[k].zdot *= c[0];
        for (std::size_t j = 1; j < family.size(); ++j) {
            if (family[j].samples.size() != out.samples.size() || family[j].samples[k].t != out.samples[k].t) {
                throw numerical_error("superpose: launch trajectories do not share a sample grid");
            }
            out.samples[k].z += c[j] * family[j].samples[k].z;
            out.samples[k].zdot += c[j] * family[j].samples[k].zdot;
        }
    }
    out.growth_flag = false;
    out.max_defect_ratio = 0.0;
    out.accepted_steps = 0;
    out.rejected_steps = 0;
    for (const auto& m : family) {
        out.growth_flag = out.growth_flag || m.growth_flag;
        out.max_defect_ratio = std::max(out.max_defect_ratio, m.max_defect_ratio);
        out.accepted_steps += m.accepted_steps;
        out.rejected_steps += m.rejected_steps;
    }
    return out;
}

/// Scalar whose sign flips as E crosses a bound-state energy.
inline double growth_determinant(const Eigen::MatrixXd& g)
{
    return g.size() == 1 ? g(0, 0) : g.determinant();
}

/// Unit vector spanning the (near-)kernel of the growth matrix, oriented so
/// its largest entry is positive.
inline Eigen::VectorXd returning_combination(const Eigen::MatrixXd& g)
{
    if (g.size() == 1) {
        return Eigen::VectorXd::Ones(1);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeFullV);
    Eigen::VectorXd c = svd.matrixV().col(g.cols() - 1);
    Eigen::Index k;
    c.cwiseAbs().maxCoeff(&k);
    return c[k] < 0 ? Eigen::VectorXd(-c) : c;
}

inline int dominant_sign(const Eigen::VectorXd& v)
{
    Eigen::Index k;
    v.cwiseAbs().maxCoeff(&k);
    return sign_of(v[k]);
}

inline int count_nodes(const Trajectory& traj)
{
    const Eigen::Index n = static_cast<Eigen::Index>(traj.dimension());
    // Component carrying the largest L2 weight.
    Eigen::VectorXd weight = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 1; k < traj.samples.size(); ++k) {
        const double dt = traj.samples[k].t - traj.samples[k - 1].t;
        weight += 0.5 * dt * (traj.samples[k].z.cwiseAbs2() + traj.samples[k - 1].z.cwiseAbs2());
    }
    Eigen::Index c;
    weight.maxCoeff(&c);
    const double floor = 1e-12 * traj.peak();
    int nodes = 0;
    int last = 0;
    for (const auto& s : traj.samples) {
        if (std::abs(s.z[c]) <= floor) {
            continue;
        }
        const int sg = sign_of(s.z[c]);
        if (last != 0 && sg != last) {
            ++nodes;
        }
        last = sg;
    }
    return nodes;
}

inline void check_scan_inputs(const PotentialMatrix& potential, std::span<const double> thresholds, Interval range,
                              double grid_step, double tol)
{
    if (thresholds.size() != potential.size()) {
        throw validation_error("scan: thresholds do not match the potential size");
    }
    if (!(range.lo < range.hi)) {
        throw validation_error("scan: empty energy range");
    }
    const double lowest = *std::min_element(thresholds.begin(), thresholds.end());
    if (!(range.hi < lowest)) {
        throw validation_error("scan: energy range must lie strictly below every threshold");
    }
    if (!(tol > 0.0) || !(grid_step > tol)) {
        throw validation_error("scan: need grid_step > tol > 0");
    }
}

}  // namespace detail

/// Locates the energies where the decaying-left solution switches the sign of
/// its exponential runaway on the right: the bound-state energies, seen
/// classically as bifurcations of the particle's fate.
///
/// Every grid cell of width grid_step where the growth determinant changes
/// sign is bisected down to a bracket of width at most tol. Two flips inside
/// one cell cancel and go unnoticed; refine grid_step if that is a concern.
inline ScanReport scan_bifurcations(const PotentialMatrix& potential, std::span<const double> thresholds,
                                    Interval e_range, double grid_step, double tol, const ScanOptions& opt = {})
{
    detail::check_scan_inputs(potential, thresholds, e_range, grid_step, tol);
    const Interval domain = potential.working_interval();
    const auto growth = [&](double e) { return detail::right_growth(potential, thresholds, e, domain, opt); };

    const auto cells = static_cast<std::size_t>(std::ceil(e_range.width() / grid_step - 1e-9));
    std::vector<double> grid(cells + 1);
    for (std::size_t k = 0; k <= cells; ++k) {
        grid[k] = k == cells ? e_range.hi : e_range.lo + static_cast<double>(k) * grid_step;
    }
    std::vector<double> f(grid.size());
    parallel_for(grid.size(), opt.workers,
                 [&](std::size_t k) { f[k] = detail::growth_determinant(growth(grid[k])); });

    std::vector<std::size_t> flips;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        if (detail::sign_of(f[k]) * detail::sign_of(f[k + 1]) < 0) {
            flips.push_back(k);
        }
    }

    ScanReport report;
    report.scan_range = e_range;
    report.grid_step = grid_step;
    report.tolerance = tol;
    report.bifurcation_points.resize(flips.size());
    parallel_for(flips.size(), opt.workers, [&](std::size_t m) {
        const std::size_t k = flips[m];
        double lo = grid[k];
        double hi = grid[k + 1];
        const int s_lo = detail::sign_of(f[k]);
        Eigen::MatrixXd g_lo = growth(lo);
        Eigen::MatrixXd g_hi = growth(hi);
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) {
                break;
            }
            Eigen::MatrixXd g = growth(mid);
            if (detail::sign_of(detail::growth_determinant(g)) == s_lo) {
                lo = mid;
                g_lo = std::move(g);
            } else {
                hi = mid;
                g_hi = std::move(g);
            }
        }
        BifurcationPoint p;
        p.energy = 0.5 * (lo + hi);
        p.bracket = {lo, hi};
        const Eigen::VectorXd c = detail::returning_combination(growth(p.energy));
        p.launch_weights.assign(c.data(), c.data() + c.size());
        p.sign_below = detail::dominant_sign(g_lo * c);
        p.sign_above = detail::dominant_sign(g_hi * c);
        ShootOptions so;
        so.rel_tol = opt.rel_tol;
        so.abs_tol = opt.abs_tol;
        so.integrate.keep_dense = false;
        const auto below =
            shoot_schrodinger(potential, lo, thresholds, domain.lo, domain.hi, Decaying{p.launch_weights}, so);
        p.node_count_below = detail::count_nodes(below);
        report.bifurcation_points[m] = std::move(p);
    });
    return report;
}

/// Classical fate of the particle launched from rest-like decaying data at
/// the far left: either it comes back to the origin (E at a bifurcation
/// point) or it runs away to one side.
struct ReturnDemo {
    Trajectory trajectory;
    /// Energy actually integrated; see classical_return_demo.
    double energy = 0.0;
    bool returned = false;
    /// |z(t_end)|_inf / max_t |z(t)|_inf.
    double endpoint_ratio = 0.0;
    int endpoint_sign = 0;
};

/// Integrates the decaying-left launch through the time-dependent force at
/// parameter E and reports whether the particle returns to the origin.
///
/// E is expected to be a bifurcation point known to within tol. The launch is
/// pinned to the sign change of the growth determinant inside [E - tol, E + tol]
/// (bisected to the rounding limit), since the runaway amplifies any energy
/// offset by exp(kappa L). Without a sign change in that window, E itself is
/// integrated and the runaway shows up as growth_flag.
inline ReturnDemo classical_return_demo(const PotentialMatrix& potential, std::span<const double> thresholds,
                                        double energy, std::optional<Interval> t_span = std::nullopt,
                                        double tol = 1e-8, double sample_step = 0.05,
                                        const ScanOptions& opt = {})
{
    const std::size_t n = potential.size();
    if (thresholds.size() != n) {
        throw validation_error("return demo: thresholds do not match the potential size");
    }
    if (!(energy < *std::min_element(thresholds.begin(), thresholds.end()))) {
        throw validation_error("return demo: E must lie below every threshold");
    }
    if (!(tol > 0.0)) {
        throw validation_error("return demo: tol must be positive");
    }
    const Interval domain = t_span.value_or(potential.working_interval());
    if (!(domain.lo < domain.hi)) {
        throw validation_error("return demo: empty time span");
    }
    const bool flat = !t_span.has_value();
    const auto growth = [&](double e) {
        return detail::right_growth(potential, thresholds, e, domain, opt, flat);
    };

    double e_used = energy;
    double lo = energy - tol;
    double hi = energy + tol;
    double f_lo = detail::growth_determinant(growth(lo));
    double f_hi = detail::growth_determinant(growth(hi));
    if (detail::sign_of(f_lo) * detail::sign_of(f_hi) < 0) {
        const int s_lo = detail::sign_of(f_lo);
        while (true) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) {
                break;
            }
            const double fm = detail::growth_determinant(growth(mid));
            if (detail::sign_of(fm) == s_lo) {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
        }
        e_used = std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
    }

    // The launches that define the growth matrix are superposed directly, so
    // the returning combination annihilates exactly the computed runaway.
    const auto family = detail::launch_family(potential, thresholds, e_used, domain, opt, sample_step, flat);
    const Eigen::VectorXd c = detail::returning_combination(detail::growth_matrix(family, thresholds, e_used));
    ReturnDemo demo;
    demo.energy = e_used;
    demo.trajectory = n == 1 ? family.front() : detail::superpose(family, c);
    const auto& end = demo.trajectory.back().z;
    demo.endpoint_ratio = end.cwiseAbs().maxCoeff() / demo.trajectory.peak();
    demo.endpoint_sign = detail::dominant_sign(end);
    demo.returned = demo.endpoint_ratio <= 1e-4;
    demo.trajectory.growth_flag = demo.trajectory.growth_flag || !demo.returned;
    return demo;
}

}  // namespace mcdual
