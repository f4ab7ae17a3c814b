#pragma once

#include "mcdual/ode.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mcdual {

/// Sampled solution (t, z, zdot) in either reading: t <-> x, z <-> psi.
/// Samples are stored with strictly increasing t whatever the integration
/// direction. When dense output was kept, state_at() interpolates anywhere
/// inside the covered span.
template <class Real>
struct BasicTrajectory {
    struct Sample {
        Real t;
        vector_t<Real> z;
        vector_t<Real> zdot;
    };

    std::vector<Sample> samples;
    std::vector<std::string> coordinate_names;
    /// Force parameters E_i of the integrated system, one per physical channel.
    std::vector<double> e_params;
    double rel_tol = 0.0;
    double abs_tol = 0.0;
    /// Set when the solution ran away: integration stopped at the growth limit,
    /// or (for the return demonstration) the particle did not come back.
    bool growth_flag = false;
    /// Largest midpoint defect over its admissible bound across accepted steps.
    double max_defect_ratio = 0.0;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::vector<DenseSegment<Real>> dense;

    std::size_t dimension() const { return coordinate_names.size(); }
    bool empty() const { return samples.empty(); }
    const Sample& front() const { return samples.front(); }
    const Sample& back() const { return samples.back(); }

    /// Stacked (z, zdot) at time t from the dense output.
    vector_t<Real> state_at(Real t) const { return find_segment(dense, t).value(t); }

    /// Largest |z_i| over all samples.
    Real peak() const
    {
        Real m = Real(0);
        for (const auto& s : samples) {
            m = std::max(m, s.z.cwiseAbs().maxCoeff());
        }
        return m;
    }
};

using Trajectory = BasicTrajectory<double>;

template <class To, class From>
BasicTrajectory<To> trajectory_cast(const BasicTrajectory<From>& in)
{
    BasicTrajectory<To> out;
    out.samples.reserve(in.samples.size());
    for (const auto& s : in.samples) {
        out.samples.push_back({static_cast<To>(s.t), s.z.template cast<To>(), s.zdot.template cast<To>()});
    }
    out.coordinate_names = in.coordinate_names;
    out.e_params = in.e_params;
    out.rel_tol = in.rel_tol;
    out.abs_tol = in.abs_tol;
    out.growth_flag = in.growth_flag;
    out.max_defect_ratio = in.max_defect_ratio;
    out.accepted_steps = in.accepted_steps;
    out.rejected_steps = in.rejected_steps;
    out.dense.reserve(in.dense.size());
    for (const auto& seg : in.dense) {
        DenseSegment<To> d;
        d.t0 = static_cast<To>(seg.t0);
        d.h = static_cast<To>(seg.h);
        for (std::size_t k = 0; k < seg.r.size(); ++k) {
            d.r[k] = seg.r[k].template cast<To>();
        }
        out.dense.push_back(std::move(d));
    }
    return out;
}

/// Decimal notation with 17 significant digits (printf %.17g).
inline std::string format_number(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// z_3 -> zdot_3, x -> xdot.
inline std::string velocity_name(const std::string& coordinate)
{
    const auto cut = coordinate.find('_');
    if (cut == std::string::npos) {
        return coordinate + "dot";
    }
    return coordinate.substr(0, cut) + "dot" + coordinate.substr(cut);
}

/// CSV with header t,z_1,...,z_N,zdot_1,...,zdot_N and one row per sample.
inline void write_csv(std::ostream& os, const Trajectory& traj)
{
    os << 't';
    for (const auto& name : traj.coordinate_names) {
        os << ',' << name;
    }
    for (const auto& name : traj.coordinate_names) {
        os << ',' << velocity_name(name);
    }
    os << '\n';
    for (const auto& s : traj.samples) {
        os << format_number(s.t);
        for (Eigen::Index i = 0; i < s.z.size(); ++i) {
            os << ',' << format_number(s.z[i]);
        }
        for (Eigen::Index i = 0; i < s.zdot.size(); ++i) {
            os << ',' << format_number(s.zdot[i]);
        }
        os << '\n';
    }
}

}  // namespace mcdual
