#pragma once

#include "mcdual/errors.hpp"
#include "mcdual/potential.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mcdual {

/// How the coordinates of a dual classical system are labeled. Purely
/// notational: it only changes output column names.
enum class Interpretation {
    few_body,            // z_i is the i-th particle on its own line
    single_particle_3d,  // (x, y, z) of one particle; needs three channels
};

inline std::string to_string(Interpretation i)
{
    return i == Interpretation::few_body ? "few-body" : "single-particle-3d";
}

/// Position and velocity of every body at one instant.
struct ClassicalState {
    double t = 0.0;
    Eigen::VectorXd z;
    Eigen::VectorXd zdot;
};

/// Classical reading of a multichannel model: N bodies driven by
///   F_i(t, z) = sum_j v_ij(t) z_j - E_i z_i,
/// i.e. the stationary equation with x renamed to t and psi_i to z_i. The
/// former channel energies E_i are free force-strength parameters here.
class ForceSystem {
public:
    ForceSystem(PotentialMatrix potential, std::vector<double> e_params, Interpretation interpretation)
        : potential_(std::move(potential)), interpretation_(interpretation)
    {
        if (e_params.size() != potential_.size()) {
            throw validation_error("dualize: expected " + std::to_string(potential_.size()) +
                                   " force parameters, got " + std::to_string(e_params.size()));
        }
        if (interpretation_ == Interpretation::single_particle_3d && potential_.size() != 3) {
            throw validation_error("dualize: the three-dimensional reading needs exactly three channels");
        }
        e_params_ = Eigen::Map<const Eigen::VectorXd>(e_params.data(), static_cast<Eigen::Index>(e_params.size()));
    }

    std::size_t n_bodies() const { return potential_.size(); }
    const PotentialMatrix& potential() const { return potential_; }
    const Eigen::VectorXd& e_params() const { return e_params_; }
    Interpretation interpretation() const { return interpretation_; }

    /// out = V(t) z - E .* z
    template <class Real, class In, class Out>
    void accelerate(Real t, const In& z, Out&& out, matrix_t<Real>& scratch) const
    {
        potential_.evaluate_into(t, scratch);
        out.noalias() = scratch * z;
        out -= e_params_.cast<Real>().cwiseProduct(z);
    }

    Eigen::VectorXd force(double t, const Eigen::VectorXd& z) const
    {
        if (static_cast<std::size_t>(z.size()) != n_bodies()) {
            throw validation_error("force: state has " + std::to_string(z.size()) + " coordinates, system has " +
                                   std::to_string(n_bodies()));
        }
        Eigen::VectorXd out(z.size());
        Eigen::MatrixXd scratch;
        accelerate(t, z, out, scratch);
        return out;
    }

    /// Coordinate column names: z_1..z_N, or x, y, z for the 3D reading.
    std::vector<std::string> coordinate_names() const
    {
        if (interpretation_ == Interpretation::single_particle_3d) {
            return {"x", "y", "z"};
        }
        std::vector<std::string> names;
        for (std::size_t i = 1; i <= n_bodies(); ++i) {
            names.push_back("z_" + std::to_string(i));
        }
        return names;
    }

private:
    PotentialMatrix potential_;
    Eigen::VectorXd e_params_;
    Interpretation interpretation_;
};

inline ForceSystem dualize(PotentialMatrix potential, std::vector<double> e_params,
                           Interpretation interpretation = Interpretation::few_body)
{
    return ForceSystem(std::move(potential), std::move(e_params), interpretation);
}

inline Eigen::VectorXd force(const ForceSystem& system, double t, const Eigen::VectorXd& z)
{
    return system.force(t, z);
}

/// Channel parameters E_i = E - eps_i for one total energy E.
inline std::vector<double> channel_energies(double energy, std::span<const double> thresholds)
{
    std::vector<double> e(thresholds.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = energy - thresholds[i];
    }
    return e;
}

/// Recovers the total energy E from E_i = E - eps_i. Throws validation_error
/// when the E_i + eps_i disagree, i.e. the force system has no quantum dual.
inline double quantum_energy_of(std::span<const double> e_params, std::span<const double> thresholds)
{
    if (e_params.size() != thresholds.size() || e_params.empty()) {
        throw validation_error("quantum_energy_of: parameter and threshold vectors must have equal, nonzero length");
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < e_params.size(); ++i) {
        mean += e_params[i] + thresholds[i];
    }
    mean /= static_cast<double>(e_params.size());
    for (std::size_t i = 0; i < e_params.size(); ++i) {
        if (std::abs(e_params[i] + thresholds[i] - mean) >= 1e-12) {
            throw validation_error("force parameters do not correspond to a single quantum energy");
        }
    }
    return mean;
}

}  // namespace mcdual
