#pragma once

#include "mcdual/bound_state.hpp"
#include "mcdual/parallel.hpp"

#include <span>
#include <vector>

namespace mcdual {

struct ConcentrationReport {
    std::size_t target_channel = 0;
    std::vector<double> sweep_values;
    /// Per trial: n_j = channel_norm_j / total_norm.
    std::vector<std::vector<double>> fractions;
    /// Per trial: slope dpsi_j/dx at x = 0, a derived diagnostic only.
    std::vector<std::vector<double>> slopes_at_origin;
};

/// Rebuilds the bound state with M_target replaced by each sweep value and
/// records how its norm is shared between the channels. As M_target grows the
/// wavefunction empties the other channels into the target one.
inline ConcentrationReport concentration_sweep(const SpectralData& base, std::size_t target,
                                               std::span<const double> m_values, unsigned workers = 0,
                                               double quad_rel_tol = 1e-12)
{
    validate(base);
    if (target >= base.n_channels) {
        throw validation_error("concentration: target channel out of range");
    }
    if (m_values.empty()) {
        throw validation_error("concentration: empty sweep");
    }
    for (std::size_t k = 0; k < m_values.size(); ++k) {
        if (!(m_values[k] > 0.0) || !std::isfinite(m_values[k])) {
            throw validation_error("concentration: sweep values must be positive");
        }
        if (k > 0 && !(m_values[k] > m_values[k - 1])) {
            throw validation_error("concentration: sweep values must be increasing");
        }
    }

    ConcentrationReport report;
    report.target_channel = target;
    report.sweep_values.assign(m_values.begin(), m_values.end());
    report.fractions.resize(m_values.size());
    report.slopes_at_origin.resize(m_values.size());
    parallel_for(m_values.size(), workers, [&](std::size_t k) {
        SpectralData s = base;
        s.weights[target] = m_values[k];
        const BoundState b = bound_state(s, quad_rel_tol);
        report.fractions[k] = b.fractions();
        const Eigen::VectorXd slope = b.derivatives(0.0);
        report.slopes_at_origin[k].assign(slope.data(), slope.data() + slope.size());
    });
    return report;
}

}  // namespace mcdual
