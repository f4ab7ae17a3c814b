#pragma once

#include "mcdual/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace mcdual {

/// Inverse-problem input for a reflectionless matrix potential with a single
/// bound state: channel thresholds, the bound-state energy and the asymptotic
/// normalization M_i of each channel's decaying tail M_i exp(-kappa_i x).
///
/// Units follow hbar = 2m = 1, so energies and inverse squared lengths coincide.
struct SpectralData {
    std::size_t n_channels = 0;
    std::vector<double> thresholds;
    double e_bound = 0.0;
    std::vector<double> weights;
};

/// Throws validation_error unless the data admits a closed-channel bound state.
inline void validate(const SpectralData& s)
{
    if (s.n_channels == 0) {
        throw validation_error("spectral data: n_channels must be at least 1");
    }
    if (s.thresholds.size() != s.n_channels || s.weights.size() != s.n_channels) {
        throw validation_error("spectral data: thresholds and weights must have n_channels entries");
    }
    for (std::size_t i = 0; i < s.n_channels; ++i) {
        if (!std::isfinite(s.thresholds[i]) || !std::isfinite(s.weights[i])) {
            throw validation_error("spectral data: non-finite entry in channel " + std::to_string(i + 1));
        }
        if (!(s.weights[i] > 0.0)) {
            throw validation_error("spectral data: weight M_" + std::to_string(i + 1) + " must be positive");
        }
    }
    if (!std::isfinite(s.e_bound)) {
        throw validation_error("spectral data: e_bound must be finite");
    }
    const double lowest = *std::min_element(s.thresholds.begin(), s.thresholds.end());
    if (!(s.e_bound < lowest)) {
        throw validation_error("spectral data: e_bound must lie below every threshold "
                               "(no closed-channel bound state possible)");
    }
}

/// kappa_i = sqrt(eps_i - E_bound); all strictly positive for valid data.
inline std::vector<double> kappas(const SpectralData& s)
{
    std::vector<double> k(s.thresholds.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        k[i] = std::sqrt(s.thresholds[i] - s.e_bound);
    }
    return k;
}

/// Builds spectral data from kappa_i instead of thresholds: eps_i = E_bound + kappa_i^2.
inline SpectralData spectral_from_kappas(double e_bound, const std::vector<double>& kappa,
                                         const std::vector<double>& weights)
{
    SpectralData s;
    s.n_channels = kappa.size();
    s.e_bound = e_bound;
    s.weights = weights;
    s.thresholds.resize(kappa.size());
    for (std::size_t i = 0; i < kappa.size(); ++i) {
        s.thresholds[i] = e_bound + kappa[i] * kappa[i];
    }
    return s;
}

}  // namespace mcdual
