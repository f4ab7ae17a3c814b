#pragma once

#include "mcdual/potential.hpp"
#include "mcdual/quadrature.hpp"

#include <memory>
#include <numeric>
#include <vector>

namespace mcdual {

/// Analytic bound state of the reflectionless matrix,
///   psi_i(x) = M_i e^{-kappa_i x} / D(x),
/// at energy E_bound, with per-channel norms integral psi_i^2 dx.
class BoundState {
public:
    double energy() const { return model_->data().e_bound; }
    std::size_t size() const { return model_->size(); }

    template <class Real = double>
    vector_t<Real> components(Real x) const
    {
        vector_t<Real> psi;
        model_->wavefunction(x, psi, static_cast<vector_t<Real>*>(nullptr));
        return psi;
    }

    template <class Real = double>
    vector_t<Real> derivatives(Real x) const
    {
        vector_t<Real> psi;
        vector_t<Real> dpsi;
        model_->wavefunction(x, psi, &dpsi);
        return dpsi;
    }

    const std::vector<double>& channel_norms() const { return norms_; }
    double total_norm() const { return std::accumulate(norms_.begin(), norms_.end(), 0.0); }

    /// n_j = norm_j / total.
    std::vector<double> fractions() const
    {
        const double total = total_norm();
        std::vector<double> f(norms_.size());
        for (std::size_t j = 0; j < f.size(); ++j) {
            f[j] = norms_[j] / total;
        }
        return f;
    }

    friend BoundState bound_state(const SpectralData& spectral, double quad_rel_tol);

private:
    explicit BoundState(std::shared_ptr<const detail::reflectionless_model> m) : model_(std::move(m)) {}

    std::shared_ptr<const detail::reflectionless_model> model_;
    std::vector<double> norms_;
};

/// Builds the bound state and its channel norms by adaptive quadrature over
/// the whole line (relative error at most quad_rel_tol).
inline BoundState bound_state(const SpectralData& spectral, double quad_rel_tol = 1e-12)
{
    BoundState b(std::make_shared<const detail::reflectionless_model>(spectral));
    const auto& model = *b.model_;
    auto density = [&](double x) -> Eigen::VectorXd {
        Eigen::VectorXd psi;
        model.wavefunction(x, psi, static_cast<Eigen::VectorXd*>(nullptr));
        return psi.cwiseProduct(psi);
    };
    const double inf = std::numeric_limits<double>::infinity();
    const auto result = integrate_adaptive(density, -inf, inf, quad_rel_tol);
    b.norms_.assign(result.value.data(), result.value.data() + result.value.size());
    return b;
}

}  // namespace mcdual
