#pragma once

#include "mcdual/errors.hpp"
#include "mcdual/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace mcdual {

template <class Real>
using vector_t = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <class Real>
using matrix_t = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Below this magnitude the interaction matrix counts as switched off.
inline constexpr double flat_threshold = 1e-10;

/// Length scale factor of the default working interval, L = 25 / min kappa.
inline constexpr double decay_lengths = 25.0;

namespace detail {

/// One-bound-state reflectionless construction
///   v_ij(x) = 2 d/dx [ M_i M_j e^{-(k_i+k_j)x} / D(x) ],
///   D(x)    = 1 + sum_m (M_m^2 / 2k_m) e^{-2 k_m x},
/// with the derivative taken in closed form. All exponentials are evaluated
/// relative to the dominant term of D so the evaluator stays finite on both
/// sides of the origin.
class reflectionless_model {
public:
    explicit reflectionless_model(SpectralData s) : data_(std::move(s))
    {
        validate(data_);
        kappa_ = kappas(data_);
        const std::size_t n = data_.n_channels;
        log_m_.resize(n);
        log_c_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            log_m_[i] = std::log(data_.weights[i]);
            log_c_[i] = 2.0 * log_m_[i] - std::log(2.0 * kappa_[i]);
        }
    }

    const SpectralData& data() const { return data_; }
    const std::vector<double>& kappa() const { return kappa_; }
    std::size_t size() const { return data_.n_channels; }

    template <class Real>
    void evaluate(Real x, matrix_t<Real>& v) const
    {
        const std::size_t n = size();
        const auto t = terms(x);
        v.resize(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const Real kij = Real(kappa_[i]) + Real(kappa_[j]);
                Real bracket = -kij * t.inv_scale;
                for (std::size_t m = 0; m < n; ++m) {
                    bracket += (Real(2) * Real(kappa_[m]) - kij) * t.q[m];
                }
                const Real vij = Real(2) * t.p[i] * t.p[j] * bracket / (t.denom * t.denom);
                v(i, j) = vij;
                v(j, i) = vij;
            }
        }
    }

    /// psi_i = M_i e^{-k_i x} / D and, optionally, its derivative.
    template <class Real>
    void wavefunction(Real x, vector_t<Real>& psi, vector_t<Real>* dpsi) const
    {
        using std::exp;
        const std::size_t n = size();
        const auto t = terms(x);
        psi.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            psi[i] = exp(Real(log_m_[i]) - Real(kappa_[i]) * x - t.shift) / t.denom;
        }
        if (dpsi != nullptr) {
            dpsi->resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                Real bracket = -Real(kappa_[i]) * t.inv_scale;
                for (std::size_t m = 0; m < n; ++m) {
                    bracket += (Real(2) * Real(kappa_[m]) - Real(kappa_[i])) * t.q[m];
                }
                (*dpsi)[i] = psi[i] * bracket / t.denom;
            }
        }
    }

private:
    template <class Real>
    struct scaled_terms {
        Real shift;      // s = max(0, max_m a_m)
        Real inv_scale;  // e^{-s}
        vector_t<Real> q;  // e^{a_m - s}
        vector_t<Real> p;  // M_i e^{-k_i x - s/2}
        Real denom;      // D e^{-s}
    };

    template <class Real>
    scaled_terms<Real> terms(Real x) const
    {
        using std::exp;
        const std::size_t n = size();
        scaled_terms<Real> t;
        t.q.resize(n);
        t.p.resize(n);
        Real shift = Real(0);
        for (std::size_t m = 0; m < n; ++m) {
            t.q[m] = Real(log_c_[m]) - Real(2) * Real(kappa_[m]) * x;
            shift = std::max(shift, t.q[m]);
        }
        t.shift = shift;
        t.inv_scale = exp(-shift);
        t.denom = t.inv_scale;
        for (std::size_t m = 0; m < n; ++m) {
            t.q[m] = exp(t.q[m] - shift);
            t.denom += t.q[m];
            t.p[m] = exp(Real(log_m_[m]) - Real(kappa_[m]) * x - shift / Real(2));
        }
        return t;
    }

    SpectralData data_;
    std::vector<double> kappa_;
    std::vector<double> log_m_;
    std::vector<double> log_c_;  // log(M^2 / 2k)
};

}  // namespace detail

/// Symmetric N x N interaction matrix v_ij(x). Either the reflectionless
/// construction, the identically zero matrix, or a user-supplied evaluator.
/// Immutable; copies share the underlying model.
class PotentialMatrix {
public:
    enum class kind { reflectionless, zero, custom };
    using custom_fn = std::function<Eigen::MatrixXd(double)>;

    static PotentialMatrix custom(std::size_t n, custom_fn fn, Interval domain, std::string label = "custom")
    {
        if (n == 0) {
            throw validation_error("custom potential: size must be at least 1");
        }
        PotentialMatrix p(kind::custom, n);
        p.custom_ = std::make_shared<custom_fn>(std::move(fn));
        p.domain_ = domain;
        p.label_ = std::move(label);
        return p;
    }

    std::size_t size() const { return n_; }
    kind source_kind() const { return kind_; }
    const std::string& label() const { return label_; }

    /// Spectral data the matrix was built from; nullptr unless reflectionless.
    const SpectralData* spectral() const { return model_ ? &model_->data() : nullptr; }
    const detail::reflectionless_model* model() const { return model_.get(); }

    template <class Real>
    void evaluate_into(Real x, matrix_t<Real>& v) const
    {
        switch (kind_) {
        case kind::reflectionless:
            model_->evaluate(x, v);
            return;
        case kind::zero:
            v.setZero(n_, n_);
            return;
        case kind::custom: {
            const Eigen::MatrixXd m = (*custom_)(static_cast<double>(x));
            if (static_cast<std::size_t>(m.rows()) != n_ || static_cast<std::size_t>(m.cols()) != n_) {
                throw validation_error("custom potential returned a matrix of the wrong size");
            }
            v = m.cast<Real>();
            return;
        }
        }
    }

    template <class Real = double>
    matrix_t<Real> operator()(Real x) const
    {
        matrix_t<Real> v;
        evaluate_into(x, v);
        return v;
    }

    double max_abs(double x) const { return (*this)(x).cwiseAbs().maxCoeff(); }

    /// Truncated domain on which the matrix is non-negligible. Each side starts
    /// at 25 / min kappa and is pushed outward until every |v_ij| is below
    /// flat_threshold; the left side of a multichannel matrix decays only at
    /// the rate set by the gaps between the kappa_i.
    Interval working_interval() const
    {
        if (kind_ != kind::reflectionless) {
            return domain_;
        }
        const auto& k = model_->kappa();
        const double base = decay_lengths / *std::min_element(k.begin(), k.end());
        const auto reach = [&](double sign) {
            double x = base;
            const double step = base / 4.0;
            for (int i = 0; i < 400; ++i, x += step) {
                if (max_abs(sign * x) < flat_threshold) {
                    return x;
                }
            }
            throw validation_error("potential does not decay below the flat threshold; "
                                   "channel momenta are too close to separate");
        };
        return {-reach(-1.0), reach(1.0)};
    }

    friend PotentialMatrix build_reflectionless(const SpectralData& spectral);
    friend PotentialMatrix zero_potential(std::size_t n);

private:
    PotentialMatrix(kind k, std::size_t n) : kind_(k), n_(n) {}

    kind kind_;
    std::size_t n_;
    std::shared_ptr<const detail::reflectionless_model> model_;
    std::shared_ptr<const custom_fn> custom_;
    Interval domain_{-decay_lengths, decay_lengths};
    std::string label_;
};

/// Closed-form reflectionless matrix with one bound state at spectral.e_bound.
/// Throws validation_error when e_bound is not below every threshold or a
/// weight is not positive.
inline PotentialMatrix build_reflectionless(const SpectralData& spectral)
{
    auto model = std::make_shared<const detail::reflectionless_model>(spectral);
    PotentialMatrix p(PotentialMatrix::kind::reflectionless, spectral.n_channels);
    p.model_ = std::move(model);
    p.label_ = "reflectionless";
    return p;
}

inline PotentialMatrix zero_potential(std::size_t n)
{
    if (n == 0) {
        throw validation_error("zero potential: size must be at least 1");
    }
    PotentialMatrix p(PotentialMatrix::kind::zero, n);
    p.label_ = "zero";
    return p;
}

}  // namespace mcdual
