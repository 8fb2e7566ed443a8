#pragma once

#include "mss/ad/tape.hpp"
#include "mss/core/error.hpp"

#include <cmath>
#include <map>
#include <string>

namespace mss::training {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. Moments are keyed by parameter name; frozen parameters are skipped.
template <typename S>
class Adam {
public:
    explicit Adam(AdamConfig config) : config_(config) {
        if (!(config_.lr > 0.0)) throw InvalidInput("learning rate must be positive");
        if (config_.beta1 < 0.0 || config_.beta1 >= 1.0 || config_.beta2 < 0.0 || config_.beta2 >= 1.0) {
            throw InvalidInput("adam betas must lie in [0, 1)");
        }
    }

    [[nodiscard]] long long steps() const { return t_; }
    [[nodiscard]] const AdamConfig& config() const { return config_; }

    /// Applies one update from the gradients currently held in `params`. Nothing is modified
    /// if any gradient or resulting value is non-finite.
    void step(ad::ParameterStore<S>& params) {
        const long long t = t_ + 1;
        const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t));
        std::map<std::string, Moments> next;
        std::map<std::string, ad::Mat<S>> values;
        params.for_each([&](ad::Parameter<S>& p) {
            if (!p.trainable) return;
            if (!p.grad.allFinite()) throw NumericalError("non-finite gradient in " + p.name);
            Moments m = moments_for(p);
            m.m = S(config_.beta1) * m.m + S(1.0 - config_.beta1) * p.grad;
            m.v = S(config_.beta2) * m.v + S(1.0 - config_.beta2) * p.grad.cwiseProduct(p.grad);
            const ad::Mat<S> mhat = m.m / S(c1);
            const ad::Mat<S> vhat = m.v / S(c2);
            ad::Mat<S> updated = p.value - (S(config_.lr) * mhat.array() / (vhat.array().sqrt() + S(config_.eps))).matrix();
            if (!updated.allFinite()) throw NumericalError("non-finite update in " + p.name);
            values.emplace(p.name, std::move(updated));
            next.emplace(p.name, std::move(m));
        });
        params.for_each([&](ad::Parameter<S>& p) {
            const auto it = values.find(p.name);
            if (it != values.end()) p.value = std::move(it->second);
        });
        for (auto& [name, m] : next) state_[name] = std::move(m);
        t_ = t;
    }

private:
    struct Moments {
        ad::Mat<S> m;
        ad::Mat<S> v;
    };

    Moments moments_for(const ad::Parameter<S>& p) const {
        const auto it = state_.find(p.name);
        if (it != state_.end()) return it->second;
        return {ad::Mat<S>::Zero(p.value.rows(), p.value.cols()), ad::Mat<S>::Zero(p.value.rows(), p.value.cols())};
    }

    AdamConfig config_;
    std::map<std::string, Moments> state_;
    long long t_ = 0;
};

/// Global L2 norm of all trainable gradients.
template <typename S>
double gradient_norm(const ad::ParameterStore<S>& params) {
    double sq = 0.0;
    params.for_each([&](const ad::Parameter<S>& p) {
        if (p.trainable) sq += static_cast<double>(p.grad.squaredNorm());
    });
    return std::sqrt(sq);
}

/// Rescales gradients so their global norm is at most max_norm. Returns the norm before clipping.
template <typename S>
double clip_gradients(ad::ParameterStore<S>& params, double max_norm) {
    const double norm = gradient_norm(params);
    if (max_norm > 0.0 && norm > max_norm) {
        const S f = S(max_norm / norm);
        params.for_each([&](ad::Parameter<S>& p) {
            if (p.trainable) p.grad *= f;
        });
    }
    return norm;
}

}  // namespace mss::training
