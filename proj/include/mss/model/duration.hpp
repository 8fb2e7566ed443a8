#pragma once

#include "mss/ad/ops.hpp"
#include "mss/core/error.hpp"
#include "mss/model/config.hpp"
#include "mss/model/layers.hpp"
#include "mss/model/loss.hpp"

#include <cmath>
#include <vector>

namespace mss::model {

/// Rounds half up and clamps to at least one frame.
inline int emit_duration(double frames) {
    if (!std::isfinite(frames)) throw NumericalError("non-finite duration prediction");
    const double r = std::floor(frames + 0.5);
    return r < 1.0 ? 1 : static_cast<int>(r);
}

/// Per-phoneme duration predictor with its own encoder. The network outputs log-frames;
/// training compares against log durations and inference exponentiates.
template <typename S>
class DurationModel {
public:
    explicit DurationModel(DurationConfig config) : config_(config) {
        config_.validate();
        Initializer init(config_.seed);
        add_encoder(params_, init, encoder_spec());
        add_dense(params_, init, "dur.out", encoder_spec().output_dim(), 1);
    }

    DurationModel(DurationConfig config, const ParameterStore<S>& stored) : DurationModel(config) {
        if (stored.size() != params_.size()) throw CheckpointMismatch("checkpoint tensor count does not match the model");
        params_.for_each([&](ad::Parameter<S>& p) {
            if (!stored.contains(p.name)) throw CheckpointMismatch("checkpoint lacks tensor " + p.name);
            const auto& src = stored.get(p.name);
            if (src.value.rows() != p.value.rows() || src.value.cols() != p.value.cols()) {
                throw CheckpointMismatch("tensor " + p.name + " has the wrong shape");
            }
            p.value = src.value;
        });
    }

    [[nodiscard]] const DurationConfig& config() const { return config_; }
    ParameterStore<S>& params() { return params_; }
    [[nodiscard]] const ParameterStore<S>& params() const { return params_; }

    [[nodiscard]] EncoderSpec encoder_spec() const {
        return {"dur.encoder", config_.vocab_size, config_.embed_dim, config_.conv_layers,
                config_.kernel,  true,               config_.hidden};
    }

    /// P x 1 log-duration predictions.
    Var<S> forward(Tape<S>& tape, const std::vector<int>& phoneme_ids) {
        Binder<S> p(tape, params_);
        const auto enc = run_encoder(p, encoder_spec(), phoneme_ids);
        return dense(p, "dur.out", enc.states);
    }

    /// Log-domain MSE against the true durations.
    Var<S> loss(Tape<S>& tape, const std::vector<int>& phoneme_ids, const std::vector<int>& durations) {
        if (durations.size() != phoneme_ids.size()) throw InvalidInput("one duration per phoneme required");
        Mat<S> target(static_cast<Index>(durations.size()), 1);
        for (std::size_t i = 0; i < durations.size(); ++i) {
            if (durations[i] < 1) throw InvalidDuration("durations must be positive");
            target(static_cast<Index>(i), 0) = std::log(static_cast<S>(durations[i]));
        }
        return duration_loss(forward(tape, phoneme_ids), tape.constant(target));
    }

    /// Predicted frames per phoneme before rounding.
    std::vector<double> predict_frames(const std::vector<int>& phoneme_ids) {
        Tape<S> tape;
        const Mat<S> log_d = forward(tape, phoneme_ids).value();
        std::vector<double> out(static_cast<std::size_t>(log_d.rows()));
        for (Index i = 0; i < log_d.rows(); ++i) out[static_cast<std::size_t>(i)] = std::exp(static_cast<double>(log_d(i, 0)));
        return out;
    }

    /// Integer durations used to drive synthesis.
    std::vector<int> predict(const std::vector<int>& phoneme_ids) {
        std::vector<int> out;
        for (double f : predict_frames(phoneme_ids)) out.push_back(emit_duration(f));
        return out;
    }

private:
    DurationConfig config_;
    ParameterStore<S> params_;
};

}  // namespace mss::model
