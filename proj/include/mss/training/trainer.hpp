#pragma once

#include "mss/core/error.hpp"
#include "mss/model/acoustic.hpp"
#include "mss/model/checkpoint.hpp"
#include "mss/model/duration.hpp"
#include "mss/model/loss.hpp"
#include "mss/training/adam.hpp"
#include "mss/training/config.hpp"
#include "mss/training/dataset.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mss::training {

/// One line of the training log.
struct LogRecord {
    long long step = 0;
    std::map<std::string, double> losses;  ///< "L3".."L0" for acoustic, "duration" for duration
    double total = 0.0;
    double wall_ms = 0.0;

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j;
        j["step"] = step;
        j["losses"] = nlohmann::json::object();
        for (const auto& [k, v] : losses) j["losses"][k] = v;
        j["total"] = total;
        j["wall_ms"] = wall_ms;
        return j;
    }

    static LogRecord from_json(const nlohmann::json& j) {
        LogRecord r;
        r.step = j.at("step").get<long long>();
        for (const auto& [k, v] : j.at("losses").items()) r.losses[k] = v.get<double>();
        r.total = j.at("total").get<double>();
        r.wall_ms = j.at("wall_ms").get<double>();
        return r;
    }
};

inline std::string scale_key(int level) { return "L" + std::to_string(level); }

inline std::vector<LogRecord> read_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open log " + path.string());
    std::vector<LogRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(LogRecord::from_json(nlohmann::json::parse(line)));
    }
    return out;
}

/// Step loop shared by both trainers: batch accumulation, clipping, Adam, logging and
/// periodic checkpoints. `accumulate` runs forward+backward for one example, adds its
/// gradients into the store and returns the per-term losses and total.
template <typename S>
class StepLoop {
public:
    using Accumulate = std::function<std::pair<std::map<std::string, double>, double>(std::size_t example)>;
    using Save = std::function<void()>;

    StepLoop(ad::ParameterStore<S>& params, AdamConfig adam, std::size_t examples, std::uint64_t seed, int batch,
             double clip)
        : params_(params), adam_(adam), sampler_(examples, seed), batch_(batch), clip_(clip) {}

    LogRecord step(const Accumulate& accumulate) {
        params_.zero_grad();
        LogRecord rec;
        rec.step = step_;
        for (int b = 0; b < batch_; ++b) {
            const auto [terms, total] = accumulate(sampler_.next());
            if (!std::isfinite(total)) throw NumericalError("non-finite loss at step " + std::to_string(step_));
            for (const auto& [k, v] : terms) rec.losses[k] += v;
            rec.total += total;
        }
        if (batch_ > 1) {
            const S inv = S(1) / S(batch_);
            params_.for_each([&](ad::Parameter<S>& p) { p.grad *= inv; });
            for (auto& [k, v] : rec.losses) v /= batch_;
            rec.total /= batch_;
        }
        if (clip_ > 0.0) clip_gradients(params_, clip_);
        adam_.step(params_);
        ++step_;
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
        return rec;
    }

    /// Runs `steps` steps. On NumericalError the last good parameters are saved before rethrowing.
    std::vector<LogRecord> run(long long steps, const Accumulate& accumulate, std::ostream* log, long long every,
                               const Save& save, const std::function<void(const LogRecord&)>& on_step = {}) {
        std::vector<LogRecord> out;
        for (long long i = 0; i < steps; ++i) {
            LogRecord rec;
            try {
                rec = step(accumulate);
            } catch (const NumericalError&) {
                if (save) save();
                throw;
            }
            if (log != nullptr) *log << rec.to_json().dump() << '\n' << std::flush;
            if (on_step) on_step(rec);
            out.push_back(std::move(rec));
            if (save && every > 0 && step_ % every == 0) save();
        }
        if (save) save();
        return out;
    }

    [[nodiscard]] long long steps_taken() const { return step_; }

private:
    ad::ParameterStore<S>& params_;
    Adam<S> adam_;
    ExampleSampler sampler_;
    int batch_;
    double clip_;
    long long step_ = 0;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Teacher-forced training of the acoustic model with oracle alignments.
template <typename S>
class AcousticTrainer {
public:
    AcousticTrainer(const TrainConfig& config, const std::vector<Example>& examples)
        : config_(config), examples_(examples), model_(config.acoustic) {
        if (examples_.empty()) throw DataError("no training examples");
        for (const auto& ex : examples_) {
            if (ex.mel.cols() != config_.acoustic.n_mels) {
                throw DataError("example '" + ex.id + "' has " + std::to_string(ex.mel.cols()) + " bands, model expects " +
                                std::to_string(config_.acoustic.n_mels));
            }
            hierarchies_.push_back(ex.hierarchy(config_.mode));
            targets_.push_back(ex.mel.template cast<S>());
        }
        const auto [mean, sd] = frame_statistics(examples_);
        model_.set_normalization(mean.template cast<S>(), sd.template cast<S>());
        loop_.emplace(model_.params(), config_.acoustic_adam(), examples_.size(), config_.seed, config_.batch_size,
                      config_.clip_norm);
    }

    model::AcousticModel<S>& model() { return model_; }

    /// Per-scale losses of one example under the current parameters, without updating.
    model::LossTerms<S> evaluate(ad::Tape<S>& tape, std::size_t i) {
        const auto preds = model_.forward(tape, examples_[i].input(), &targets_[i]);
        return model::mss_loss(tape, preds, hierarchies_[i], config_.acoustic.loss);
    }

    LogRecord step() { return loop_->step(accumulator()); }

    std::vector<LogRecord> run(long long steps, std::ostream* log = nullptr,
                               const std::optional<std::filesystem::path>& checkpoint = std::nullopt,
                               const std::function<void(const LogRecord&)>& on_step = {}) {
        typename StepLoop<S>::Save save;
        if (checkpoint) save = [&] { model::save_checkpoint(*checkpoint, model::to_checkpoint(model_)); };
        return loop_->run(steps, accumulator(), log, config_.checkpoint_every, save, on_step);
    }

private:
    typename StepLoop<S>::Accumulate accumulator() {
        return [this](std::size_t i) {
            ad::Tape<S> tape;
            const auto terms = evaluate(tape, i);
            std::map<std::string, double> values;
            for (const auto& [l, v] : terms.values()) values[scale_key(l)] = v;
            const double total = static_cast<double>(terms.total.value()(0, 0));
            if (std::isfinite(total)) tape.backward(terms.total);
            return std::make_pair(values, total);
        };
    }

    TrainConfig config_;
    const std::vector<Example>& examples_;
    model::AcousticModel<S> model_;
    std::vector<multiscale::ScaleHierarchy> hierarchies_;
    std::vector<ad::Mat<S>> targets_;
    std::optional<StepLoop<S>> loop_;
};

/// Separate training of the duration model in the log-frame domain.
template <typename S>
class DurationTrainer {
public:
    DurationTrainer(const TrainConfig& config, const std::vector<Example>& examples)
        : config_(config), examples_(examples), model_(config.duration) {
        if (examples_.empty()) throw DataError("no training examples");
        loop_.emplace(model_.params(), config_.duration_adam(), examples_.size(), config_.seed + 1, config_.batch_size,
                      config_.clip_norm);
    }

    model::DurationModel<S>& model() { return model_; }

    LogRecord step() { return loop_->step(accumulator()); }

    std::vector<LogRecord> run(long long steps, std::ostream* log = nullptr,
                               const std::optional<std::filesystem::path>& checkpoint = std::nullopt,
                               const std::function<void(const LogRecord&)>& on_step = {}) {
        typename StepLoop<S>::Save save;
        if (checkpoint) save = [&] { model::save_checkpoint(*checkpoint, model::to_checkpoint(model_)); };
        return loop_->run(steps, accumulator(), log, config_.checkpoint_every, save, on_step);
    }

private:
    typename StepLoop<S>::Accumulate accumulator() {
        return [this](std::size_t i) {
            ad::Tape<S> tape;
            const auto& ex = examples_[i];
            const auto loss = model_.loss(tape, ex.utt.phoneme_ids, ex.durations.durations);
            const double v = static_cast<double>(loss.value()(0, 0));
            if (std::isfinite(v)) tape.backward(loss);
            return std::make_pair(std::map<std::string, double>{{"duration", v}}, v);
        };
    }

    TrainConfig config_;
    const std::vector<Example>& examples_;
    model::DurationModel<S> model_;
    std::optional<StepLoop<S>> loop_;
};

/// Mean squared error in frames between exponentiated predictions and true durations.
template <typename S>
double duration_mse_frames(model::DurationModel<S>& m, const std::vector<Example>& examples) {
    double sq = 0.0;
    double n = 0.0;
    for (const auto& ex : examples) {
        const auto pred = m.predict_frames(ex.utt.phoneme_ids);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double d = pred[i] - ex.durations.durations[i];
            sq += d * d;
            n += 1.0;
        }
    }
    return sq / n;
}

struct TrainOutputs {
    std::filesystem::path acoustic_checkpoint;
    std::filesystem::path duration_checkpoint;
    std::filesystem::path acoustic_log;
    std::filesystem::path duration_log;
    std::size_t examples = 0;
};

/// Both stages of the training protocol, writing checkpoints and logs under out_dir.
inline TrainOutputs run_training(const TrainConfig& config, const linguistic::Lexicon& lexicon,
                                 const std::function<void(const std::string&, const LogRecord&)>& on_step = {}) {
    config.validate();
    const auto examples = load_examples(load_manifest(config.manifest), lexicon);
    std::filesystem::create_directories(config.out_dir);
    TrainOutputs out;
    out.examples = examples.size();
    if (config.train_acoustic) {
        out.acoustic_checkpoint = config.out_dir / "acoustic.ckpt";
        out.acoustic_log = config.out_dir / "acoustic_log.ndjson";
        std::ofstream log(out.acoustic_log);
        AcousticTrainer<double> trainer(config, examples);
        trainer.run(config.acoustic_steps, &log, out.acoustic_checkpoint, [&](const LogRecord& r) {
            if (on_step) on_step("acoustic", r);
        });
    }
    if (config.train_duration) {
        out.duration_checkpoint = config.out_dir / "duration.ckpt";
        out.duration_log = config.out_dir / "duration_log.ndjson";
        std::ofstream log(out.duration_log);
        DurationTrainer<double> trainer(config, examples);
        trainer.run(config.duration_steps, &log, out.duration_checkpoint, [&](const LogRecord& r) {
            if (on_step) on_step("duration", r);
        });
    }
    return out;
}

}  // namespace mss::training
