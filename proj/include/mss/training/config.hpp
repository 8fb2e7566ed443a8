#pragma once

#include "mss/core/error.hpp"
#include "mss/core/kv_config.hpp"
#include "mss/model/config.hpp"
#include "mss/training/adam.hpp"

#include <filesystem>
#include <set>
#include <string>

namespace mss::training {

/// Everything `train` reads from its config file. Model architecture lives under the
/// `model.` and `duration.` prefixes (or `[model]` / `[duration]` sections).
struct TrainConfig {
    model::Mode mode = model::Mode::word_mss;
    unsigned long long seed = 1;
    std::filesystem::path manifest;
    std::filesystem::path out_dir = "run";
    std::filesystem::path lexicon;  ///< empty: the shipped lexicon
    long long acoustic_steps = 500;
    long long duration_steps = 500;
    double acoustic_lr = 1e-3;
    double duration_lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 1;
    double clip_norm = 0.0;  ///< 0 disables clipping
    long long checkpoint_every = 0;
    bool train_acoustic = true;
    bool train_duration = true;
    model::AcousticConfig acoustic;
    model::DurationConfig duration;

    [[nodiscard]] AdamConfig acoustic_adam() const { return {acoustic_lr, beta1, beta2, eps}; }
    [[nodiscard]] AdamConfig duration_adam() const { return {duration_lr, beta1, beta2, eps}; }

    void validate() const {
        if (!(acoustic_lr > 0.0) || !(duration_lr > 0.0)) throw InvalidInput("learning rates must be positive");
        if (batch_size < 1) throw InvalidInput("batch_size must be >= 1");
        if (acoustic_steps < 0 || duration_steps < 0) throw InvalidInput("step counts must be >= 0");
        if (clip_norm < 0.0) throw InvalidInput("clip_norm must be >= 0");
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) throw InvalidInput("betas must lie in [0, 1)");
        if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
        if (acoustic.mode != mode) throw InvalidInput("model.mode disagrees with mode");
        acoustic.validate();
        duration.validate();
    }

    /// Relative paths are resolved against `base` (the config file's directory).
    static TrainConfig from_config(const KeyValueConfig& kv, const std::filesystem::path& base = {}) {
        reject_unknown_keys(kv);
        TrainConfig c;
        c.mode = model::mode_from_string(kv.get("mode", std::string(model::to_string(c.mode))));
        c.seed = static_cast<unsigned long long>(kv.get("seed", static_cast<long long>(c.seed)));
        auto path = [&](const char* key, const std::filesystem::path& fallback) -> std::filesystem::path {
            if (!kv.has(key)) return fallback;
            std::filesystem::path p = kv.get(key, std::string());
            return p.is_relative() && !base.empty() ? base / p : p;
        };
        c.manifest = path("manifest", c.manifest);
        c.out_dir = path("out_dir", base.empty() ? c.out_dir : base / c.out_dir);
        c.lexicon = path("lexicon", c.lexicon);
        c.acoustic_steps = kv.get("acoustic_steps", c.acoustic_steps);
        c.duration_steps = kv.get("duration_steps", c.duration_steps);
        c.acoustic_lr = kv.get("acoustic_lr", c.acoustic_lr);
        c.duration_lr = kv.get("duration_lr", c.duration_lr);
        c.beta1 = kv.get("beta1", c.beta1);
        c.beta2 = kv.get("beta2", c.beta2);
        c.eps = kv.get("eps", c.eps);
        c.batch_size = kv.get("batch_size", c.batch_size);
        c.clip_norm = kv.get("clip_norm", c.clip_norm);
        c.checkpoint_every = kv.get("checkpoint_every", c.checkpoint_every);
        c.train_acoustic = kv.get("train_acoustic", c.train_acoustic);
        c.train_duration = kv.get("train_duration", c.train_duration);

        KeyValueConfig model_kv = kv;
        if (!model_kv.has("model.mode")) model_kv.set("model.mode", std::string(model::to_string(c.mode)));
        if (!model_kv.has("model.seed")) model_kv.set("model.seed", std::to_string(c.seed));
        c.acoustic = model::AcousticConfig::from_config(model_kv, "model.");
        if (!model_kv.has("duration.seed")) model_kv.set("duration.seed", std::to_string(c.seed + 1));
        c.duration = model::DurationConfig::from_config(model_kv, "duration.");
        c.validate();
        return c;
    }

    static TrainConfig load(const std::filesystem::path& file) {
        return from_config(KeyValueConfig::load(file), file.parent_path());
    }

private:
    static void reject_unknown_keys(const KeyValueConfig& kv) {
        static const std::set<std::string> top{
            "mode",      "seed",      "manifest",   "out_dir",    "lexicon",   "acoustic_steps",   "duration_steps",
            "acoustic_lr", "duration_lr", "beta1",  "beta2",      "eps",       "batch_size",       "clip_norm",
            "checkpoint_every", "train_acoustic", "train_duration"};
        static const std::set<std::string> model_keys{
            "kind", "mode", "vocab_size", "n_mels", "embed_dim", "encoder_conv_layers", "encoder_kernel",
            "encoder_residual", "encoder_hidden", "scale_layers", "scale_width", "sentence_kernel", "word_kernel",
            "phoneme_kernel", "word_projection", "prenet_dim", "decoder_hidden", "loss", "seed"};
        static const std::set<std::string> duration_keys{"kind",   "vocab_size", "embed_dim", "conv_layers",
                                                         "kernel", "hidden",     "seed"};
        for (const auto& [key, value] : kv.values()) {
            (void)value;
            if (top.count(key)) continue;
            if (key.rfind("model.", 0) == 0 && model_keys.count(key.substr(6))) continue;
            if (key.rfind("duration.", 0) == 0 && duration_keys.count(key.substr(9))) continue;
            throw InvalidInput("unknown config key '" + key + "'");
        }
    }
};

}  // namespace mss::training
