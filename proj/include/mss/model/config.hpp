#pragma once

#include "mss/core/error.hpp"
#include "mss/core/kv_config.hpp"
#include "mss/linguistic/phone_set.hpp"
#include "mss/multiscale/hierarchy.hpp"

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace mss::model {

enum class Mode { baseline, word_mss, sentence_mss };

inline std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::baseline: return "baseline";
        case Mode::word_mss: return "word-mss";
        case Mode::sentence_mss: return "sentence-mss";
    }
    return "baseline";
}

inline Mode mode_from_string(std::string_view s) {
    if (s == "baseline") return Mode::baseline;
    if (s == "word-mss" || s == "word_mss") return Mode::word_mss;
    if (s == "sentence-mss" || s == "sentence_mss") return Mode::sentence_mss;
    throw InvalidInput("unknown mode '" + std::string(s) + "' (expected baseline, word-mss or sentence-mss)");
}

/// Scale levels predicted in a mode, coarsest first.
inline std::vector<int> levels_for(Mode m) {
    switch (m) {
        case Mode::baseline: return {0};
        case Mode::word_mss: return {2, 1, 0};
        case Mode::sentence_mss: return {3, 2, 1, 0};
    }
    return {0};
}

/// Target hierarchy needed to train a mode. Baseline only reads level 0.
inline multiscale::HierarchyMode hierarchy_mode_for(Mode m) {
    return m == Mode::sentence_mss ? multiscale::HierarchyMode::sentence_mss : multiscale::HierarchyMode::word_mss;
}

enum class LossConvention { mse, sum, norm };

inline std::string_view to_string(LossConvention c) {
    switch (c) {
        case LossConvention::mse: return "mse";
        case LossConvention::sum: return "sum";
        case LossConvention::norm: return "norm";
    }
    return "mse";
}

inline LossConvention loss_convention_from_string(std::string_view s) {
    if (s == "mse") return LossConvention::mse;
    if (s == "sum") return LossConvention::sum;
    if (s == "norm") return LossConvention::norm;
    throw InvalidInput("unknown loss convention '" + std::string(s) + "'");
}

enum class WordProjection { mean, last };

struct AcousticConfig {
    Mode mode = Mode::word_mss;
    int vocab_size = linguistic::PhoneSet::standard().size();
    int n_mels = 80;
    int embed_dim = 64;
    int encoder_conv_layers = 2;
    int encoder_kernel = 5;
    bool encoder_residual = true;
    int encoder_hidden = 64;  ///< per direction
    int scale_layers = 2;
    int scale_width = 128;
    int sentence_kernel = 1;
    int word_kernel = 1;
    int phoneme_kernel = 3;
    WordProjection word_projection = WordProjection::mean;
    int prenet_dim = 32;
    int decoder_hidden = 128;
    LossConvention loss = LossConvention::mse;
    unsigned long long seed = 1;

    void validate() const {
        for (int v : {vocab_size, n_mels, embed_dim, encoder_kernel, encoder_hidden, scale_layers, scale_width,
                      sentence_kernel, word_kernel, phoneme_kernel, prenet_dim, decoder_hidden}) {
            if (v < 1) throw InvalidInput("model dimensions must be >= 1");
        }
        if (encoder_conv_layers < 0) throw InvalidInput("encoder_conv_layers must be >= 0");
        for (int k : {encoder_kernel, sentence_kernel, word_kernel, phoneme_kernel}) {
            if (k % 2 == 0) throw InvalidInput("convolution kernels must be odd");
        }
    }

    /// Canonical text; its digest identifies the architecture in checkpoints.
    [[nodiscard]] std::string to_text() const {
        std::ostringstream o;
        o << "kind = acoustic\n"
          << "mode = " << to_string(mode) << "\n"
          << "vocab_size = " << vocab_size << "\n"
          << "n_mels = " << n_mels << "\n"
          << "embed_dim = " << embed_dim << "\n"
          << "encoder_conv_layers = " << encoder_conv_layers << "\n"
          << "encoder_kernel = " << encoder_kernel << "\n"
          << "encoder_residual = " << (encoder_residual ? "true" : "false") << "\n"
          << "encoder_hidden = " << encoder_hidden << "\n"
          << "scale_layers = " << scale_layers << "\n"
          << "scale_width = " << scale_width << "\n"
          << "sentence_kernel = " << sentence_kernel << "\n"
          << "word_kernel = " << word_kernel << "\n"
          << "phoneme_kernel = " << phoneme_kernel << "\n"
          << "word_projection = " << (word_projection == WordProjection::mean ? "mean" : "last") << "\n"
          << "prenet_dim = " << prenet_dim << "\n"
          << "decoder_hidden = " << decoder_hidden << "\n"
          << "loss = " << to_string(loss) << "\n"
          << "seed = " << seed << "\n";
        return o.str();
    }

    /// Reads keys with an optional prefix ("model." in training configs).
    static AcousticConfig from_config(const KeyValueConfig& kv, const std::string& prefix = "") {
        AcousticConfig c;
        auto key = [&](const char* k) { return prefix + k; };
        if (kv.has(key("kind")) && kv.get(key("kind"), std::string()) != "acoustic") {
            throw CheckpointMismatch("config describes a " + kv.get(key("kind"), std::string()) + " model, not acoustic");
        }
        c.mode = mode_from_string(kv.get(key("mode"), std::string(to_string(c.mode))));
        c.vocab_size = kv.get(key("vocab_size"), c.vocab_size);
        c.n_mels = kv.get(key("n_mels"), c.n_mels);
        c.embed_dim = kv.get(key("embed_dim"), c.embed_dim);
        c.encoder_conv_layers = kv.get(key("encoder_conv_layers"), c.encoder_conv_layers);
        c.encoder_kernel = kv.get(key("encoder_kernel"), c.encoder_kernel);
        c.encoder_residual = kv.get(key("encoder_residual"), c.encoder_residual);
        c.encoder_hidden = kv.get(key("encoder_hidden"), c.encoder_hidden);
        c.scale_layers = kv.get(key("scale_layers"), c.scale_layers);
        c.scale_width = kv.get(key("scale_width"), c.scale_width);
        c.sentence_kernel = kv.get(key("sentence_kernel"), c.sentence_kernel);
        c.word_kernel = kv.get(key("word_kernel"), c.word_kernel);
        c.phoneme_kernel = kv.get(key("phoneme_kernel"), c.phoneme_kernel);
        const auto proj = kv.get(key("word_projection"), std::string("mean"));
        if (proj != "mean" && proj != "last") throw InvalidInput("word_projection must be mean or last");
        c.word_projection = proj == "mean" ? WordProjection::mean : WordProjection::last;
        c.prenet_dim = kv.get(key("prenet_dim"), c.prenet_dim);
        c.decoder_hidden = kv.get(key("decoder_hidden"), c.decoder_hidden);
        c.loss = loss_convention_from_string(kv.get(key("loss"), std::string(to_string(c.loss))));
        c.seed = static_cast<unsigned long long>(kv.get(key("seed"), static_cast<long long>(c.seed)));
        c.validate();
        return c;
    }
};

struct DurationConfig {
    int vocab_size = linguistic::PhoneSet::standard().size();
    int embed_dim = 32;
    int conv_layers = 2;
    int kernel = 3;
    int hidden = 32;  ///< per direction
    unsigned long long seed = 2;

    void validate() const {
        if (vocab_size < 1 || embed_dim < 1 || hidden < 1 || kernel < 1 || conv_layers < 0 || kernel % 2 == 0) {
            throw InvalidInput("invalid duration model dimensions");
        }
    }

    [[nodiscard]] std::string to_text() const {
        std::ostringstream o;
        o << "kind = duration\n"
          << "vocab_size = " << vocab_size << "\n"
          << "embed_dim = " << embed_dim << "\n"
          << "conv_layers = " << conv_layers << "\n"
          << "kernel = " << kernel << "\n"
          << "hidden = " << hidden << "\n"
          << "seed = " << seed << "\n";
        return o.str();
    }

    static DurationConfig from_config(const KeyValueConfig& kv, const std::string& prefix = "") {
        DurationConfig c;
        auto key = [&](const char* k) { return prefix + k; };
        if (kv.has(key("kind")) && kv.get(key("kind"), std::string()) != "duration") {
            throw CheckpointMismatch("config describes a " + kv.get(key("kind"), std::string()) + " model, not duration");
        }
        c.vocab_size = kv.get(key("vocab_size"), c.vocab_size);
        c.embed_dim = kv.get(key("embed_dim"), c.embed_dim);
        c.conv_layers = kv.get(key("conv_layers"), c.conv_layers);
        c.kernel = kv.get(key("kernel"), c.kernel);
        c.hidden = kv.get(key("hidden"), c.hidden);
        c.seed = static_cast<unsigned long long>(kv.get(key("seed"), static_cast<long long>(c.seed)));
        c.validate();
        return c;
    }
};

}  // namespace mss::model
