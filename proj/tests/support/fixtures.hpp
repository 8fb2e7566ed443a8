#pragma once

#include "mss/linguistic/durations.hpp"
#include "mss/linguistic/front_end.hpp"
#include "mss/linguistic/lexicon.hpp"
#include "mss/model/acoustic.hpp"
#include "mss/model/config.hpp"
#include "mss/multiscale/hierarchy.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mss::testing {

inline const linguistic::Lexicon& shipped_lexicon() {
    static const linguistic::Lexicon lex = linguistic::Lexicon::load(std::string(MSS_DATA_DIR) + "/lexicon.txt");
    return lex;
}

struct Sample {
    linguistic::Utterance utt;
    linguistic::DurationVector durations;
    Matrix mel;  // T x M, smooth log-mel-like values
};

/// Random durations in [1, max_dur] and a mel built from per-phoneme levels plus a slow ripple.
inline Sample make_sample(const std::string& text, unsigned seed, int n_mels = 80, int max_dur = 4) {
    std::mt19937 rng(seed);
    Sample s;
    s.utt = linguistic::front_end(text, shipped_lexicon());
    std::uniform_int_distribution<int> dur(1, max_dur);
    std::vector<int> d;
    for (int i = 0; i < s.utt.num_phonemes(); ++i) d.push_back(dur(rng));
    s.durations = linguistic::DurationVector(d);
    std::normal_distribution<double> n(0.0, 1.0);
    s.mel.resize(s.durations.total_frames, n_mels);
    Index t = 0;
    for (int p = 0; p < s.utt.num_phonemes(); ++p) {
        Matrix level(1, n_mels);
        for (int m = 0; m < n_mels; ++m) level(0, m) = -4.0 + n(rng);
        for (int k = 0; k < d[static_cast<std::size_t>(p)]; ++k, ++t) {
            for (int m = 0; m < n_mels; ++m) s.mel(t, m) = level(0, m) + 0.1 * std::sin(0.3 * static_cast<double>(t + m));
        }
    }
    return s;
}

inline multiscale::ScaleHierarchy hierarchy_for(const Sample& s, model::Mode mode) {
    return multiscale::build_hierarchy(s.mel, s.utt, s.durations, model::hierarchy_mode_for(mode));
}

/// Narrow layers so exhaustive checks stay fast; structure is identical to the defaults.
inline model::AcousticConfig small_config(model::Mode mode, int n_mels = 6) {
    model::AcousticConfig c;
    c.mode = mode;
    c.n_mels = n_mels;
    c.embed_dim = 6;
    c.encoder_hidden = 5;
    c.scale_width = 7;
    c.prenet_dim = 4;
    c.decoder_hidden = 6;
    return c;
}

}  // namespace mss::testing
