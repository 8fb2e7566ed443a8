#pragma once

#include "mss/core/error.hpp"
#include "mss/dsp/audio.hpp"
#include "mss/dsp/mel.hpp"
#include "mss/linguistic/durations.hpp"
#include "mss/linguistic/front_end.hpp"
#include "mss/linguistic/lexicon.hpp"
#include "mss/linguistic/phone_set.hpp"
#include "mss/training/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace mss::pipeline {

struct SyntheticOptions {
    int count = 10;
    std::uint64_t seed = 1;
    double min_seconds = 2.0;
    double max_seconds = 8.0;
    int sample_rate = dsp::kDefaultSampleRate;
    double frame_shift_ms = 12.5;
};

struct SyntheticUtterance {
    std::string id;
    std::string text;
    linguistic::Utterance utt;
    linguistic::DurationVector durations;
    dsp::AudioClip audio;
};

namespace detail {

inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

/// Spectral template of one phoneme: fundamental, harmonic decay and a formant-like bump.
struct Template {
    double f0 = 0.0;
    double decay = 0.0;
    double formant = 0.0;
    double gain = 0.0;
};

inline Template template_for(const std::string& symbol) {
    if (symbol == linguistic::kSilence || symbol == linguistic::kWordBoundary) return {};
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : symbol) h = (h ^ c) * 1099511628211ULL;
    Template t;
    t.f0 = 90.0 + static_cast<double>(h % 140);
    t.decay = 0.15 + 0.05 * static_cast<double>((h >> 8) % 8);
    t.formant = 400.0 + 150.0 * static_cast<double>((h >> 16) % 16);
    t.gain = 0.5 + 0.1 * static_cast<double>((h >> 24) % 6);
    return t;
}

inline int base_duration(const std::string& symbol, std::mt19937_64& rng) {
    if (symbol == linguistic::kSilence) return uniform_int(rng, 10, 20);
    if (symbol == linguistic::kWordBoundary) return uniform_int(rng, 1, 2);
    std::uint64_t h = 0;
    for (unsigned char c : symbol) h = h * 31 + c;
    return 4 + static_cast<int>(h % 6) + uniform_int(rng, -1, 2);
}

}  // namespace detail

/// Renders a phoneme sequence with per-phoneme harmonic templates; exactly d * hop samples
/// per phoneme so the extracted spectrogram has sum(d) frames.
inline dsp::AudioClip render(const linguistic::Utterance& utt, const linguistic::DurationVector& d, int sample_rate,
                             double frame_shift_ms, std::uint64_t seed) {
    const int hop = static_cast<int>(std::lround(frame_shift_ms * sample_rate / 1000.0));
    std::mt19937_64 rng(seed);
    dsp::AudioClip clip;
    clip.sample_rate = sample_rate;
    clip.samples.reserve(static_cast<std::size_t>(d.total_frames) * static_cast<std::size_t>(hop));
    constexpr int kHarmonics = 12;
    std::vector<double> phase(kHarmonics, 0.0);
    const double nyquist = sample_rate / 2.0;
    for (std::size_t p = 0; p < d.durations.size(); ++p) {
        const auto tpl = detail::template_for(utt.phonemes[p]);
        const int n = d.durations[p] * hop;
        for (int i = 0; i < n; ++i) {
            double s = 1e-3 * (2.0 * detail::unit(rng) - 1.0);
            if (tpl.gain > 0.0) {
                for (int k = 1; k <= kHarmonics; ++k) {
                    const double f = tpl.f0 * k;
                    if (f >= nyquist) break;
                    const double bump = std::exp(-std::pow((f - tpl.formant) / 300.0, 2.0));
                    const double amp = tpl.gain * (std::exp(-tpl.decay * k) + 0.6 * bump) / kHarmonics;
                    auto& ph = phase[static_cast<std::size_t>(k - 1)];
                    ph += 2.0 * std::numbers::pi * f / sample_rate;
                    if (ph > 2.0 * std::numbers::pi) ph -= 2.0 * std::numbers::pi;
                    s += amp * std::sin(ph);
                }
            }
            clip.samples.push_back(std::clamp(s, -1.0, 1.0));
        }
    }
    return clip;
}

/// Deterministic pseudo-utterances built from lexicon words, lengths in [min, max] seconds.
inline std::vector<SyntheticUtterance> generate_corpus(const SyntheticOptions& opt, const linguistic::Lexicon& lexicon) {
    if (opt.count < 1) throw InvalidInput("synthetic corpus needs at least one utterance");
    if (!(opt.min_seconds > 0.0) || opt.max_seconds < opt.min_seconds) throw InvalidInput("bad utterance length range");
    std::vector<std::string> words;
    for (const auto& [w, phones] : lexicon.entries()) {
        if (w.find('\'') == std::string::npos) words.push_back(w);
    }
    if (words.empty()) throw InvalidInput("lexicon has no usable words");
    const double frames_per_second = 1000.0 / opt.frame_shift_ms;

    std::mt19937_64 rng(opt.seed);
    std::vector<SyntheticUtterance> out;
    for (int u = 0; u < opt.count; ++u) {
        const double seconds = opt.min_seconds + (opt.max_seconds - opt.min_seconds) * detail::unit(rng);
        const int target = static_cast<int>(seconds * frames_per_second);
        std::vector<std::string> chosen;
        SyntheticUtterance s;
        std::vector<int> d;
        // Add words until the rendered length reaches the target.
        while (true) {
            chosen.push_back(words[static_cast<std::size_t>(rng() % words.size())]);
            std::string text;
            for (std::size_t i = 0; i < chosen.size(); ++i) text += (i ? " " : "") + chosen[i];
            text += ".";
            text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
            auto utt = linguistic::front_end(text, lexicon);
            std::mt19937_64 drng(opt.seed * 1000003ULL + static_cast<std::uint64_t>(u));
            std::vector<int> dd;
            for (const auto& ph : utt.phonemes) dd.push_back(std::max(1, detail::base_duration(ph, drng)));
            const int total = std::accumulate(dd.begin(), dd.end(), 0);
            s.text = text;
            s.utt = std::move(utt);
            d = std::move(dd);
            if (total >= target) break;
        }
        char id[32];
        std::snprintf(id, sizeof id, "syn%04d", u);
        s.id = id;
        s.durations = linguistic::DurationVector(d);
        s.audio = render(s.utt, s.durations, opt.sample_rate, opt.frame_shift_ms, opt.seed + 7919ULL * (u + 1));
        out.push_back(std::move(s));
    }
    return out;
}

/// Writes <id>.wav, <id>.dur and manifest.jsonl (without mel paths) into dir.
inline std::vector<training::ManifestRecord> write_corpus(const std::filesystem::path& dir,
                                                          const std::vector<SyntheticUtterance>& corpus) {
    std::filesystem::create_directories(dir);
    std::vector<training::ManifestRecord> records;
    for (const auto& s : corpus) {
        training::ManifestRecord r;
        r.id = s.id;
        r.text = s.text;
        r.wav = s.id + ".wav";
        r.durations = s.id + ".dur";
        dsp::write_wav(dir / r.wav, s.audio);
        linguistic::save_durations(dir / r.durations, s.durations);
        records.push_back(std::move(r));
    }
    training::save_manifest(dir / "manifest.jsonl", records);
    return records;
}

}  // namespace mss::pipeline
