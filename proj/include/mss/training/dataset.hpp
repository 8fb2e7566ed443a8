#pragma once

#include "mss/core/error.hpp"
#include "mss/dsp/audio.hpp"
#include "mss/dsp/mel.hpp"
#include "mss/dsp/melspec_io.hpp"
#include "mss/linguistic/durations.hpp"
#include "mss/linguistic/front_end.hpp"
#include "mss/linguistic/lexicon.hpp"
#include "mss/model/acoustic.hpp"
#include "mss/multiscale/hierarchy.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace mss::training {

/// One manifest line. Paths are stored as written; resolve() makes them absolute.
struct ManifestRecord {
    std::string id;
    std::string text;
    std::filesystem::path wav;
    std::filesystem::path mel;
    std::filesystem::path durations;
};

inline nlohmann::json to_json(const ManifestRecord& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["text"] = r.text;
    if (!r.wav.empty()) j["wav"] = r.wav.generic_string();
    if (!r.mel.empty()) j["mel"] = r.mel.generic_string();
    if (!r.durations.empty()) j["durations"] = r.durations.generic_string();
    return j;
}

/// Newline-delimited JSON; relative paths are taken relative to the manifest's directory.
inline std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    const auto base = path.parent_path();
    auto resolve = [&](const nlohmann::json& j, const char* key) -> std::filesystem::path {
        if (!j.contains(key) || j[key].is_null()) return {};
        std::filesystem::path p = j[key].get<std::string>();
        return p.is_relative() ? base / p : p;
    };
    std::vector<ManifestRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            ManifestRecord r;
            r.id = j.at("id").get<std::string>();
            r.text = j.at("text").get<std::string>();
            r.wav = resolve(j, "wav");
            r.mel = resolve(j, "mel");
            r.durations = resolve(j, "durations");
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.empty()) throw DataError("manifest " + path.string() + " has no records");
    return out;
}

inline void save_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

/// A validated training utterance with oracle durations and frame targets.
struct Example {
    std::string id;
    linguistic::Utterance utt;
    linguistic::DurationVector durations;
    Matrix mel;

    [[nodiscard]] model::AcousticInput input() const { return model::AcousticInput::from(utt, durations); }
    [[nodiscard]] multiscale::ScaleHierarchy hierarchy(model::Mode mode) const {
        return multiscale::build_hierarchy(mel, utt, durations, model::hierarchy_mode_for(mode));
    }
};

/// Loads and cross-checks every record. Any failure is reported as DataError naming the record.
inline std::vector<Example> load_examples(const std::vector<ManifestRecord>& records, const linguistic::Lexicon& lexicon,
                                          const dsp::MelConfig& mel_config = {}) {
    std::vector<Example> out;
    for (const auto& r : records) {
        try {
            Example ex;
            ex.id = r.id;
            ex.utt = linguistic::front_end(r.text, lexicon);
            if (r.durations.empty()) throw DataError("record has no durations");
            ex.durations = linguistic::load_durations(r.durations, ex.utt);
            if (!r.mel.empty()) {
                ex.mel = dsp::load_melspec(r.mel).frames;
            } else if (!r.wav.empty()) {
                ex.mel = dsp::extract_mel(dsp::read_wav(r.wav), mel_config).frames;
            } else {
                throw DataError("record has neither mel nor wav");
            }
            if (ex.durations.total_frames != ex.mel.rows()) {
                throw AlignmentMismatch("durations sum to " + std::to_string(ex.durations.total_frames) +
                                        " frames but the mel has " + std::to_string(ex.mel.rows()));
            }
            out.push_back(std::move(ex));
        } catch (const Error& e) {
            throw DataError("record '" + r.id + "': " + e.what());
        }
    }
    return out;
}

/// Per-epoch permutation of [0, n) determined by (seed, epoch) only.
inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + epoch);
    // Fisher-Yates with raw draws so the order does not depend on distribution implementations.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

/// Deterministic stream of example indices: epochs are consumed in order, each shuffled.
class ExampleSampler {
public:
    ExampleSampler(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {
        if (n == 0) throw DataError("no training examples");
    }

    std::size_t next() {
        if (pos_ == order_.size()) {
            order_ = epoch_order(n_, seed_, epoch_++);
            pos_ = 0;
        }
        return order_[pos_++];
    }

private:
    std::size_t n_;
    std::uint64_t seed_;
    std::uint64_t epoch_ = 0;
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
};

/// Per-band mean and standard deviation over every frame of every example.
inline std::pair<Matrix, Matrix> frame_statistics(const std::vector<Example>& examples) {
    if (examples.empty()) throw DataError("no frames to normalise");
    const Index m = examples.front().mel.cols();
    Matrix sum = Matrix::Zero(1, m);
    Matrix sq = Matrix::Zero(1, m);
    double count = 0.0;
    for (const auto& ex : examples) {
        if (ex.mel.cols() != m) throw DataError("examples disagree on the number of mel bands");
        sum += ex.mel.colwise().sum();
        sq += ex.mel.array().square().matrix().colwise().sum();
        count += static_cast<double>(ex.mel.rows());
    }
    Matrix mean = sum / count;
    Matrix var = (sq / count - mean.cwiseProduct(mean)).cwiseMax(0.0);
    return {mean, var.cwiseSqrt()};
}

}  // namespace mss::training
