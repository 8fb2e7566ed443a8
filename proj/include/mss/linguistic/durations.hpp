#pragma once

#include "mss/core/error.hpp"
#include "mss/linguistic/front_end.hpp"

#include <json.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace mss::linguistic {

/// Per-phoneme durations in frames; every entry >= 1 and total_frames = sum.
struct DurationVector {
    std::vector<int> durations;
    int total_frames = 0;

    DurationVector() = default;
    explicit DurationVector(std::vector<int> d) : durations(std::move(d)) {
        for (int v : durations) {
            if (v < 1) throw InvalidDuration("duration " + std::to_string(v) + " is not positive");
        }
        if (durations.empty()) throw InvalidInput("empty duration vector");
        total_frames = std::accumulate(durations.begin(), durations.end(), 0);
    }

    [[nodiscard]] std::size_t size() const { return durations.size(); }
    bool operator==(const DurationVector&) const = default;
};

/// Accepts either a JSON array of integers or one integer per line.
inline std::vector<long long> parse_duration_text(const std::string& text) {
    std::size_t first = 0;
    while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
    std::vector<long long> values;
    if (first < text.size() && text[first] == '[') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw InvalidInput(std::string("malformed duration JSON: ") + e.what());
        }
        for (const auto& v : j) {
            if (!v.is_number_integer()) throw InvalidInput("duration JSON must hold integers");
            values.push_back(v.get<long long>());
        }
        return values;
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        long long v = 0;
        if (!(ls >> v)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw InvalidInput("malformed duration line: '" + line + "'");
        }
        std::string rest;
        if (ls >> rest) throw InvalidInput("malformed duration line: '" + line + "'");
        values.push_back(v);
    }
    return values;
}

inline DurationVector durations_for(const std::vector<long long>& values, const Utterance& utt) {
    if (values.size() != static_cast<std::size_t>(utt.num_phonemes())) {
        throw AlignmentMismatch("duration count " + std::to_string(values.size()) + " does not match " +
                                std::to_string(utt.num_phonemes()) + " phonemes");
    }
    std::vector<int> d;
    for (long long v : values) {
        if (v < 1) throw InvalidDuration("duration " + std::to_string(v) + " is not positive");
        d.push_back(static_cast<int>(v));
    }
    return DurationVector(std::move(d));
}

inline DurationVector load_durations(const std::filesystem::path& path, const Utterance& utt) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open duration file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return durations_for(parse_duration_text(ss.str()), utt);
}

inline void save_durations(const std::filesystem::path& path, const DurationVector& d) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    for (int v : d.durations) out << v << '\n';
}

/// Frames per word-level unit: sum of the durations of that unit's phonemes.
inline std::vector<int> word_durations(const Utterance& utt, const DurationVector& d) {
    if (d.size() != static_cast<std::size_t>(utt.num_phonemes())) {
        throw AlignmentMismatch("duration vector length differs from phoneme count");
    }
    std::vector<int> words(static_cast<std::size_t>(utt.num_words()), 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        words[static_cast<std::size_t>(utt.phoneme_word_index[i])] += d.durations[i];
    }
    return words;
}

/// One sentence per utterance, so this is always {T}.
inline std::vector<int> sentence_duration(const DurationVector& d) { return {d.total_frames}; }

}  // namespace mss::linguistic
