#pragma once

#include "mss/core/error.hpp"
#include "mss/model/checkpoint.hpp"
#include "mss/multiscale/hierarchy.hpp"
#include "mss/training/dataset.hpp"
#include "mss/training/trainer.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mss::pipeline {

// Objective metrics on held-out utterances. Acoustic predictions are free-running with
// oracle durations so each scale lines up with its oracle target.

struct SystemSpec {
    std::filesystem::path acoustic;
    std::filesystem::path duration;  ///< optional
};

struct SystemMetrics {
    std::string name;
    std::string mode;
    std::string acoustic;
    std::string duration;
    std::map<int, double> per_scale_mse;
    double frame_mse = 0.0;
    double cepstral_distance = 0.0;
    std::optional<double> duration_mae;
};

struct EvalReport {
    std::string manifest;
    std::size_t utterances = 0;
    std::vector<SystemMetrics> systems;

    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] std::string table() const;
};

/// Orthonormal DCT-II of each row.
inline Matrix dct_rows(const Matrix& x) {
    const Index n = x.cols();
    Matrix basis(n, n);
    for (Index k = 0; k < n; ++k) {
        const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (Index i = 0; i < n; ++i) basis(i, k) = scale * std::cos(std::numbers::pi * (i + 0.5) * k / n);
    }
    return x * basis;
}

/// Mean over frames of (10 / ln 10) * sqrt(2 * sum_{k >= 1} (c_k - c'_k)^2), where c are
/// the DCT cepstra of the log-mel frames. c_0 (overall level) is excluded.
inline double cepstral_distance(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw AlignmentMismatch("cepstral distance needs equally shaped spectrograms");
    }
    const Matrix diff = dct_rows(pred - target);
    const double k = 10.0 / std::log(10.0);
    double sum = 0.0;
    for (Index t = 0; t < diff.rows(); ++t) {
        sum += k * std::sqrt(2.0 * diff.row(t).tail(diff.cols() - 1).squaredNorm());
    }
    return sum / static_cast<double>(diff.rows());
}

inline SystemMetrics evaluate_system(const SystemSpec& spec, const std::vector<training::Example>& examples,
                                     std::optional<model::Mode> expected_mode = std::nullopt) {
    if (examples.empty()) throw DataError("no evaluation utterances");
    auto acoustic = model::acoustic_from<double>(model::load_checkpoint(spec.acoustic));
    if (expected_mode && acoustic.mode() != *expected_mode) {
        throw ModeError(spec.acoustic.string() + " is a " + std::string(model::to_string(acoustic.mode())) +
                        " model, not " + std::string(model::to_string(*expected_mode)));
    }
    std::optional<model::DurationModel<double>> duration;
    if (!spec.duration.empty()) duration.emplace(model::duration_from<double>(model::load_checkpoint(spec.duration)));

    SystemMetrics m;
    m.mode = std::string(model::to_string(acoustic.mode()));
    m.acoustic = spec.acoustic.generic_string();
    m.duration = spec.duration.generic_string();
    std::map<int, double> sq;
    std::map<int, double> count;
    double cep = 0.0;
    double frames = 0.0;
    double dur_abs = 0.0;
    double phonemes = 0.0;
    for (const auto& ex : examples) {
        if (ex.mel.cols() != acoustic.config().n_mels) {
            throw DataError("utterance '" + ex.id + "' has " + std::to_string(ex.mel.cols()) + " bands, model expects " +
                            std::to_string(acoustic.config().n_mels));
        }
        const auto target = ex.hierarchy(acoustic.mode());
        const auto pred = acoustic.infer(ex.input());
        for (const auto& [level, mat] : pred) {
            const Matrix& y = target.level(level).mel;
            sq[level] += (mat - y).squaredNorm();
            count[level] += static_cast<double>(y.size());
        }
        cep += cepstral_distance(pred.at(0), ex.mel) * static_cast<double>(ex.mel.rows());
        frames += static_cast<double>(ex.mel.rows());
        if (duration) {
            const auto d = duration->predict(ex.utt.phoneme_ids);
            for (std::size_t i = 0; i < d.size(); ++i) dur_abs += std::abs(d[i] - ex.durations.durations[i]);
            phonemes += static_cast<double>(d.size());
        }
    }
    for (const auto& [level, s] : sq) m.per_scale_mse[level] = s / count[level];
    m.frame_mse = m.per_scale_mse.at(0);
    m.cepstral_distance = cep / frames;
    if (duration) m.duration_mae = dur_abs / phonemes;
    for (const auto& [level, v] : m.per_scale_mse) {
        if (!std::isfinite(v)) throw NumericalError("non-finite MSE at scale " + std::to_string(level));
    }
    return m;
}

/// Evaluates one or two systems on the same utterances. Names default to the modes.
inline EvalReport evaluate(const std::filesystem::path& manifest, const std::vector<SystemSpec>& systems,
                           const linguistic::Lexicon& lexicon, std::optional<model::Mode> mode = std::nullopt) {
    if (systems.empty() || systems.size() > 2) throw InvalidInput("eval takes one or two acoustic checkpoints");
    const auto examples = training::load_examples(training::load_manifest(manifest), lexicon);
    EvalReport r;
    r.manifest = manifest.generic_string();
    r.utterances = examples.size();
    for (const auto& s : systems) r.systems.push_back(evaluate_system(s, examples, mode));
    if (r.systems.size() == 2 && r.systems[0].mode == r.systems[1].mode) {
        r.systems[0].name = r.systems[0].mode + "#1";
        r.systems[1].name = r.systems[1].mode + "#2";
    } else {
        for (auto& s : r.systems) s.name = s.mode;
    }
    return r;
}

namespace detail {

inline nlohmann::json scale_map(const std::map<int, double>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [l, v] : m) j[training::scale_key(l)] = v;
    return j;
}

inline nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline nlohmann::json EvalReport::to_json() const {
    nlohmann::json j;
    j["format"] = "mss-eval-1";
    j["manifest"] = manifest;
    j["utterances"] = utterances;
    j["systems"] = nlohmann::json::array();
    for (const auto& s : systems) {
        nlohmann::json sj;
        sj["name"] = s.name;
        sj["mode"] = s.mode;
        sj["acoustic"] = s.acoustic;
        sj["duration"] = s.duration.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.duration);
        sj["per_scale_mse"] = detail::scale_map(s.per_scale_mse);
        sj["frame_mse"] = s.frame_mse;
        sj["cepstral_distance"] = s.cepstral_distance;
        sj["duration_mae"] = detail::optional_number(s.duration_mae);
        j["systems"].push_back(sj);
    }
    if (systems.size() == 2) {
        // Second minus first, over the scales both systems predict.
        const auto& a = systems[0];
        const auto& b = systems[1];
        std::map<int, double> per_scale;
        for (const auto& [l, v] : b.per_scale_mse) {
            if (a.per_scale_mse.count(l)) per_scale[l] = v - a.per_scale_mse.at(l);
        }
        nlohmann::json d;
        d["per_scale_mse"] = detail::scale_map(per_scale);
        d["frame_mse"] = b.frame_mse - a.frame_mse;
        d["cepstral_distance"] = b.cepstral_distance - a.cepstral_distance;
        d["duration_mae"] = a.duration_mae && b.duration_mae ? nlohmann::json(*b.duration_mae - *a.duration_mae)
                                                              : nlohmann::json(nullptr);
        j["deltas"] = d;
    }
    return j;
}

inline std::string EvalReport::table() const {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s %10s %10s\n", "system", "L3", "L2", "L1", "L0",
                  "cep.dist", "dur.MAE");
    out << line;
    auto cell = [](const std::map<int, double>& m, int l) {
        char buf[32];
        if (m.count(l)) std::snprintf(buf, sizeof buf, "%10.5f", m.at(l));
        else std::snprintf(buf, sizeof buf, "%10s", "-");
        return std::string(buf);
    };
    for (const auto& s : systems) {
        char dur[32];
        if (s.duration_mae) std::snprintf(dur, sizeof dur, "%10.4f", *s.duration_mae);
        else std::snprintf(dur, sizeof dur, "%10s", "-");
        std::snprintf(line, sizeof line, "%-16s %s %s %s %s %10.4f %s\n", s.name.c_str(), cell(s.per_scale_mse, 3).c_str(),
                      cell(s.per_scale_mse, 2).c_str(), cell(s.per_scale_mse, 1).c_str(),
                      cell(s.per_scale_mse, 0).c_str(), s.cepstral_distance, dur);
        out << line;
    }
    out << utterances << " utterances\n";
    return out.str();
}

}  // namespace mss::pipeline
