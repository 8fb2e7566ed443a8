#pragma once

#include "mss/core/error.hpp"
#include "mss/core/matrix.hpp"
#include "mss/linguistic/durations.hpp"
#include "mss/linguistic/front_end.hpp"
#include "mss/multiscale/alignment.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mss::multiscale {

enum class HierarchyMode { generic, word_mss, sentence_mss };

inline std::string_view to_string(HierarchyMode m) {
    switch (m) {
        case HierarchyMode::generic: return "generic";
        case HierarchyMode::word_mss: return "word-mss";
        case HierarchyMode::sentence_mss: return "sentence-mss";
    }
    return "generic";
}

inline HierarchyMode hierarchy_mode_from_string(std::string_view s) {
    if (s == "generic") return HierarchyMode::generic;
    if (s == "word-mss" || s == "word_mss") return HierarchyMode::word_mss;
    if (s == "sentence-mss" || s == "sentence_mss") return HierarchyMode::sentence_mss;
    throw InvalidInput("unknown hierarchy mode '" + std::string(s) + "'");
}

struct ScaleLevel {
    int level = 0;
    AlignmentVector alignment;  ///< frames per unit at this level
    Matrix mel;                 ///< N_l x M targets
};

/// Coarsest level first; the last entry is level 0 (the frame-level spectrogram itself).
struct ScaleHierarchy {
    HierarchyMode mode = HierarchyMode::generic;
    std::vector<ScaleLevel> levels;
    std::vector<std::string> warnings;

    [[nodiscard]] int top_level() const { return levels.front().level; }
    [[nodiscard]] int total_frames() const { return levels.back().alignment.total(); }

    [[nodiscard]] bool has_level(int l) const {
        for (const auto& s : levels) {
            if (s.level == l) return true;
        }
        return false;
    }

    [[nodiscard]] const ScaleLevel& level(int l) const {
        for (const auto& s : levels) {
            if (s.level == l) return s;
        }
        throw InvalidInput("hierarchy has no level " + std::to_string(l));
    }

    [[nodiscard]] const Matrix& frames() const { return levels.back().mel; }
};

/// Generic construction: alignments for levels L..1 given coarsest first. Level 0 is Y.
inline ScaleHierarchy build_generic(const Matrix& frames, const std::vector<AlignmentVector>& coarse_to_fine) {
    ScaleHierarchy h;
    h.mode = HierarchyMode::generic;
    int level = static_cast<int>(coarse_to_fine.size());
    for (const auto& a : coarse_to_fine) {
        h.levels.push_back({level--, a, pool_scale(frames, a)});
    }
    h.levels.push_back({0, AlignmentVector::unit_frames(static_cast<int>(frames.rows())), frames});
    for (std::size_t i = 0; i + 1 < h.levels.size(); ++i) {
        const int coarse = h.levels[i].alignment.size();
        const int fine = h.levels[i + 1].alignment.size();
        if (coarse > fine) {
            throw AlignmentMismatch("level " + std::to_string(h.levels[i].level) + " has more units than the level below");
        }
        if (coarse == fine) {
            h.warnings.push_back("levels " + std::to_string(h.levels[i].level) + " and " +
                                 std::to_string(h.levels[i + 1].level) + " have the same number of units (" +
                                 std::to_string(coarse) + ")");
        }
    }
    return h;
}

/// Word-level (levels 2,1,0) or sentence-level (3,2,1,0) hierarchy from phoneme durations.
inline ScaleHierarchy build_hierarchy(const Matrix& frames, const linguistic::Utterance& utt,
                                      const linguistic::DurationVector& d, HierarchyMode mode) {
    if (mode == HierarchyMode::generic) throw InvalidInput("build_hierarchy needs word-mss or sentence-mss");
    if (d.total_frames != frames.rows()) {
        throw AlignmentMismatch("durations sum to " + std::to_string(d.total_frames) + " frames but the spectrogram has " +
                                std::to_string(frames.rows()));
    }
    std::vector<AlignmentVector> alignments;
    if (mode == HierarchyMode::sentence_mss) alignments.emplace_back(linguistic::sentence_duration(d));
    alignments.emplace_back(linguistic::word_durations(utt, d));
    alignments.emplace_back(d.durations);
    auto h = build_generic(frames, alignments);
    h.mode = mode;
    // Structural check: words must be unions of phonemes, the sentence a union of words.
    for (std::size_t i = 0; i + 1 < alignments.size(); ++i) unit_counts(alignments[i], alignments[i + 1]);
    return h;
}

}  // namespace mss::multiscale
