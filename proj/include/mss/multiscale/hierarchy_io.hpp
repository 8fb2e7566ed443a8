#pragma once

#include "mss/dsp/melspec_io.hpp"
#include "mss/multiscale/hierarchy.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

namespace mss::multiscale {

// Directory layout: scale<L>.mel ... scale0.mel (MELSPEC1) plus alignments.json:
//   {"mode": "word-mss", "total_frames": T, "levels": [{"level": 2, "counts": [...]}, ...]}

inline std::filesystem::path scale_file(const std::filesystem::path& dir, int level) {
    return dir / ("scale" + std::to_string(level) + ".mel");
}

inline void save_hierarchy(const std::filesystem::path& dir, const ScaleHierarchy& h, double frame_shift_ms) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["mode"] = std::string(to_string(h.mode));
    j["total_frames"] = h.total_frames();
    j["levels"] = nlohmann::json::array();
    for (const auto& s : h.levels) {
        dsp::save_melspec(scale_file(dir, s.level), dsp::MelSpectrogram{s.mel, frame_shift_ms});
        j["levels"].push_back({{"level", s.level}, {"counts", s.alignment.counts()}});
    }
    std::ofstream(dir / "alignments.json") << j.dump(2) << '\n';
}

inline ScaleHierarchy load_hierarchy(const std::filesystem::path& dir) {
    std::ifstream in(dir / "alignments.json");
    if (!in) throw DataError("missing " + (dir / "alignments.json").string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed alignments.json: ") + e.what());
    }
    ScaleHierarchy h;
    h.mode = hierarchy_mode_from_string(j.at("mode").get<std::string>());
    for (const auto& lv : j.at("levels")) {
        const int level = lv.at("level").get<int>();
        const auto path = scale_file(dir, level);
        if (!std::filesystem::exists(path)) throw DataError("missing scale file " + path.string());
        ScaleLevel s{level, AlignmentVector(lv.at("counts").get<std::vector<int>>()), dsp::load_melspec(path).frames};
        if (s.mel.rows() != s.alignment.size()) {
            throw AlignmentMismatch(path.string() + " has " + std::to_string(s.mel.rows()) + " rows but " +
                                    std::to_string(s.alignment.size()) + " alignment units");
        }
        h.levels.push_back(std::move(s));
    }
    if (h.levels.empty() || h.levels.back().level != 0) throw DataError("hierarchy must end at level 0");
    return h;
}

}  // namespace mss::multiscale
