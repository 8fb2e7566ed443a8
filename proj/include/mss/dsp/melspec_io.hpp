#pragma once

#include "mss/core/binary.hpp"
#include "mss/core/error.hpp"
#include "mss/dsp/mel.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace mss::dsp {

// MELSPEC1: 8-byte magic, u32 T, u32 M, u32 frame shift in microseconds, then T*M float32
// values row-major. All integers and floats little-endian.

inline constexpr char kMelMagic[8] = {'M', 'E', 'L', 'S', 'P', 'E', 'C', '1'};

inline void write_melspec(std::ostream& out, const MelSpectrogram& mel) {
    out.write(kMelMagic, 8);
    binary::put_u32(out, static_cast<std::uint32_t>(mel.num_frames()));
    binary::put_u32(out, static_cast<std::uint32_t>(mel.n_mels()));
    binary::put_u32(out, static_cast<std::uint32_t>(std::lround(mel.frame_shift_ms * 1000.0)));
    for (Index t = 0; t < mel.frames.rows(); ++t) {
        for (Index m = 0; m < mel.frames.cols(); ++m) binary::put_f32(out, static_cast<float>(mel.frames(t, m)));
    }
}

inline MelSpectrogram read_melspec(std::istream& in) {
    char magic[8];
    binary::read_exact(in, magic, 8, "MELSPEC1 magic");
    if (!std::equal(magic, magic + 8, kMelMagic)) throw FormatError("bad MELSPEC1 magic");
    const auto frames = binary::get_u32(in, "frame count");
    const auto bands = binary::get_u32(in, "band count");
    const auto shift_us = binary::get_u32(in, "frame shift");
    if (frames == 0 || bands == 0) throw FormatError("MELSPEC1 with zero frames or bands");
    MelSpectrogram mel;
    mel.frame_shift_ms = shift_us / 1000.0;
    mel.frames.resize(frames, bands);
    for (Index t = 0; t < mel.frames.rows(); ++t) {
        for (Index m = 0; m < mel.frames.cols(); ++m) mel.frames(t, m) = binary::get_f32(in);
    }
    return mel;
}

inline void save_melspec(const std::filesystem::path& path, const MelSpectrogram& mel) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    write_melspec(out, mel);
}

inline MelSpectrogram load_melspec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path.string());
    try {
        return read_melspec(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

/// Rounds every entry to float32, the precision MELSPEC1 stores.
inline MelSpectrogram quantize_f32(MelSpectrogram mel) {
    mel.frames = mel.frames.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
    return mel;
}

}  // namespace mss::dsp
