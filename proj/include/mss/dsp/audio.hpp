#pragma once

#include "mss/core/binary.hpp"
#include "mss/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace mss::dsp {

inline constexpr int kDefaultSampleRate = 24000;

/// Mono audio, samples nominally in [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = kDefaultSampleRate;

    [[nodiscard]] std::size_t size() const { return samples.size(); }
    [[nodiscard]] bool empty() const { return samples.empty(); }

    [[nodiscard]] double peak() const {
        double p = 0.0;
        for (double s : samples) p = std::max(p, std::abs(s));
        return p;
    }
};

inline void validate(const AudioClip& clip) {
    if (clip.sample_rate <= 0) throw InvalidInput("sample rate must be positive");
    for (double s : clip.samples) {
        if (!std::isfinite(s)) throw InvalidInput("audio contains non-finite samples");
    }
}

// RIFF/WAVE, PCM 16-bit mono only.

inline void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
    validate(clip);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
    out.write("RIFF", 4);
    binary::put_u32(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    binary::put_u32(out, 16);
    binary::put_u16(out, 1);  // PCM
    binary::put_u16(out, 1);  // mono
    binary::put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
    binary::put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
    binary::put_u16(out, 2);
    binary::put_u16(out, 16);
    out.write("data", 4);
    binary::put_u32(out, data_bytes);
    for (double s : clip.samples) {
        const double c = std::clamp(s, -1.0, 1.0);
        const auto q = static_cast<std::int16_t>(std::lround(c * 32767.0));
        binary::put_u16(out, static_cast<std::uint16_t>(q));
    }
}

inline AudioClip read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path.string());
    char tag[4];
    binary::read_exact(in, tag, 4, "RIFF tag");
    if (std::string(tag, 4) != "RIFF") throw FormatError(path.string() + ": not a RIFF file");
    binary::get_u32(in);
    binary::read_exact(in, tag, 4, "WAVE tag");
    if (std::string(tag, 4) != "WAVE") throw FormatError(path.string() + ": not a WAVE file");

    AudioClip clip;
    bool have_fmt = false;
    while (true) {
        char id[4];
        in.read(id, 4);
        if (in.gcount() != 4) break;
        const std::uint32_t size = binary::get_u32(in, "chunk size");
        const std::string chunk(id, 4);
        if (chunk == "fmt ") {
            const auto format = binary::get_u16(in);
            const auto channels = binary::get_u16(in);
            clip.sample_rate = static_cast<int>(binary::get_u32(in));
            binary::get_u32(in);
            binary::get_u16(in);
            const auto bits = binary::get_u16(in);
            if (format != 1 || channels != 1 || bits != 16) {
                throw FormatError(path.string() + ": only 16-bit PCM mono WAV is supported");
            }
            in.seekg(static_cast<std::streamoff>(size) - 16, std::ios::cur);
            have_fmt = true;
        } else if (chunk == "data") {
            if (!have_fmt) throw FormatError(path.string() + ": data chunk before fmt chunk");
            clip.samples.resize(size / 2);
            for (auto& s : clip.samples) {
                const auto raw = static_cast<std::int16_t>(binary::get_u16(in, "sample"));
                s = static_cast<double>(raw) / 32768.0;
            }
            return clip;
        } else {
            in.seekg(static_cast<std::streamoff>(size + (size & 1)), std::ios::cur);
        }
    }
    throw FormatError(path.string() + ": missing data chunk");
}

}  // namespace mss::dsp
