#pragma once

#include "mss/ad/tape.hpp"
#include "mss/core/binary.hpp"
#include "mss/core/error.hpp"
#include "mss/core/kv_config.hpp"
#include "mss/model/acoustic.hpp"
#include "mss/model/duration.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mss::model {

// MSSCKPT1: 8-byte magic, u64 FNV-1a digest of the config text, u32 length + config text,
// u32 tensor count, then per tensor u32 name length, name, u32 rank, u32 dims, f64 values
// (row-major). All integers little-endian.

inline constexpr char kCheckpointMagic[8] = {'M', 'S', 'S', 'C', 'K', 'P', 'T', '1'};

struct Checkpoint {
    std::string config_text;
    ParameterStore<double> tensors;

    [[nodiscard]] std::uint64_t digest() const { return binary::fnv1a64(config_text); }

    /// Value of the `kind` key ("acoustic" or "duration").
    [[nodiscard]] std::string kind() const {
        return KeyValueConfig::parse_string(config_text).get("kind", std::string());
    }
};

inline void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
    out.write(kCheckpointMagic, 8);
    binary::put_u64(out, ck.digest());
    binary::put_u32(out, static_cast<std::uint32_t>(ck.config_text.size()));
    out.write(ck.config_text.data(), static_cast<std::streamsize>(ck.config_text.size()));
    binary::put_u32(out, static_cast<std::uint32_t>(ck.tensors.size()));
    ck.tensors.for_each([&](const ad::Parameter<double>& p) {
        binary::put_u32(out, static_cast<std::uint32_t>(p.name.size()));
        out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        binary::put_u32(out, 2);
        binary::put_u32(out, static_cast<std::uint32_t>(p.value.rows()));
        binary::put_u32(out, static_cast<std::uint32_t>(p.value.cols()));
        for (Index r = 0; r < p.value.rows(); ++r) {
            for (Index c = 0; c < p.value.cols(); ++c) binary::put_f64(out, p.value(r, c));
        }
    });
}

inline Checkpoint read_checkpoint(std::istream& in) {
    char magic[8];
    try {
        binary::read_exact(in, magic, 8, "MSSCKPT1 magic");
    } catch (const FormatError&) {
        throw CheckpointMismatch("file too short to be a checkpoint");
    }
    if (!std::equal(magic, magic + 8, kCheckpointMagic)) throw CheckpointMismatch("bad MSSCKPT1 magic");
    Checkpoint ck;
    const std::uint64_t digest = binary::get_u64(in, "config digest");
    const std::uint32_t len = binary::get_u32(in, "config length");
    if (len > (1u << 20)) throw FormatError("implausible config length");
    ck.config_text.resize(len);
    binary::read_exact(in, ck.config_text.data(), len, "config text");
    if (binary::fnv1a64(ck.config_text) != digest) throw CheckpointMismatch("config digest does not match config text");
    const std::uint32_t count = binary::get_u32(in, "tensor count");
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::uint32_t name_len = binary::get_u32(in, "name length");
        if (name_len == 0 || name_len > 4096) throw FormatError("implausible tensor name length");
        std::string name(name_len, '\0');
        binary::read_exact(in, name.data(), name_len, "tensor name");
        const std::uint32_t rank = binary::get_u32(in, "rank");
        if (rank != 2) throw FormatError("tensor " + name + " has rank " + std::to_string(rank) + ", expected 2");
        const std::uint32_t rows = binary::get_u32(in, "dims");
        const std::uint32_t cols = binary::get_u32(in, "dims");
        if (static_cast<std::uint64_t>(rows) * cols > (1ull << 28)) throw FormatError("tensor " + name + " too large");
        Matrix m(rows, cols);
        for (Index r = 0; r < m.rows(); ++r) {
            for (Index c = 0; c < m.cols(); ++c) m(r, c) = binary::get_f64(in);
        }
        ck.tensors.add(name, std::move(m));
    }
    return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    write_checkpoint(out, ck);
    if (!out) throw InvalidInput("failed writing " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open checkpoint " + path.string());
    try {
        return read_checkpoint(in);
    } catch (const FormatError& e) {
        throw CheckpointMismatch(path.string() + ": " + e.what());
    }
}

/// Trainable flags are not stored; models restore them from their own layout.
template <typename S>
Checkpoint make_checkpoint(const std::string& config_text, const ParameterStore<S>& params) {
    Checkpoint ck;
    ck.config_text = config_text;
    params.for_each([&](const ad::Parameter<S>& p) { ck.tensors.add(p.name, p.value.template cast<double>()); });
    return ck;
}

template <typename S>
ParameterStore<S> tensors_as(const Checkpoint& ck) {
    ParameterStore<S> out;
    ck.tensors.for_each([&](const ad::Parameter<double>& p) { out.add(p.name, p.value.template cast<S>()); });
    return out;
}

template <typename S>
Checkpoint to_checkpoint(const AcousticModel<S>& m) {
    return make_checkpoint(m.config().to_text(), m.params());
}

template <typename S>
Checkpoint to_checkpoint(const DurationModel<S>& m) {
    return make_checkpoint(m.config().to_text(), m.params());
}

template <typename S>
AcousticModel<S> acoustic_from(const Checkpoint& ck) {
    const auto cfg = AcousticConfig::from_config(KeyValueConfig::parse_string(ck.config_text));
    if (ck.kind() != "acoustic") throw CheckpointMismatch("checkpoint is not an acoustic model");
    return AcousticModel<S>(cfg, tensors_as<S>(ck));
}

template <typename S>
DurationModel<S> duration_from(const Checkpoint& ck) {
    const auto cfg = DurationConfig::from_config(KeyValueConfig::parse_string(ck.config_text));
    if (ck.kind() != "duration") throw CheckpointMismatch("checkpoint is not a duration model");
    return DurationModel<S>(cfg, tensors_as<S>(ck));
}

}  // namespace mss::model
