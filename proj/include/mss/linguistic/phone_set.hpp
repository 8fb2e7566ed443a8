#pragma once

#include "mss/core/error.hpp"

#include <array>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mss::linguistic {

inline constexpr std::string_view kSilence = "sil";
inline constexpr std::string_view kWordBoundary = "#";
inline constexpr std::string_view kUnknown = "<unk>";

/// Fixed phoneme inventory: silence, word boundary, ARPAbet, per-character OOV pseudo-phonemes.
/// Ids are stable across builds since checkpoints store embedding tables indexed by them.
class PhoneSet {
public:
    static const PhoneSet& standard() {
        static const PhoneSet set;
        return set;
    }

    [[nodiscard]] int size() const { return static_cast<int>(symbols_.size()); }

    [[nodiscard]] bool contains(std::string_view symbol) const { return ids_.count(std::string(symbol)) > 0; }

    [[nodiscard]] int id(std::string_view symbol) const {
        const auto it = ids_.find(std::string(symbol));
        if (it == ids_.end()) throw InvalidInput("unknown phoneme symbol '" + std::string(symbol) + "'");
        return it->second;
    }

    [[nodiscard]] const std::string& symbol(int id) const {
        if (id < 0 || id >= size()) throw InvalidInput("phoneme id out of range");
        return symbols_[static_cast<std::size_t>(id)];
    }

    /// Pseudo-phoneme for one character of an out-of-vocabulary word.
    [[nodiscard]] static std::string letter_symbol(char c) { return std::string("<") + c + ">"; }

private:
    PhoneSet() {
        add(std::string(kSilence));
        add(std::string(kWordBoundary));
        static constexpr std::array<std::string_view, 39> arpabet = {
            "AA", "AE", "AH", "AO", "AW", "AY", "B",  "CH", "D",  "DH", "EH", "ER", "EY",
            "F",  "G",  "HH", "IH", "IY", "JH", "K",  "L",  "M",  "N",  "NG", "OW", "OY",
            "P",  "R",  "S",  "SH", "T",  "TH", "UH", "UW", "V",  "W",  "Y",  "Z",  "ZH"};
        for (auto p : arpabet) add(std::string(p));
        for (char c = 'a'; c <= 'z'; ++c) add(letter_symbol(c));
        for (char c = '0'; c <= '9'; ++c) add(letter_symbol(c));
        add(std::string(kUnknown));
    }

    void add(std::string s) {
        ids_.emplace(s, static_cast<int>(symbols_.size()));
        symbols_.push_back(std::move(s));
    }

    std::vector<std::string> symbols_;
    std::unordered_map<std::string, int> ids_;
};

}  // namespace mss::linguistic
