#pragma once

#include "mss/core/error.hpp"
#include "mss/linguistic/lexicon.hpp"
#include "mss/linguistic/phone_set.hpp"

#include <cctype>
#include <string>
#include <vector>

namespace mss::linguistic {

inline constexpr const char* kSilenceWord = "<sil>";

struct FrontEndOptions {
    /// Append the "#" juncture phoneme to every lexical word.
    bool word_boundary = true;
    /// Close the utterance with a silence unit that is its own word-level unit.
    bool final_silence = true;
};

/// Words, phonemes and the phoneme -> word relation for one sentence.
struct Utterance {
    std::string text;
    std::vector<std::string> words;     ///< lexical words, then the silence unit if enabled
    std::vector<std::string> phonemes;  ///< symbols from PhoneSet
    std::vector<int> phoneme_ids;
    std::vector<int> phoneme_word_index;
    int lexical_word_count = 0;
    int sentence_count = 1;

    [[nodiscard]] int num_words() const { return static_cast<int>(words.size()); }
    [[nodiscard]] int num_phonemes() const { return static_cast<int>(phonemes.size()); }

    /// Number of phonemes in each word-level unit.
    [[nodiscard]] std::vector<int> phonemes_per_word() const {
        std::vector<int> counts(words.size(), 0);
        for (int w : phoneme_word_index) ++counts[static_cast<std::size_t>(w)];
        return counts;
    }
};

/// Checks the structural invariants: W, P >= 1, word index non-decreasing, contiguous and onto.
inline void validate(const Utterance& utt) {
    if (utt.words.empty() || utt.phonemes.empty()) throw InvalidInput("utterance needs at least one word and phoneme");
    if (utt.phoneme_ids.size() != utt.phonemes.size() || utt.phoneme_word_index.size() != utt.phonemes.size()) {
        throw InvalidInput("phoneme arrays disagree in length");
    }
    if (utt.sentence_count != 1) throw InvalidInput("exactly one sentence per utterance is supported");
    int expected = 0;
    for (int w : utt.phoneme_word_index) {
        if (w == expected + 1) ++expected;
        else if (w != expected) throw InvalidInput("phoneme_word_index must be contiguous and non-decreasing from 0");
    }
    if (utt.phoneme_word_index.front() != 0 || expected != utt.num_words() - 1) {
        throw InvalidInput("phoneme_word_index does not cover every word");
    }
}

/// Lowercased tokens split on whitespace and punctuation; apostrophes stay inside words.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || (c == '\'' && !cur.empty())) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    for (auto& t : tokens) {
        while (!t.empty() && t.back() == '\'') t.pop_back();
    }
    std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
    return tokens;
}

/// Deterministic per-character fallback for out-of-vocabulary words.
inline std::vector<std::string> spell_out(const std::string& word) {
    std::vector<std::string> phones;
    for (char c : word) {
        if (std::isalnum(static_cast<unsigned char>(c))) phones.push_back(PhoneSet::letter_symbol(c));
    }
    if (phones.empty()) phones.emplace_back(kUnknown);
    return phones;
}

inline Utterance front_end(const std::string& text, const Lexicon& lexicon, const FrontEndOptions& options = {}) {
    const auto tokens = tokenize(text);
    if (tokens.empty()) throw InvalidInput("text is empty after tokenization");

    const auto& phone_set = PhoneSet::standard();
    Utterance utt;
    utt.text = text;
    utt.lexical_word_count = static_cast<int>(tokens.size());
    auto append = [&](const std::string& word, const std::vector<std::string>& phones) {
        const int w = utt.num_words();
        utt.words.push_back(word);
        for (const auto& p : phones) {
            utt.phonemes.push_back(p);
            utt.phoneme_ids.push_back(phone_set.id(p));
            utt.phoneme_word_index.push_back(w);
        }
    };
    for (const auto& token : tokens) {
        const auto* entry = lexicon.find(token);
        std::vector<std::string> phones = entry ? *entry : spell_out(token);
        if (options.word_boundary) phones.emplace_back(kWordBoundary);
        append(token, phones);
    }
    if (options.final_silence) append(kSilenceWord, {std::string(kSilence)});
    return utt;
}

}  // namespace mss::linguistic
