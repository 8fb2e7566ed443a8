#pragma once

#include "mss/linguistic/lexicon.hpp"
#include "mss/linguistic/shipped_lexicon_data.hpp"

#include <sstream>

namespace mss::linguistic {

/// The lexicon bundled with the library (data/lexicon.txt at build time).
inline const Lexicon& shipped_lexicon() {
    static const Lexicon lex = [] {
        std::istringstream in(detail::kShippedLexiconText);
        return Lexicon::parse(in, "<shipped lexicon>");
    }();
    return lex;
}

/// The shipped lexicon, or the file at `path` when one is given.
inline Lexicon lexicon_or_shipped(const std::filesystem::path& path) {
    return path.empty() ? shipped_lexicon() : Lexicon::load(path);
}

}  // namespace mss::linguistic
