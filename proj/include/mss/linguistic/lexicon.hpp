#pragma once

#include "mss/core/error.hpp"
#include "mss/linguistic/phone_set.hpp"

#include <filesystem>
#include <initializer_list>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mss::linguistic {

/// Word -> phoneme sequence. Text format: one entry per line, "word<TAB>PH PH PH";
/// blank lines and lines starting with ';' are ignored.
class Lexicon {
public:
    Lexicon() = default;

    Lexicon(std::initializer_list<std::pair<const std::string, std::vector<std::string>>> entries) {
        for (const auto& [word, phones] : entries) add(word, phones);
    }

    static Lexicon load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw InvalidInput("cannot open lexicon " + path.string());
        return parse(in, path.string());
    }

    static Lexicon parse(std::istream& in, const std::string& origin = "<lexicon>") {
        Lexicon lex;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == ';') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos) {
                throw InvalidInput(origin + ":" + std::to_string(lineno) + ": expected word<TAB>phonemes");
            }
            std::istringstream phones(line.substr(tab + 1));
            std::vector<std::string> seq;
            for (std::string p; phones >> p;) seq.push_back(p);
            if (seq.empty()) throw InvalidInput(origin + ":" + std::to_string(lineno) + ": empty pronunciation");
            lex.add(line.substr(0, tab), std::move(seq));
        }
        return lex;
    }

    void add(const std::string& word, std::vector<std::string> phones) {
        for (const auto& p : phones) {
            if (!PhoneSet::standard().contains(p)) throw InvalidInput("lexicon uses unknown phoneme '" + p + "'");
        }
        entries_[word] = std::move(phones);
    }

    [[nodiscard]] const std::vector<std::string>* find(const std::string& word) const {
        const auto it = entries_.find(word);
        return it == entries_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }

private:
    std::map<std::string, std::vector<std::string>> entries_;
};

}  // namespace mss::linguistic
