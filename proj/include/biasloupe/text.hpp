#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace biasloupe {

// Dictionary-driven lemmatizer: a flat form -> lemma map loaded from TSV.
// The data decides the language; the code is language-agnostic.
class LemmaDictionary {
public:
    LemmaDictionary() = default;

    // TSV, `form<TAB>lemma` per line, full-line `#` comments. Enforces that
    // every lemma maps to itself so lemmatization is idempotent.
    static LemmaDictionary load(const std::string& path);
    static LemmaDictionary from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);

    // dict[lower] if present, else lower unchanged.
    const std::string& lemma_of(const std::string& lower) const;

    bool empty() const { return map_.empty(); }
    std::size_t size() const { return map_.size(); }

private:
    void finalize();
    std::unordered_map<std::string, std::string> map_;
};

class StopwordSet {
public:
    StopwordSet() = default;

    // One lowercased form per line, full-line `#` comments.
    static StopwordSet load(const std::string& path);
    static StopwordSet from_words(const std::vector<std::string>& words);

    bool contains(const std::string& lower) const { return set_.count(lower) != 0; }
    std::size_t size() const { return set_.size(); }

private:
    std::unordered_set<std::string> set_;
};

struct Token {
    std::string surface;
    std::string lower;   // case-folded surface
    std::string lemma;   // equals lower when not in dictionary; stopwords keep lower
    bool is_stopword = false;
    bool boundary_before = false; // a punctuation signal sits between this token and the previous one
    uint32_t begin = 0;  // byte offsets [begin, end) into the document text
    uint32_t end = 0;
};

// Non-token punctuation kept as sentence-structure signals.
struct PunctSignal {
    uint32_t pos = 0;    // byte offset
    uint32_t end = 0;
    char32_t cp = 0;
    bool terminal = false; // one of . ! ? …
};

struct TextScan {
    std::vector<Token> tokens;
    std::vector<PunctSignal> signals;
};

struct Sentence {
    int index = 0;
    uint32_t begin = 0;
    uint32_t end = 0;
    std::vector<Token> tokens;
};

using AbbrevSet = std::unordered_set<std::string>;

// Dotted abbreviations (stored without the dot) that never end a sentence.
const AbbrevSet& default_abbreviations();
AbbrevSet load_abbreviations(const std::string& path);

// Tokens are maximal runs of letters/digits; apostrophes and hyphens stay
// inside a token when flanked by word characters. Lowercasing is simple
// case folding. Invalid UTF-8 bytes act as separators.
TextScan scan_text(std::string_view text, const LemmaDictionary& dict, const StopwordSet& stops);

std::vector<Token> tokenize(std::string_view text, const LemmaDictionary& dict, const StopwordSet& stops);

// Boundaries at . ! ? … followed by whitespace and an uppercase letter,
// opening punctuation, or end of text; the abbreviation set suppresses
// false boundaries after dotted forms. Text without terminal punctuation
// is a single sentence.
std::vector<Sentence> split_sentences(std::string_view text, const LemmaDictionary& dict,
                                      const StopwordSet& stops,
                                      const AbbrevSet& abbrevs = default_abbreviations());

struct NgramLimits {
    int max_surface_len = 7; // tokens per span, stopwords included
    int max_content = 4;     // non-stopword tokens per span
};

struct NGramOccurrence {
    std::string doc_id;  // filled by corpus-level drivers
    int sentence_index = 0;
    int token_begin = 0; // token indices [token_begin, token_end) within the sentence
    int token_end = 0;
    std::string surface; // token surfaces joined by single spaces
    std::vector<std::string> content_lemmas;
};

// All spans whose first and last tokens are non-stopwords, with surface
// length and content count within limits. Spans never cross sentence or
// punctuation-signal boundaries. Overlapping spans are all emitted.
std::vector<NGramOccurrence> extract_ngrams(const Sentence& sentence, const NgramLimits& limits);

// Simple case folding for the Latin, Greek and Cyrillic ranges; identity elsewhere.
char32_t fold_codepoint(char32_t cp);
bool is_uppercase(char32_t cp);
std::string fold_utf8(std::string_view text);

} // namespace biasloupe
