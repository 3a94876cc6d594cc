#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "biasloupe/corpus.hpp"
#include "biasloupe/text.hpp"

namespace biasloupe {

// Canonically sorted multiset of content lemmas. Word order and stopwords
// are ignored; repeated lemmas are kept with multiplicity.
struct ClassKey {
    std::vector<std::string> lemmas; // sorted

    static ClassKey from_occurrence(const NGramOccurrence& occ);
    static ClassKey from_lemmas(std::vector<std::string> lemmas);

    int content_count() const { return static_cast<int>(lemmas.size()); }
    // Join with a separator that cannot appear in a lemma; usable as a map key.
    std::string str() const;
    static ClassKey parse(const std::string& key_str);

    bool operator==(const ClassKey&) const = default;
    auto operator<=>(const ClassKey&) const = default;
};

struct ClassCounts {
    int64_t freq_gi = 0;
    int64_t freq_gc = 0;
    std::set<std::string> members; // distinct surface forms

    int64_t combined() const { return freq_gi + freq_gc; }
};

// Per-document tokenization/extraction result; the single source of truth
// reused by counting, calibration and fragment matching.
struct DocAnalysis {
    std::string doc_id;
    bool interest = false;
    const GeneratedDocument* doc = nullptr; // borrowed from the corpus vector
    std::vector<Sentence> sentences;
    std::vector<NGramOccurrence> occurrences;
    int64_t content_tokens = 0;
};

DocAnalysis analyze_document(const GeneratedDocument& doc, const GroupPair& groups,
                             const LemmaDictionary& dict, const StopwordSet& stops,
                             const NgramLimits& limits, const AbbrevSet& abbrevs = default_abbreviations());

std::vector<DocAnalysis> analyze_corpus(const std::vector<GeneratedDocument>& docs, const GroupPair& groups,
                                        const LemmaDictionary& dict, const StopwordSet& stops,
                                        const NgramLimits& limits,
                                        const AbbrevSet& abbrevs = default_abbreviations());

struct ClassTable {
    std::unordered_map<std::string, ClassCounts> classes; // key: ClassKey::str()
    int64_t content_tokens_gi = 0; // M_.GI — reused for every n-gram order
    int64_t content_tokens_gc = 0;
    GroupPair groups;
};

// Token-level counts: overlapping occurrences each count once. Throws when
// either group has no content tokens.
ClassTable build_class_table(std::span<const DocAnalysis> docs, const GroupPair& groups);

void save_class_table(const ClassTable& table, const std::string& path);

} // namespace biasloupe
