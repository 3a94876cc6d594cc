#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "biasloupe/classes.hpp"
#include "biasloupe/stats.hpp"

namespace biasloupe {

struct Fragment {
    std::string fragment_id;
    std::string doc_id;
    int doc_index = 0;      // into the DocAnalysis span it was extracted from
    int sent_begin = 0;     // sentence indices [sent_begin, sent_end)
    int sent_end = 0;
    uint32_t char_begin = 0; // byte range in the source document text
    uint32_t char_end = 0;
    std::string text;
    std::string center_marker; // lemma that anchored the fragment
};

struct MatchSpan {
    int sentence_index = 0;
    int token_begin = 0;
    int token_end = 0;
    ClassKey key;
    double bs = 0.0;           // raw table value, may be infinite
    double contribution = 0.0; // finite; infinities replaced by ±max_finite_abs_bs
    uint32_t char_begin = 0;   // byte offsets relative to the fragment text
    uint32_t char_end = 0;
    std::string surface;
};

struct FragmentScore {
    int fragment_index = 0;
    double score = 0.0;
    std::vector<MatchSpan> spans;
};

// Every stride-1 window of `window` sentences over interest-group documents
// whose center sentence contains a token lemmatizing into the marker
// lexicon. Documents shorter than the window yield none.
std::vector<Fragment> candidate_fragments(std::span<const DocAnalysis> docs,
                                          const std::unordered_set<std::string>& marker_lexicon,
                                          int window);

// Occurrences in the fragment whose class survives in `table`, with
// contained spans suppressed: longer surface spans are kept first (ties by
// leftmost start) and a span is dropped iff strictly inside a kept span at
// the same position. Fragment occurrences come from the same DocAnalysis
// used for counting, so both passes share one tokenization.
std::vector<MatchSpan> match_classes(const Fragment& frag, const DocAnalysis& doc, const BiasTable& table);

// Score(F) = sum of span contributions; infinite BS contributes
// ±max_finite_abs_bs. Throws when the table has no finite entry to
// substitute.
FragmentScore score_fragment(int fragment_index, std::vector<MatchSpan> spans, const BiasTable& table);

struct Ranking {
    std::vector<FragmentScore> top;    // descending score: interest-associated
    std::vector<FragmentScore> bottom; // ascending score: control-associated
};

// Ties broken by (doc_id, sentence_range) for determinism. k larger than
// the fragment count clamps.
Ranking rank_fragments(std::vector<FragmentScore> scores, std::span<const Fragment> fragments, int top_k);

std::unordered_set<std::string> load_marker_lexicon(const std::string& path);

void save_ranking(const Ranking& ranking, std::span<const Fragment> fragments, int window,
                  const GroupPair& groups, const std::string& path);

} // namespace biasloupe
