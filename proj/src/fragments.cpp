#include "biasloupe/fragments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "biasloupe/errors.hpp"

namespace biasloupe {

using nlohmann::json;

std::unordered_set<std::string> load_marker_lexicon(const std::string& path) {
    return FilterConfig::load_lemma_list(path);
}

std::vector<Fragment> candidate_fragments(std::span<const DocAnalysis> docs,
                                          const std::unordered_set<std::string>& marker_lexicon,
                                          int window) {
    if (window < 1) throw AnalysisError("fragment window must be >= 1");
    if (marker_lexicon.empty()) throw AnalysisError("marker lexicon is empty");
    const int center_offset = window / 2;

    std::vector<Fragment> out;
    for (size_t d = 0; d < docs.size(); ++d) {
        const auto& da = docs[d];
        if (!da.interest) continue;
        const int n_sent = static_cast<int>(da.sentences.size());
        for (int s = 0; s + window <= n_sent; ++s) {
            const Sentence& center = da.sentences[s + center_offset];
            std::string marker;
            for (const auto& tok : center.tokens) {
                if (marker_lexicon.count(tok.lemma)) {
                    marker = tok.lemma;
                    break;
                }
            }
            if (marker.empty()) continue;
            Fragment frag;
            frag.doc_id = da.doc_id;
            frag.doc_index = static_cast<int>(d);
            frag.sent_begin = s;
            frag.sent_end = s + window;
            frag.char_begin = da.sentences[s].begin;
            frag.char_end = da.sentences[s + window - 1].end;
            frag.text = da.doc->text.substr(frag.char_begin, frag.char_end - frag.char_begin);
            frag.center_marker = marker;
            frag.fragment_id = da.doc_id + ":" + std::to_string(s);
            out.push_back(std::move(frag));
        }
    }
    return out;
}

std::vector<MatchSpan> match_classes(const Fragment& frag, const DocAnalysis& doc, const BiasTable& table) {
    struct Candidate {
        const NGramOccurrence* occ;
        const BiasEntry* entry;
    };
    std::vector<Candidate> candidates;
    for (const auto& occ : doc.occurrences) {
        if (occ.sentence_index < frag.sent_begin || occ.sentence_index >= frag.sent_end) continue;
        const BiasEntry* entry = table.find(ClassKey::from_occurrence(occ).str());
        if (entry) candidates.push_back({&occ, entry});
    }
    // Longer surface spans first; ties by position. A candidate is dropped
    // iff strictly inside an already-kept span of the same sentence.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        const int la = a.occ->token_end - a.occ->token_begin;
        const int lb = b.occ->token_end - b.occ->token_begin;
        if (la != lb) return la > lb;
        return std::tie(a.occ->sentence_index, a.occ->token_begin) <
               std::tie(b.occ->sentence_index, b.occ->token_begin);
    });
    std::vector<Candidate> kept;
    for (const auto& c : candidates) {
        bool contained = false;
        for (const auto& k : kept) {
            if (k.occ->sentence_index != c.occ->sentence_index) continue;
            const bool inside = k.occ->token_begin <= c.occ->token_begin &&
                                c.occ->token_end <= k.occ->token_end;
            const bool strict = (k.occ->token_end - k.occ->token_begin) >
                                (c.occ->token_end - c.occ->token_begin);
            if (inside && strict) {
                contained = true;
                break;
            }
        }
        if (!contained) kept.push_back(c);
    }

    std::vector<MatchSpan> spans;
    spans.reserve(kept.size());
    for (const auto& c : kept) {
        const Sentence& sent = doc.sentences[static_cast<size_t>(c.occ->sentence_index)];
        MatchSpan span;
        span.sentence_index = c.occ->sentence_index;
        span.token_begin = c.occ->token_begin;
        span.token_end = c.occ->token_end;
        span.key = c.entry->key;
        span.bs = c.entry->bs;
        span.contribution = c.entry->bs; // infinities resolved in score_fragment
        span.char_begin = sent.tokens[static_cast<size_t>(c.occ->token_begin)].begin - frag.char_begin;
        span.char_end = sent.tokens[static_cast<size_t>(c.occ->token_end - 1)].end - frag.char_begin;
        span.surface = c.occ->surface;
        spans.push_back(std::move(span));
    }
    std::sort(spans.begin(), spans.end(), [](const MatchSpan& a, const MatchSpan& b) {
        return std::tie(a.sentence_index, a.token_begin, a.token_end) <
               std::tie(b.sentence_index, b.token_begin, b.token_end);
    });
    return spans;
}

FragmentScore score_fragment(int fragment_index, std::vector<MatchSpan> spans, const BiasTable& table) {
    FragmentScore fs;
    fs.fragment_index = fragment_index;
    for (auto& span : spans) {
        if (!std::isfinite(span.bs)) {
            if (!table.has_finite)
                throw AnalysisError("cannot score fragment: matched class has infinite bias and the "
                                    "table has no finite entry to substitute");
            span.contribution = span.bs > 0 ? table.max_finite_abs_bs : -table.max_finite_abs_bs;
        } else {
            span.contribution = span.bs;
        }
        fs.score += span.contribution;
    }
    fs.spans = std::move(spans);
    return fs;
}

Ranking rank_fragments(std::vector<FragmentScore> scores, std::span<const Fragment> fragments, int top_k) {
    if (top_k < 0) top_k = 0;
    const auto tie_key = [&](const FragmentScore& fs) {
        const Fragment& f = fragments[static_cast<size_t>(fs.fragment_index)];
        return std::tie(f.doc_id, f.sent_begin);
    };
    std::sort(scores.begin(), scores.end(), [&](const FragmentScore& a, const FragmentScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return tie_key(a) < tie_key(b);
    });
    Ranking ranking;
    const size_t k = std::min<size_t>(static_cast<size_t>(top_k), scores.size());
    ranking.top.assign(scores.begin(), scores.begin() + static_cast<long>(k));
    ranking.bottom.assign(scores.rbegin(), scores.rbegin() + static_cast<long>(k));
    // Bottom: ascending score; preserve the deterministic tie order.
    std::sort(ranking.bottom.begin(), ranking.bottom.end(),
              [&](const FragmentScore& a, const FragmentScore& b) {
                  if (a.score != b.score) return a.score < b.score;
                  return tie_key(a) < tie_key(b);
              });
    return ranking;
}

namespace {

json span_to_json(const MatchSpan& s) {
    json j{{"key", s.key.lemmas},
           {"sentence_index", s.sentence_index},
           {"token_span", {s.token_begin, s.token_end}},
           {"char_span", {s.char_begin, s.char_end}},
           {"surface", s.surface},
           {"contribution", s.contribution}};
    if (std::isfinite(s.bs))
        j["bs"] = s.bs;
    else
        j["bs"] = s.bs > 0 ? "+inf" : "-inf";
    return j;
}

void write_list(std::ofstream& out, const char* which, const std::vector<FragmentScore>& list,
                std::span<const Fragment> fragments) {
    int rank = 0;
    for (const auto& fs : list) {
        const Fragment& f = fragments[static_cast<size_t>(fs.fragment_index)];
        json spans = json::array();
        for (const auto& s : fs.spans) spans.push_back(span_to_json(s));
        json j{{"list", which},
               {"rank", rank++},
               {"fragment_id", f.fragment_id},
               {"doc_id", f.doc_id},
               {"sentence_range", {f.sent_begin, f.sent_end}},
               {"char_range", {f.char_begin, f.char_end}},
               {"center_marker", f.center_marker},
               {"score", fs.score},
               {"text", f.text},
               {"spans", spans}};
        out << j.dump() << '\n';
    }
}

} // namespace

void save_ranking(const Ranking& ranking, std::span<const Fragment> fragments, int window,
                  const GroupPair& groups, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write ranking: " + path);
    json header{{"type", "header"},
                {"groups", {{"interest", groups.interest}, {"control", groups.control}}},
                {"window", window},
                {"fragments", fragments.size()},
                {"top", ranking.top.size()},
                {"bottom", ranking.bottom.size()}};
    out << header.dump() << '\n';
    write_list(out, "top", ranking.top, fragments);
    write_list(out, "bottom", ranking.bottom, fragments);
    if (!out) throw IoError("short write to ranking: " + path);
}

} // namespace biasloupe
