#include "biasloupe/classes.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

#include "biasloupe/errors.hpp"

namespace biasloupe {

using nlohmann::json;

namespace {
constexpr char kKeySep = '\x1f';
}

ClassKey ClassKey::from_occurrence(const NGramOccurrence& occ) {
    return from_lemmas(occ.content_lemmas);
}

ClassKey ClassKey::from_lemmas(std::vector<std::string> lemmas) {
    std::sort(lemmas.begin(), lemmas.end());
    return ClassKey{std::move(lemmas)};
}

std::string ClassKey::str() const {
    std::string out;
    for (const auto& l : lemmas) {
        if (!out.empty()) out.push_back(kKeySep);
        out += l;
    }
    return out;
}

ClassKey ClassKey::parse(const std::string& key_str) {
    ClassKey key;
    size_t start = 0;
    while (start <= key_str.size()) {
        const auto sep = key_str.find(kKeySep, start);
        if (sep == std::string::npos) {
            key.lemmas.push_back(key_str.substr(start));
            break;
        }
        key.lemmas.push_back(key_str.substr(start, sep - start));
        start = sep + 1;
    }
    return key;
}

DocAnalysis analyze_document(const GeneratedDocument& doc, const GroupPair& groups,
                             const LemmaDictionary& dict, const StopwordSet& stops,
                             const NgramLimits& limits, const AbbrevSet& abbrevs) {
    if (!groups.is_interest(doc.group) && !groups.is_control(doc.group))
        throw AnalysisError("document '" + doc.doc_id + "': unknown group label '" + doc.group + "'");
    DocAnalysis da;
    da.doc_id = doc.doc_id;
    da.interest = groups.is_interest(doc.group);
    da.doc = &doc;
    da.sentences = split_sentences(doc.text, dict, stops, abbrevs);
    for (const auto& sent : da.sentences) {
        for (const auto& tok : sent.tokens)
            if (!tok.is_stopword) ++da.content_tokens;
        auto occs = extract_ngrams(sent, limits);
        for (auto& occ : occs) {
            occ.doc_id = doc.doc_id;
            da.occurrences.push_back(std::move(occ));
        }
    }
    return da;
}

std::vector<DocAnalysis> analyze_corpus(const std::vector<GeneratedDocument>& docs, const GroupPair& groups,
                                        const LemmaDictionary& dict, const StopwordSet& stops,
                                        const NgramLimits& limits, const AbbrevSet& abbrevs) {
    std::vector<DocAnalysis> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(analyze_document(d, groups, dict, stops, limits, abbrevs));
    return out;
}

ClassTable build_class_table(std::span<const DocAnalysis> docs, const GroupPair& groups) {
    ClassTable table;
    table.groups = groups;
    bool saw_gi = false, saw_gc = false;
    for (const auto& da : docs) {
        (da.interest ? saw_gi : saw_gc) = true;
        (da.interest ? table.content_tokens_gi : table.content_tokens_gc) += da.content_tokens;
        for (const auto& occ : da.occurrences) {
            auto& cc = table.classes[ClassKey::from_occurrence(occ).str()];
            (da.interest ? cc.freq_gi : cc.freq_gc) += 1;
            cc.members.insert(occ.surface);
        }
    }
    if (!saw_gi || !saw_gc || table.content_tokens_gi == 0 || table.content_tokens_gc == 0) {
        const char* which = (!saw_gi || table.content_tokens_gi == 0) ? "interest" : "control";
        throw AnalysisError(std::string("the ") + which +
                            " group has no content tokens; bias scores are undefined");
    }
    return table;
}

void save_class_table(const ClassTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write class table: " + path);

    json header{{"type", "header"},
                {"groups", {{"interest", table.groups.interest}, {"control", table.groups.control}}},
                {"content_tokens", {{"interest", table.content_tokens_gi}, {"control", table.content_tokens_gc}}},
                {"classes", table.classes.size()}};
    out << header.dump() << '\n';

    std::vector<std::pair<std::string, const ClassCounts*>> rows;
    rows.reserve(table.classes.size());
    for (const auto& [key, cc] : table.classes) rows.emplace_back(key, &cc);
    std::sort(rows.begin(), rows.end());
    for (const auto& [key_str, cc] : rows) {
        const ClassKey key = ClassKey::parse(key_str);
        json j{{"key", key.lemmas},
               {"content_count", key.content_count()},
               {"members", json(cc->members)},
               {"freq", {{table.groups.interest, cc->freq_gi}, {table.groups.control, cc->freq_gc}}}};
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("short write to class table: " + path);
}

} // namespace biasloupe
