#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace biasloupe {

// Display names of the two corpus partitions. Roles are fixed: `interest`
// is GI, `control` is GC.
struct GroupPair {
    std::string interest = "interest";
    std::string control = "control";

    bool is_interest(const std::string& label) const { return label == interest; }
    bool is_control(const std::string& label) const { return label == control; }
};

struct Scenario {
    std::string id;
    std::string text; // situational description, e.g. "que tiene una reunión de trabajo"
};

struct Marker {
    std::string id;
    std::string text; // person-attribute phrase, e.g. "una persona ciega"
    std::string group; // display name of the group this marker belongs to
};

struct GenParams {
    double temperature = 0.8;
    int max_tokens = 1024;
    std::optional<uint64_t> seed;

    bool operator==(const GenParams&) const = default;
};

struct PromptPair {
    std::string scenario_id;
    std::string interest_marker_id;
    std::string control_marker_id;
    std::string name;
    std::string interest_prompt;
    std::string control_prompt;
    std::string template_id;
};

struct GeneratedDocument {
    std::string doc_id;
    std::string group;
    std::string scenario_id;
    std::string marker_id;
    int sample_index = 0;
    std::string prompt;
    std::string text;
    std::string model_name;
    GenParams generation_params;

    bool operator==(const GeneratedDocument&) const = default;
};

// One prompt pair per (scenario x positional marker pair x name). The two
// prompts of a pair differ only in the marker span.
std::vector<PromptPair> build_prompt_grid(const std::vector<Scenario>& scenarios,
                                          const std::vector<Marker>& interest_markers,
                                          const std::vector<Marker>& control_markers,
                                          const std::string& prompt_template,
                                          const std::vector<std::string>& names,
                                          const std::string& template_id = "t0");

// Byte range where `a` and `b` differ, if the difference is a single
// contiguous span: (start, len_a, len_b). nullopt when equal or the diff
// is not contiguous.
struct SpanDiff {
    size_t start;
    size_t len_a;
    size_t len_b;
};
std::optional<SpanDiff> single_span_diff(const std::string& a, const std::string& b);

// UTF-8 JSONL, one document per line, sorted by (scenario_id, marker_id,
// sample_index).
void save_corpus(const std::vector<GeneratedDocument>& docs, const std::string& path);

// `expect`, when given, rejects documents whose group is neither label.
std::vector<GeneratedDocument> load_corpus(const std::string& path, const GroupPair* expect = nullptr);

// Distinct group labels present, in first-seen order.
std::vector<std::string> corpus_group_labels(const std::vector<GeneratedDocument>& docs);

// Resolves which corpus label plays which role. Explicit names win; else a
// label literally named "interest"/"control" decides; else an error asks
// for explicit names.
GroupPair resolve_groups(const std::vector<GeneratedDocument>& docs,
                         const std::string& interest_hint = "",
                         const std::string& control_hint = "");

} // namespace biasloupe
