#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biasloupe/corpus.hpp"
#include "biasloupe/stats.hpp"

namespace biasloupe {

enum class ReportFormat { Markdown, Html, Json };

// Accepts "markdown"/"md", "html", "json"; anything else raises an error
// listing the supported names.
ReportFormat parse_report_format(const std::string& name);
std::string report_extension(ReportFormat format);

struct SpanRecord {
    std::vector<std::string> key_lemmas;
    double bs = 0.0;
    double contribution = 0.0;
    int sentence_index = 0;
    int token_begin = 0;
    int token_end = 0;
    uint32_t char_begin = 0; // relative to the fragment text
    uint32_t char_end = 0;
    std::string surface;
};

struct RankedRecord {
    std::string list; // "top" | "bottom"
    int rank = 0;
    std::string fragment_id;
    std::string doc_id;
    int sent_begin = 0;
    int sent_end = 0;
    uint32_t char_begin = 0;
    uint32_t char_end = 0;
    std::string center_marker;
    double score = 0.0;
    std::string text;
    std::vector<SpanRecord> spans;
};

struct RankedFile {
    GroupPair groups;
    int window = 3;
    size_t fragment_count = 0;
    std::vector<RankedRecord> top;
    std::vector<RankedRecord> bottom;
};

RankedFile load_ranking(const std::string& path);

struct ReportMeta {
    std::string corpus_path;
    std::string config_hash; // empty outside run-all
    size_t corpus_documents = 0;
};

// Two class tables (most positive / most negative BS), rows sorted by |BS|
// descending, values rounded to 2 decimals for display.
std::string render_class_tables(const BiasTable& table, int k_per_polarity, ReportFormat format);

// Every ranked fragment with contributing spans highlighted in the text.
// `corpus` resolves source metadata; a dangling doc_id is an error.
std::string render_fragments(const RankedFile& ranked, const std::vector<GeneratedDocument>& corpus,
                             ReportFormat format);

// Full expert-facing bundle: metadata, fragments, class tables, overlap
// flags. Byte-identical output for identical inputs.
std::string render_report(const RankedFile& ranked, const BiasTable& table,
                          const std::vector<GeneratedDocument>& corpus, const ReportMeta& meta,
                          ReportFormat format, int k_classes_per_polarity = 20);

void emit_class_tables(const BiasTable& table, int k_per_polarity, ReportFormat format,
                       const std::string& path);
void emit_fragment_report(const RankedFile& ranked, const std::vector<GeneratedDocument>& corpus,
                          ReportFormat format, const std::string& path);
void emit_report(const RankedFile& ranked, const BiasTable& table,
                 const std::vector<GeneratedDocument>& corpus, const ReportMeta& meta,
                 ReportFormat format, const std::string& path, int k_classes_per_polarity = 20);

} // namespace biasloupe
