#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "biasloupe/classes.hpp"

namespace biasloupe {

// PMI(w, G) = ln( (freq_wG/total_G) / (freq_w_all/total_all) ).
// Returns -inf when freq_wG is zero. Natural log throughout.
double pmi(int64_t freq_wG, int64_t total_G, int64_t freq_w_all, int64_t total_all);

// BS = ln(freq_gi/M_gi) - ln(freq_gc/M_gc); +inf when only GI has the
// class, -inf when only GC does. Antisymmetric under swapping the groups.
double bias_score(int64_t freq_gi, int64_t freq_gc, int64_t M_gi, int64_t M_gc);

struct FilterConfig {
    std::unordered_set<std::string> intrinsic_lemmas;
    std::string intrinsic_id;                              // file path or label, for the audit record
    std::map<int, int64_t> min_freq = {{1, 40}, {2, 20}, {3, 15}, {4, 10}};
    double min_abs_bs = 0.5;

    // Thresholds must be positive and non-increasing in content count.
    void validate() const;
    int64_t threshold_for(int content_count) const;

    static std::unordered_set<std::string> load_lemma_list(const std::string& path);
};

struct BiasEntry {
    ClassKey key;
    std::vector<std::string> members;
    int64_t freq_gi = 0;
    int64_t freq_gc = 0;
    double pmi_gi = 0.0;
    double pmi_gc = 0.0;
    double bs = 0.0; // finite, +inf or -inf
};

struct FilterAudit {
    int64_t input_classes = 0;
    int64_t dropped_intrinsic = 0;
    int64_t dropped_frequency = 0;
    int64_t dropped_min_abs_bs = 0;
    int64_t retained = 0;
};

struct BiasTable {
    std::vector<BiasEntry> entries; // sorted by bs descending, +inf first
    double max_finite_abs_bs = 0.0;
    bool has_finite = false;
    FilterConfig filters;
    FilterAudit audit;
    GroupPair groups;
    int64_t content_tokens_gi = 0;
    int64_t content_tokens_gc = 0;
    // Resource paths recorded so downstream stages can reuse the same
    // normalization without re-specifying it.
    std::string lemmas_path;
    std::string stopwords_path;

    const BiasEntry* find(const std::string& key_str) const;
    void rebuild_index();

private:
    std::unordered_map<std::string, size_t> index_;
};

// PMI/BS for every class, unfiltered.
std::vector<BiasEntry> compute_bias_entries(const ClassTable& table);

// Drops intrinsic-lemma classes, then under-threshold frequencies, then
// finite entries with |bs| below min_abs_bs. Infinite entries are resolved
// at fragment scoring, never here.
BiasTable apply_filters(const ClassTable& table, const FilterConfig& filter);

// Shuffles document group labels (group sizes preserved) with a seeded
// generator, recomputes finite BS values of frequency-surviving classes and
// returns the standard deviation of the pooled distribution. `pooled_out`,
// when given, receives the distribution itself.
double calibrate_threshold(std::span<const DocAnalysis> docs, int n_partitions, uint64_t seed,
                           const FilterConfig& filter, std::vector<double>* pooled_out = nullptr);

void save_bias_table(const BiasTable& table, const std::string& path);
BiasTable load_bias_table(const std::string& path);

} // namespace biasloupe
