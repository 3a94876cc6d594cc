#include "biasloupe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "json.hpp"

#include "biasloupe/errors.hpp"

namespace biasloupe {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json bs_to_json(double v) {
    if (v == kInf) return "+inf";
    if (v == -kInf) return "-inf";
    return v;
}

double bs_from_json(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        throw IoError("unrecognized bias value: " + s);
    }
    return j.get<double>();
}

// Deterministic Fisher-Yates; std::shuffle's draw sequence is
// implementation-defined, which would break cross-toolchain reproducibility.
void shuffle_indices(std::vector<uint32_t>& idx, std::mt19937_64& rng) {
    for (size_t i = idx.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

bool key_has_intrinsic(const ClassKey& key, const std::unordered_set<std::string>& intrinsic) {
    if (intrinsic.empty()) return false;
    for (const auto& lemma : key.lemmas)
        if (intrinsic.count(lemma)) return true;
    return false;
}

} // namespace

double pmi(int64_t freq_wG, int64_t total_G, int64_t freq_w_all, int64_t total_all) {
    if (total_G <= 0 || total_all <= 0) throw AnalysisError("pmi: group totals must be positive");
    if (freq_wG < 0 || freq_wG > freq_w_all) throw AnalysisError("pmi: inconsistent frequencies");
    if (freq_wG == 0) return -kInf;
    return std::log((static_cast<double>(freq_wG) / static_cast<double>(total_G)) /
                    (static_cast<double>(freq_w_all) / static_cast<double>(total_all)));
}

double bias_score(int64_t freq_gi, int64_t freq_gc, int64_t M_gi, int64_t M_gc) {
    if (M_gi <= 0 || M_gc <= 0) throw AnalysisError("bias_score: group totals must be positive");
    if (freq_gi <= 0 && freq_gc <= 0)
        throw AnalysisError("bias_score: class with zero frequency in both groups cannot exist");
    if (freq_gi == 0) return -kInf;
    if (freq_gc == 0) return kInf;
    return std::log(static_cast<double>(freq_gi) / static_cast<double>(M_gi)) -
           std::log(static_cast<double>(freq_gc) / static_cast<double>(M_gc));
}

void FilterConfig::validate() const {
    if (min_freq.empty()) throw ConfigError("min_freq thresholds must not be empty");
    int64_t prev = std::numeric_limits<int64_t>::max();
    for (const auto& [n, thr] : min_freq) {
        if (n < 1) throw ConfigError("min_freq content counts start at 1");
        if (thr <= 0) throw ConfigError("min_freq thresholds must be positive");
        if (thr > prev)
            throw ConfigError("min_freq thresholds must be non-increasing in content count");
        prev = thr;
    }
    if (min_abs_bs < 0) throw ConfigError("min_abs_bs must be >= 0");
}

int64_t FilterConfig::threshold_for(int content_count) const {
    auto it = min_freq.find(content_count);
    if (it != min_freq.end()) return it->second;
    // Fall back to the largest configured order (thresholds are non-increasing).
    return min_freq.rbegin()->second;
}

std::unordered_set<std::string> FilterConfig::load_lemma_list(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("lemma list not readable: " + path);
    std::unordered_set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.insert(fold_utf8(line));
    }
    return out;
}

std::vector<BiasEntry> compute_bias_entries(const ClassTable& table) {
    const int64_t total_all = table.content_tokens_gi + table.content_tokens_gc;
    std::vector<BiasEntry> entries;
    entries.reserve(table.classes.size());
    for (const auto& [key_str, cc] : table.classes) {
        BiasEntry e;
        e.key = ClassKey::parse(key_str);
        e.members.assign(cc.members.begin(), cc.members.end());
        e.freq_gi = cc.freq_gi;
        e.freq_gc = cc.freq_gc;
        const int64_t freq_all = cc.freq_gi + cc.freq_gc;
        e.pmi_gi = pmi(cc.freq_gi, table.content_tokens_gi, freq_all, total_all);
        e.pmi_gc = pmi(cc.freq_gc, table.content_tokens_gc, freq_all, total_all);
        e.bs = bias_score(cc.freq_gi, cc.freq_gc, table.content_tokens_gi, table.content_tokens_gc);
        entries.push_back(std::move(e));
    }
    return entries;
}

BiasTable apply_filters(const ClassTable& table, const FilterConfig& filter) {
    filter.validate();
    BiasTable out;
    out.filters = filter;
    out.groups = table.groups;
    out.content_tokens_gi = table.content_tokens_gi;
    out.content_tokens_gc = table.content_tokens_gc;

    auto entries = compute_bias_entries(table);
    out.audit.input_classes = static_cast<int64_t>(entries.size());
    for (auto& e : entries) {
        if (key_has_intrinsic(e.key, filter.intrinsic_lemmas)) {
            ++out.audit.dropped_intrinsic;
            continue;
        }
        if (e.freq_gi + e.freq_gc < filter.threshold_for(e.key.content_count())) {
            ++out.audit.dropped_frequency;
            continue;
        }
        if (std::isfinite(e.bs) && std::abs(e.bs) < filter.min_abs_bs) {
            ++out.audit.dropped_min_abs_bs;
            continue;
        }
        out.entries.push_back(std::move(e));
    }
    out.audit.retained = static_cast<int64_t>(out.entries.size());

    for (const auto& e : out.entries) {
        if (std::isfinite(e.bs)) {
            out.has_finite = true;
            out.max_finite_abs_bs = std::max(out.max_finite_abs_bs, std::abs(e.bs));
        }
    }
    std::sort(out.entries.begin(), out.entries.end(), [](const BiasEntry& a, const BiasEntry& b) {
        if (a.bs != b.bs) return a.bs > b.bs;
        return a.key < b.key;
    });
    out.rebuild_index();
    if (out.entries.empty()) warn("no equivalence class survived the filters");
    return out;
}

double calibrate_threshold(std::span<const DocAnalysis> docs, int n_partitions, uint64_t seed,
                           const FilterConfig& filter, std::vector<double>* pooled_out) {
    if (docs.size() < 2) throw AnalysisError("calibration needs at least 2 documents");
    if (n_partitions < 2) throw AnalysisError("calibration needs at least 2 partitions");

    // Intern class keys once; partitions then work on dense arrays.
    std::unordered_map<std::string, uint32_t> key_ids;
    std::vector<ClassKey> keys;
    struct DocCounts {
        std::vector<std::pair<uint32_t, int32_t>> class_counts;
        int64_t content_tokens = 0;
    };
    std::vector<DocCounts> per_doc(docs.size());
    size_t n_gi = 0;
    for (size_t d = 0; d < docs.size(); ++d) {
        if (docs[d].interest) ++n_gi;
        per_doc[d].content_tokens = docs[d].content_tokens;
        std::unordered_map<uint32_t, int32_t> local;
        for (const auto& occ : docs[d].occurrences) {
            ClassKey key = ClassKey::from_occurrence(occ);
            if (key_has_intrinsic(key, filter.intrinsic_lemmas)) continue;
            auto [it, inserted] = key_ids.try_emplace(key.str(), static_cast<uint32_t>(keys.size()));
            if (inserted) keys.push_back(std::move(key));
            ++local[it->second];
        }
        per_doc[d].class_counts.assign(local.begin(), local.end());
    }
    if (n_gi == 0 || n_gi == docs.size())
        throw AnalysisError("calibration needs documents in both groups");

    const size_t n_classes = keys.size();
    std::vector<int64_t> thresholds(n_classes);
    for (size_t k = 0; k < n_classes; ++k) thresholds[k] = filter.threshold_for(keys[k].content_count());

    std::vector<uint32_t> order(docs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<uint32_t>(i);
    std::mt19937_64 rng(seed);

    std::vector<double> pooled;
    std::vector<int64_t> freq_gi(n_classes), freq_gc(n_classes);
    for (int p = 0; p < n_partitions; ++p) {
        shuffle_indices(order, rng);
        std::fill(freq_gi.begin(), freq_gi.end(), 0);
        std::fill(freq_gc.begin(), freq_gc.end(), 0);
        int64_t M_gi = 0, M_gc = 0;
        for (size_t pos = 0; pos < order.size(); ++pos) {
            const bool gi = pos < n_gi;
            const auto& dc = per_doc[order[pos]];
            (gi ? M_gi : M_gc) += dc.content_tokens;
            auto& freq = gi ? freq_gi : freq_gc;
            for (const auto& [cls, cnt] : dc.class_counts) freq[cls] += cnt;
        }
        if (M_gi == 0 || M_gc == 0) continue; // degenerate partition, all content on one side
        for (size_t k = 0; k < n_classes; ++k) {
            const int64_t combined = freq_gi[k] + freq_gc[k];
            if (combined < thresholds[k] || combined == 0) continue;
            if (freq_gi[k] == 0 || freq_gc[k] == 0) continue; // finite values only
            pooled.push_back(bias_score(freq_gi[k], freq_gc[k], M_gi, M_gc));
        }
    }
    if (pooled.empty())
        throw AnalysisError("no equivalence class survives the frequency thresholds in any "
                            "partition; use a larger corpus or lower thresholds");

    double mean = 0;
    for (double v : pooled) mean += v;
    mean /= static_cast<double>(pooled.size());
    double var = 0;
    for (double v : pooled) var += (v - mean) * (v - mean);
    var /= static_cast<double>(pooled.size());
    if (pooled_out) *pooled_out = std::move(pooled);
    return std::sqrt(var);
}

const BiasEntry* BiasTable::find(const std::string& key_str) const {
    auto it = index_.find(key_str);
    return it == index_.end() ? nullptr : &entries[it->second];
}

void BiasTable::rebuild_index() {
    index_.clear();
    index_.reserve(entries.size());
    for (size_t i = 0; i < entries.size(); ++i) index_.emplace(entries[i].key.str(), i);
}

void save_bias_table(const BiasTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write bias table: " + path);

    json min_freq = json::object();
    for (const auto& [n, thr] : table.filters.min_freq) min_freq[std::to_string(n)] = thr;
    json header{
        {"type", "header"},
        {"groups", {{"interest", table.groups.interest}, {"control", table.groups.control}}},
        {"content_tokens", {{"interest", table.content_tokens_gi}, {"control", table.content_tokens_gc}}},
        {"max_finite_abs_bs", table.max_finite_abs_bs},
        {"has_finite", table.has_finite},
        {"filters_applied",
         {{"intrinsic", table.filters.intrinsic_id},
          {"min_freq", min_freq},
          {"min_abs_bs", table.filters.min_abs_bs},
          {"dropped",
           {{"intrinsic", table.audit.dropped_intrinsic},
            {"frequency", table.audit.dropped_frequency},
            {"min_abs_bs", table.audit.dropped_min_abs_bs}}},
          {"input_classes", table.audit.input_classes},
          {"retained", table.audit.retained}}},
        {"resources", {{"lemmas", table.lemmas_path}, {"stopwords", table.stopwords_path}}}};
    out << header.dump() << '\n';

    for (const auto& e : table.entries) {
        json j{{"key", e.key.lemmas},      {"content_count", e.key.content_count()},
               {"members", e.members},     {"freq_gi", e.freq_gi},
               {"freq_gc", e.freq_gc},     {"pmi_gi", bs_to_json(e.pmi_gi)},
               {"pmi_gc", bs_to_json(e.pmi_gc)}, {"bs", bs_to_json(e.bs)}};
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("short write to bias table: " + path);
}

BiasTable load_bias_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read bias table: " + path);
    BiasTable table;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("bias table " + path + " line " + std::to_string(lineno) + ": " + e.what());
        }
        try {
            if (!have_header) {
                if (!j.contains("type") || j.at("type") != "header")
                    throw IoError("bias table " + path + ": first line must be the header object");
                table.groups.interest = j.at("groups").at("interest").get<std::string>();
                table.groups.control = j.at("groups").at("control").get<std::string>();
                table.content_tokens_gi = j.at("content_tokens").at("interest").get<int64_t>();
                table.content_tokens_gc = j.at("content_tokens").at("control").get<int64_t>();
                table.max_finite_abs_bs = j.at("max_finite_abs_bs").get<double>();
                table.has_finite = j.at("has_finite").get<bool>();
                const auto& fa = j.at("filters_applied");
                table.filters.intrinsic_id = fa.at("intrinsic").get<std::string>();
                table.filters.min_abs_bs = fa.at("min_abs_bs").get<double>();
                table.filters.min_freq.clear();
                for (const auto& [k, v] : fa.at("min_freq").items())
                    table.filters.min_freq[std::stoi(k)] = v.get<int64_t>();
                table.audit.dropped_intrinsic = fa.at("dropped").at("intrinsic").get<int64_t>();
                table.audit.dropped_frequency = fa.at("dropped").at("frequency").get<int64_t>();
                table.audit.dropped_min_abs_bs = fa.at("dropped").at("min_abs_bs").get<int64_t>();
                table.audit.input_classes = fa.at("input_classes").get<int64_t>();
                table.audit.retained = fa.at("retained").get<int64_t>();
                table.lemmas_path = j.at("resources").at("lemmas").get<std::string>();
                table.stopwords_path = j.at("resources").at("stopwords").get<std::string>();
                have_header = true;
                continue;
            }
            BiasEntry e;
            e.key = ClassKey::from_lemmas(j.at("key").get<std::vector<std::string>>());
            e.members = j.at("members").get<std::vector<std::string>>();
            e.freq_gi = j.at("freq_gi").get<int64_t>();
            e.freq_gc = j.at("freq_gc").get<int64_t>();
            e.pmi_gi = bs_from_json(j.at("pmi_gi"));
            e.pmi_gc = bs_from_json(j.at("pmi_gc"));
            e.bs = bs_from_json(j.at("bs"));
            table.entries.push_back(std::move(e));
        } catch (const json::exception& e) {
            throw IoError("bias table " + path + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_header) throw IoError("bias table " + path + ": missing header line");
    table.rebuild_index();
    return table;
}

} // namespace biasloupe
