#include "biasloupe/corpus.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

#include "biasloupe/errors.hpp"

namespace biasloupe {

using nlohmann::json;

namespace {

size_t count_slot(const std::string& tmpl, const std::string& slot) {
    size_t n = 0, pos = 0;
    while ((pos = tmpl.find(slot, pos)) != std::string::npos) {
        ++n;
        pos += slot.size();
    }
    return n;
}

std::string render(std::string tmpl, const std::string& name, const std::string& marker,
                   const std::string& scenario) {
    const auto sub = [&](const std::string& slot, const std::string& value) {
        auto pos = tmpl.find(slot);
        tmpl.replace(pos, slot.size(), value);
    };
    sub("{name}", name);
    sub("{marker}", marker);
    sub("{scenario}", scenario);
    return tmpl;
}

json params_to_json(const GenParams& p) {
    json j{{"temperature", p.temperature}, {"max_tokens", p.max_tokens}};
    if (p.seed) j["seed"] = *p.seed;
    return j;
}

GenParams params_from_json(const json& j) {
    GenParams p;
    p.temperature = j.at("temperature").get<double>();
    p.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("seed") && !j.at("seed").is_null()) p.seed = j.at("seed").get<uint64_t>();
    return p;
}

} // namespace

std::vector<PromptPair> build_prompt_grid(const std::vector<Scenario>& scenarios,
                                          const std::vector<Marker>& interest_markers,
                                          const std::vector<Marker>& control_markers,
                                          const std::string& prompt_template,
                                          const std::vector<std::string>& names,
                                          const std::string& template_id) {
    for (const char* slot : {"{name}", "{marker}", "{scenario}"}) {
        const size_t n = count_slot(prompt_template, slot);
        if (n != 1)
            throw ConfigError("prompt template must contain " + std::string(slot) + " exactly once (found " +
                              std::to_string(n) + ")");
    }
    if (interest_markers.empty() || control_markers.empty())
        throw ConfigError("at least one marker per group is required");
    if (interest_markers.size() != control_markers.size())
        throw ConfigError("marker lists must have equal length for positional pairing (" +
                          std::to_string(interest_markers.size()) + " interest vs " +
                          std::to_string(control_markers.size()) + " control)");
    if (names.empty()) throw ConfigError("at least one protagonist name is required");

    std::vector<PromptPair> grid;
    grid.reserve(scenarios.size() * interest_markers.size() * names.size());
    for (const auto& sc : scenarios) {
        for (size_t m = 0; m < interest_markers.size(); ++m) {
            for (const auto& name : names) {
                PromptPair pp;
                pp.scenario_id = sc.id;
                pp.interest_marker_id = interest_markers[m].id;
                pp.control_marker_id = control_markers[m].id;
                pp.name = name;
                pp.template_id = template_id;
                pp.interest_prompt = render(prompt_template, name, interest_markers[m].text, sc.text);
                pp.control_prompt = render(prompt_template, name, control_markers[m].text, sc.text);
                if (!single_span_diff(pp.interest_prompt, pp.control_prompt))
                    throw ConfigError("prompts for scenario '" + sc.id + "' markers '" +
                                      pp.interest_marker_id + "'/'" + pp.control_marker_id +
                                      "' do not form a minimal pair");
                grid.push_back(std::move(pp));
            }
        }
    }
    return grid;
}

std::optional<SpanDiff> single_span_diff(const std::string& a, const std::string& b) {
    if (a == b) return std::nullopt;
    size_t prefix = 0;
    const size_t max_prefix = std::min(a.size(), b.size());
    while (prefix < max_prefix && a[prefix] == b[prefix]) ++prefix;
    size_t suffix = 0;
    while (suffix < max_prefix - prefix && a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) ++suffix;
    return SpanDiff{prefix, a.size() - prefix - suffix, b.size() - prefix - suffix};
}

void save_corpus(const std::vector<GeneratedDocument>& docs, const std::string& path) {
    std::vector<const GeneratedDocument*> sorted;
    sorted.reserve(docs.size());
    for (const auto& d : docs) sorted.push_back(&d);
    std::sort(sorted.begin(), sorted.end(), [](const GeneratedDocument* x, const GeneratedDocument* y) {
        return std::tie(x->scenario_id, x->marker_id, x->sample_index) <
               std::tie(y->scenario_id, y->marker_id, y->sample_index);
    });

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus file: " + path);
    for (const auto* d : sorted) {
        json j{{"doc_id", d->doc_id},
               {"group", d->group},
               {"scenario_id", d->scenario_id},
               {"marker_id", d->marker_id},
               {"sample_index", d->sample_index},
               {"prompt", d->prompt},
               {"text", d->text},
               {"model_name", d->model_name},
               {"generation_params", params_to_json(d->generation_params)}};
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("short write to corpus file: " + path);
}

std::vector<GeneratedDocument> load_corpus(const std::string& path, const GroupPair* expect) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read corpus file: " + path);
    std::vector<GeneratedDocument> docs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path + " line " + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("corpus " + where + ": " + e.what());
        }
        GeneratedDocument d;
        try {
            d.doc_id = j.at("doc_id").get<std::string>();
            d.group = j.at("group").get<std::string>();
            d.scenario_id = j.at("scenario_id").get<std::string>();
            d.marker_id = j.at("marker_id").get<std::string>();
            d.sample_index = j.at("sample_index").get<int>();
            d.prompt = j.at("prompt").get<std::string>();
            d.text = j.at("text").get<std::string>();
            d.model_name = j.at("model_name").get<std::string>();
            d.generation_params = params_from_json(j.at("generation_params"));
        } catch (const json::exception& e) {
            throw IoError("corpus " + where + ": " + e.what());
        }
        if (d.text.empty()) throw IoError("corpus " + where + ": empty `text`");
        if (d.group.empty()) throw IoError("corpus " + where + ": empty `group`");
        if (expect && !expect->is_interest(d.group) && !expect->is_control(d.group))
            throw IoError("corpus " + where + ": unknown group label '" + d.group + "' (expected '" +
                          expect->interest + "' or '" + expect->control + "')");
        docs.push_back(std::move(d));
    }
    if (docs.empty()) warn("corpus file is empty: " + path);
    return docs;
}

std::vector<std::string> corpus_group_labels(const std::vector<GeneratedDocument>& docs) {
    std::vector<std::string> labels;
    for (const auto& d : docs)
        if (std::find(labels.begin(), labels.end(), d.group) == labels.end()) labels.push_back(d.group);
    return labels;
}

GroupPair resolve_groups(const std::vector<GeneratedDocument>& docs, const std::string& interest_hint,
                         const std::string& control_hint) {
    const auto labels = corpus_group_labels(docs);
    if (!interest_hint.empty() && !control_hint.empty()) {
        for (const auto& want : {interest_hint, control_hint})
            if (std::find(labels.begin(), labels.end(), want) == labels.end())
                throw AnalysisError("group '" + want + "' has no documents in the corpus");
        return GroupPair{interest_hint, control_hint};
    }
    if (labels.size() != 2)
        throw AnalysisError("corpus must contain exactly two group labels, found " +
                            std::to_string(labels.size()));
    if (labels[0] == "control") return GroupPair{labels[1], labels[0]};
    if (labels[1] == "control") return GroupPair{labels[0], labels[1]};
    if (labels[0] == "interest") return GroupPair{labels[0], labels[1]};
    if (labels[1] == "interest") return GroupPair{labels[1], labels[0]};
    throw AnalysisError("cannot infer group roles from labels '" + labels[0] + "'/'" + labels[1] +
                        "'; pass the interest and control names explicitly");
}

} // namespace biasloupe
