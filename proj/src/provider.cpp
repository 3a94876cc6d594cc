#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "biasloupe/provider.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "biasloupe/errors.hpp"

namespace biasloupe {

using nlohmann::json;

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

uint64_t hash_str(uint64_t h, const std::string& s) {
    for (unsigned char c : s) h = splitmix64(h ^ c);
    return h;
}

// Planted discursive pools for the offline mock. Interest-group stories
// lean on overcoming/inspiration language, control-group stories on
// everyday-life language, with some cross-contamination in both directions
// so bias scores stay finite.
const char* kInspirational[] = {
    "Con el apoyo adecuado, cualquier persona puede superar los obstáculos.",
    "Su historia se convirtió en una inspiración para muchos.",
    "Logró alcanzar sus metas a pesar de las barreras que pueda encontrar.",
    "Demostró una determinación admirable frente a cada desafío.",
    "Trabajó para hacer del mundo un lugar más inclusivo y accesible.",
    "Se convirtió en un ejemplo de superación para toda la comunidad.",
    "Superó cada obstáculo con valentía y una determinación serena.",
    "Nada le impidió alcanzar las metas que se había propuesto.",
};

const char* kEveryday[] = {
    "Se detuvo un momento para disfrutar del paisaje antes de continuar.",
    "Las parejas paseaban de la mano por el sendero principal.",
    "Los amigos compartían risas y conversaciones al final de la tarde.",
    "Los niños jugaban en los espacios de juego del parque.",
    "Todos disfrutaban del momento sin ninguna prisa.",
    "La tarde transcurrió entre conversaciones tranquilas y paseos cortos.",
    "Disfrutó del paisaje mientras caminaba por el parque.",
    "Compartieron una risa sincera mientras tomaban un café.",
};

const char* kNeutral[] = {
    "Era una mañana tranquila en la ciudad.",
    "El día había comenzado sin sobresaltos.",
    "El tiempo pasaba despacio aquella tarde.",
    "La ciudad seguía su ritmo habitual.",
};

template <size_t N>
const char* pick(const char* const (&pool)[N], uint64_t h) {
    return pool[h % N];
}

} // namespace

ProviderResult EchoProvider::complete(const ProviderRequest& req) {
    return ProviderResult::ok("STORY(" + req.scenario_id + ", " + req.marker_id + ", " +
                              std::to_string(req.sample_index) + ")");
}

ProviderResult MockProvider::complete(const ProviderRequest& req) {
    uint64_t h = splitmix64(seed_ ^ 0xB1A5ull);
    h = hash_str(h, req.scenario_id);
    h = hash_str(h, req.marker_id);
    h = hash_str(h, req.name);
    h = splitmix64(h ^ static_cast<uint64_t>(req.sample_index));
    h = splitmix64(h ^ (req.interest ? 0x1ull : 0x2ull));

    // Inspirational-pool odds per draw, in percent.
    const uint64_t insp_odds = req.interest ? 75 : 12;
    const auto draw_pool = [&](uint64_t salt) {
        const uint64_t r = splitmix64(h ^ salt);
        return (r % 100 < insp_odds) ? pick(kInspirational, splitmix64(r))
                                     : pick(kEveryday, splitmix64(r));
    };

    std::string story;
    story += "Esta es la historia de " + req.name + ", " + req.scenario_text + ". ";
    story += std::string(pick(kNeutral, splitmix64(h ^ 11))) + " ";
    story += std::string(draw_pool(21)) + " ";
    story += req.name + ", " + req.marker_text + ", seguía su camino con calma. ";
    story += std::string(draw_pool(22)) + " ";
    story += std::string(pick(kNeutral, splitmix64(h ^ 12))) + " ";
    story += draw_pool(23);
    return ProviderResult::ok(std::move(story));
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    const auto& url = config_.base_url;
    if (url.empty()) throw ConfigError("generation endpoint base URL is empty; set one in the config "
                                       "or via BIASLOUPE_BASE_URL");
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("base URL must start with http:// or https://: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    std::string prefix;
    if (path_start == std::string::npos) {
        host_ = url;
    } else {
        host_ = url.substr(0, path_start);
        prefix = url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
    if (prefix.empty())
        path_ = "/v1/chat/completions";
    else if (prefix.ends_with("/chat/completions"))
        path_ = prefix;
    else
        path_ = prefix + "/chat/completions";
}

ProviderResult HttpProvider::complete(const ProviderRequest& req) {
    json body{{"model", config_.model},
              {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})},
              {"temperature", req.params.temperature},
              {"max_tokens", req.params.max_tokens}};
    if (req.params.seed) body["seed"] = *req.params.seed + static_cast<uint64_t>(req.sample_index);

    httplib::Client cli(host_);
    cli.set_connection_timeout(config_.timeout_seconds, 0);
    cli.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) return ProviderResult::retryable("connection failed: " + httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403)
        return ProviderResult::fatal("endpoint rejected authentication (HTTP " +
                                     std::to_string(res->status) +
                                     "); check the BIASLOUPE_API_KEY environment variable");
    if (res->status == 408 || res->status == 429 || res->status >= 500)
        return ProviderResult::retryable("HTTP " + std::to_string(res->status));
    if (res->status != 200)
        return ProviderResult::fatal("HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
        json j = json::parse(res->body);
        std::string text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (text.empty()) return ProviderResult::retryable("endpoint returned an empty completion");
        return ProviderResult::ok(std::move(text));
    } catch (const json::exception& e) {
        return ProviderResult::retryable(std::string("malformed completion response: ") + e.what());
    }
}

GenerationOutput generate_corpus(const std::vector<PromptPair>& grid,
                                 const std::vector<Marker>& interest_markers,
                                 const std::vector<Marker>& control_markers,
                                 const std::vector<Scenario>& scenarios, const GroupPair& groups,
                                 GenerationProvider& provider, const GenParams& params,
                                 const GenerateOptions& options) {
    if (options.samples_per_prompt < 1) throw ConfigError("samples_per_prompt must be >= 1");

    std::map<std::string, const Marker*> marker_by_id;
    for (const auto& m : interest_markers) marker_by_id[m.id] = &m;
    for (const auto& m : control_markers) marker_by_id[m.id] = &m;
    std::map<std::string, const Scenario*> scenario_by_id;
    for (const auto& s : scenarios) scenario_by_id[s.id] = &s;

    struct Job {
        ProviderRequest request;
        std::string group; // display name
    };
    std::vector<Job> jobs;
    // A (scenario, marker) cell repeats across names: ordinal keeps
    // (scenario_id, marker_id, sample_index) unique.
    std::map<std::pair<std::string, std::string>, int> cell_ordinal;
    for (const auto& pp : grid) {
        const Scenario* sc = scenario_by_id.at(pp.scenario_id);
        for (const bool interest : {true, false}) {
            const std::string& marker_id = interest ? pp.interest_marker_id : pp.control_marker_id;
            const Marker* mk = marker_by_id.at(marker_id);
            const int ordinal = cell_ordinal[{pp.scenario_id, marker_id}]++;
            for (int k = 0; k < options.samples_per_prompt; ++k) {
                Job job;
                job.group = interest ? groups.interest : groups.control;
                job.request.prompt = interest ? pp.interest_prompt : pp.control_prompt;
                job.request.scenario_id = pp.scenario_id;
                job.request.scenario_text = sc->text;
                job.request.marker_id = marker_id;
                job.request.marker_text = mk->text;
                job.request.name = pp.name;
                job.request.interest = interest;
                job.request.sample_index = ordinal * options.samples_per_prompt + k;
                job.request.params = params;
                jobs.push_back(std::move(job));
            }
        }
    }

    const auto doc_id_of = [](const Job& job) {
        return job.request.scenario_id + "__" + job.request.marker_id + "__" +
               std::to_string(job.request.sample_index);
    };

    struct Slot {
        bool ok = false;
        GeneratedDocument doc;
        std::string fail_reason;
        int retries = 0;
    };
    std::vector<Slot> slots(jobs.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> fatal{false};
    std::mutex fatal_mu;
    std::string fatal_message;

    const auto run_job = [&](size_t i) {
        const Job& job = jobs[i];
        Slot& slot = slots[i];
        const int max_retries = std::max(0, options.max_retries);
        for (int attempt = 0; attempt <= max_retries; ++attempt) {
            if (fatal.load()) return;
            if (attempt > 0) {
                ++slot.retries;
                const auto delay = std::chrono::milliseconds(
                    std::min<long long>(8000, static_cast<long long>(options.retry_base_ms) << (attempt - 1)));
                std::this_thread::sleep_for(delay);
            }
            ProviderResult res = provider.complete(job.request);
            if (res.outcome == ProviderResult::Outcome::Ok) {
                slot.ok = true;
                slot.doc.doc_id = doc_id_of(job);
                slot.doc.group = job.group;
                slot.doc.scenario_id = job.request.scenario_id;
                slot.doc.marker_id = job.request.marker_id;
                slot.doc.sample_index = job.request.sample_index;
                slot.doc.prompt = job.request.prompt;
                slot.doc.text = std::move(res.text);
                slot.doc.model_name = provider.model_name();
                slot.doc.generation_params = job.request.params;
                return;
            }
            if (res.outcome == ProviderResult::Outcome::Fatal) {
                std::lock_guard lock(fatal_mu);
                fatal_message = res.error;
                fatal.store(true);
                return;
            }
            slot.fail_reason = res.error;
        }
    };

    const int concurrency =
        provider.thread_safe() ? std::max(1, options.concurrency) : 1;
    if (concurrency == 1 || jobs.size() <= 1) {
        for (size_t i = 0; i < jobs.size() && !fatal.load(); ++i) run_job(i);
    } else {
        std::vector<std::thread> workers;
        const size_t n_workers = std::min<size_t>(static_cast<size_t>(concurrency), jobs.size());
        for (size_t w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    const size_t i = next.fetch_add(1);
                    if (i >= jobs.size() || fatal.load()) return;
                    run_job(i);
                }
            });
        }
        for (auto& t : workers) t.join();
    }
    if (fatal.load()) throw GenerationError(fatal_message);

    GenerationOutput out;
    out.manifest.grid_size = grid.size();
    out.manifest.samples_per_prompt = options.samples_per_prompt;
    out.manifest.requested = jobs.size();
    out.manifest.model_name = provider.model_name();
    out.manifest.params = params;
    for (size_t i = 0; i < jobs.size(); ++i) {
        if (slots[i].retries > 0) out.manifest.retries.emplace_back(doc_id_of(jobs[i]), slots[i].retries);
        if (slots[i].ok)
            out.documents.push_back(std::move(slots[i].doc));
        else
            out.manifest.skipped.push_back({doc_id_of(jobs[i]), slots[i].fail_reason});
    }
    out.manifest.generated = out.documents.size();
    if (!jobs.empty() && out.documents.empty())
        throw GenerationError("all " + std::to_string(jobs.size()) + " generation requests failed; last "
                              "reason: " + out.manifest.skipped.back().reason);
    if (!out.manifest.skipped.empty())
        warn(std::to_string(out.manifest.skipped.size()) + " of " + std::to_string(jobs.size()) +
             " generation requests were skipped after retries");

    std::sort(out.documents.begin(), out.documents.end(),
              [](const GeneratedDocument& a, const GeneratedDocument& b) {
                  return std::tie(a.scenario_id, a.marker_id, a.sample_index) <
                         std::tie(b.scenario_id, b.marker_id, b.sample_index);
              });
    std::sort(out.manifest.retries.begin(), out.manifest.retries.end());
    std::sort(out.manifest.skipped.begin(), out.manifest.skipped.end(),
              [](const SkippedRequest& a, const SkippedRequest& b) { return a.doc_id < b.doc_id; });
    return out;
}

void save_generation_manifest(const GenerationManifest& manifest, const std::string& path) {
    json retries = json::object();
    for (const auto& [doc_id, n] : manifest.retries) retries[doc_id] = n;
    json skipped = json::array();
    for (const auto& s : manifest.skipped) skipped.push_back({{"doc_id", s.doc_id}, {"reason", s.reason}});
    json params{{"temperature", manifest.params.temperature}, {"max_tokens", manifest.params.max_tokens}};
    if (manifest.params.seed) params["seed"] = *manifest.params.seed;
    json j{{"grid_size", manifest.grid_size},
           {"samples_per_prompt", manifest.samples_per_prompt},
           {"requested", manifest.requested},
           {"generated", manifest.generated},
           {"skipped", skipped},
           {"retries", retries},
           {"model_name", manifest.model_name},
           {"provider", manifest.provider_kind},
           {"generation_params", params}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write generation manifest: " + path);
    out << j.dump(2) << '\n';
}

} // namespace biasloupe
