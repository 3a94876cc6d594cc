#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "biasloupe/corpus.hpp"

namespace biasloupe {

struct ProviderRequest {
    std::string prompt;
    std::string scenario_id;
    std::string scenario_text;
    std::string marker_id;
    std::string marker_text;
    std::string name;
    bool interest = false;
    int sample_index = 0;
    GenParams params;
};

struct ProviderResult {
    enum class Outcome { Ok, Retryable, Fatal };
    Outcome outcome = Outcome::Fatal;
    std::string text;
    std::string error;

    static ProviderResult ok(std::string text) { return {Outcome::Ok, std::move(text), {}}; }
    static ProviderResult retryable(std::string err) { return {Outcome::Retryable, {}, std::move(err)}; }
    static ProviderResult fatal(std::string err) { return {Outcome::Fatal, {}, std::move(err)}; }
};

class GenerationProvider {
public:
    virtual ~GenerationProvider() = default;
    virtual ProviderResult complete(const ProviderRequest& req) = 0;
    virtual std::string model_name() const = 0;
    // True when complete() may be called from several threads at once.
    virtual bool thread_safe() const { return true; }
};

// Echoes "STORY(scenario_id, marker_id, k)"; the minimal offline fixture.
class EchoProvider final : public GenerationProvider {
public:
    ProviderResult complete(const ProviderRequest& req) override;
    std::string model_name() const override { return "echo"; }
};

// Deterministic story synthesizer: composes short Spanish stories whose
// discursive texture differs by group, so the full pipeline can run and be
// demonstrated offline.
class MockProvider final : public GenerationProvider {
public:
    explicit MockProvider(uint64_t seed = 0) : seed_(seed) {}
    ProviderResult complete(const ProviderRequest& req) override;
    std::string model_name() const override { return "mock-story"; }

private:
    uint64_t seed_;
};

struct HttpProviderConfig {
    std::string base_url;     // e.g. http://localhost:8000 or https://api.example.com/v1
    std::string api_key;      // empty: no Authorization header
    std::string model = "gpt-4o-mini";
    int timeout_seconds = 120;
};

// POSTs the de-facto chat-completion JSON protocol (`messages` in,
// `choices[0].message.content` out) to <base_url>/v1/chat/completions.
class HttpProvider final : public GenerationProvider {
public:
    explicit HttpProvider(HttpProviderConfig config);
    ProviderResult complete(const ProviderRequest& req) override;
    std::string model_name() const override { return config_.model; }

private:
    HttpProviderConfig config_;
    std::string host_;  // scheme://host[:port]
    std::string path_;
};

struct GenerateOptions {
    int samples_per_prompt = 5;
    int max_retries = 3;
    int retry_base_ms = 250; // doubles per attempt
    int concurrency = 4;
};

struct SkippedRequest {
    std::string doc_id;
    std::string reason;
};

struct GenerationManifest {
    size_t grid_size = 0;
    int samples_per_prompt = 0;
    size_t requested = 0;
    size_t generated = 0;
    std::vector<SkippedRequest> skipped;
    std::vector<std::pair<std::string, int>> retries; // doc_id -> retry count, only when > 0
    std::string model_name;
    std::string provider_kind;
    GenParams params;
};

struct GenerationOutput {
    std::vector<GeneratedDocument> documents; // sorted by (scenario_id, marker_id, sample_index)
    GenerationManifest manifest;
};

// Runs 2 x |grid| x samples_per_prompt requests with a bounded in-flight
// limit. Per-request failures retry then skip; fatal provider errors abort.
GenerationOutput generate_corpus(const std::vector<PromptPair>& grid,
                                 const std::vector<Marker>& interest_markers,
                                 const std::vector<Marker>& control_markers,
                                 const std::vector<Scenario>& scenarios, const GroupPair& groups,
                                 GenerationProvider& provider, const GenParams& params,
                                 const GenerateOptions& options);

void save_generation_manifest(const GenerationManifest& manifest, const std::string& path);

} // namespace biasloupe
