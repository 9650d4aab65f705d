#pragma once

// Chat-completion dispatch with a file cache, bounded transport retries, and
// an invalid-answer retry loop that raises the sampling temperature step by
// step. A scripted mock client stands in for the network in tests.

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eaeval/prompting.hpp"

namespace eaeval::provider {

struct ProviderConfig {
    std::string endpoint = "mock";  // base URL for HTTP, or the tag "mock"
    std::string model_name = "default-model";
    double base_temperature = 0.0;
    int max_retries = 3;            // invalid-answer retries, beyond the first attempt
    double temperature_step = 0.2;
    int parallelism = 1;
    int timeout_ms = 30000;

    // Every attempt temperature (base + k*step, k <= max_retries) must lie in
    // [0, 2]. Throws DataError otherwise.
    void validate() const;
};

struct LlmResponse {
    std::string text;
    double temperature_used = 0.0;
    int attempt = 1;
    bool cached = false;
    std::string request_digest;
};

// Canonical request body: {"messages": [...], "model": ..., "temperature":
// ...} with sorted keys. Cache keys are the SHA-256 of this string, so they
// are independent of any endpoint dialect.
std::string canonical_request_body(const std::string& model,
                                   const std::vector<prompting::Message>& messages,
                                   double temperature);
std::string request_digest(const std::string& model,
                           const std::vector<prompting::Message>& messages,
                           double temperature);

class ChatClient {
  public:
    virtual ~ChatClient() = default;
    // One completion attempt. Throws TransportError on delivery failure.
    virtual std::string complete(const prompting::PromptBundle& bundle,
                                 const std::string& model, double temperature) = 0;
    virtual std::string client_digest() const = 0;
};

// Field names for one endpoint dialect. Defaults match the widespread
// chat-completions shape.
struct ProtocolProfile {
    std::string request_path = "/v1/chat/completions";
    std::string model_field = "model";
    std::string messages_field = "messages";
    std::string role_field = "role";
    std::string content_field = "content";
    std::string temperature_field = "temperature";
    std::string response_text_pointer = "/choices/0/message/content";
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    std::string api_key_env = "EAEVAL_API_KEY";

    static ProtocolProfile load(const std::filesystem::path& path);
};

class HttpChatClient : public ChatClient {
  public:
    // base_url like "http://host:port"; the profile supplies the path.
    HttpChatClient(std::string base_url, ProtocolProfile profile, int timeout_ms = 30000);

    std::string complete(const prompting::PromptBundle& bundle, const std::string& model,
                         double temperature) override;
    std::string client_digest() const override;

  private:
    std::string base_url_;
    ProtocolProfile profile_;
    int timeout_ms_;
};

// Scripted stand-in for tests and offline runs. Lookup order per request:
//   1. "sha256:<request digest>"
//   2. "<lang_pair>|<system_id>|<seg_index>|<stage>"  (stage: identify,
//      count, single)
// A string value always returns that text. A list value is consumed one
// element per provider call, repeating the last element once exhausted, which
// scripts invalid-then-valid retry sequences.
class MockChatClient : public ChatClient {
  public:
    struct Call {
        std::string digest;
        std::string segment_key;
        std::string stage;
        std::string model;
        double temperature = 0.0;
    };

    static std::shared_ptr<MockChatClient> from_script_file(const std::filesystem::path& path);
    static std::shared_ptr<MockChatClient> from_script_json(const std::string& json_text);

    std::string complete(const prompting::PromptBundle& bundle, const std::string& model,
                         double temperature) override;
    std::string client_digest() const override;

    std::vector<Call> calls() const;
    std::size_t call_count() const;

  private:
    std::map<std::string, std::vector<std::string>> script_;
    std::map<std::string, std::size_t> cursor_;
    std::vector<Call> calls_;
    std::string script_digest_;
    mutable std::mutex mu_;
};

struct ProviderStats {
    std::size_t provider_calls = 0;  // attempts that reached the client
    std::size_t cache_hits = 0;
};

using Validator = std::function<bool(const std::string&)>;

class Provider {
  public:
    // No cache_dir disables caching entirely.
    Provider(std::shared_ptr<ChatClient> client,
             std::optional<std::filesystem::path> cache_dir);

    // Single completion at base temperature, cache first. Transport failures
    // are retried a bounded number of times, then raise TransportError.
    LlmResponse complete(const prompting::PromptBundle& bundle, const ProviderConfig& cfg);

    // Retries at base + k*step while the validator rejects the text. Raises
    // InvalidResponseError carrying every attempt once retries are exhausted.
    LlmResponse complete_validated(const prompting::PromptBundle& bundle,
                                   const ProviderConfig& cfg, const Validator& valid);

    ProviderStats stats() const;
    ChatClient& client() { return *client_; }

  private:
    LlmResponse complete_at(const prompting::PromptBundle& bundle, const ProviderConfig& cfg,
                            double temperature);

    std::shared_ptr<ChatClient> client_;
    std::optional<std::filesystem::path> cache_dir_;
    ProviderStats stats_;
    std::atomic<std::uint64_t> tmp_counter_{0};
    mutable std::mutex mu_;
};

}  // namespace eaeval::provider
