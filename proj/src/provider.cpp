#include "eaeval/provider.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "eaeval/digest.hpp"
#include "eaeval/errors.hpp"

namespace eaeval::provider {

using nlohmann::json;

namespace {

constexpr int kTransportRetries = 2;  // extra attempts after the first failure

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void ProviderConfig::validate() const {
    if (model_name.empty()) throw DataError("provider config: empty model name");
    if (base_temperature < 0.0)
        throw DataError("provider config: negative base_temperature");
    if (max_retries < 0) throw DataError("provider config: negative max_retries");
    if (!(temperature_step > 0.0))
        throw DataError("provider config: temperature_step must be positive");
    if (parallelism < 1) throw DataError("provider config: parallelism must be >= 1");
    if (timeout_ms < 1) throw DataError("provider config: timeout must be positive");
    const double top = base_temperature + max_retries * temperature_step;
    if (top > 2.0)
        throw DataError("provider config: retry temperatures reach " + std::to_string(top) +
                        ", beyond the [0, 2] sampling range; lower max_retries or "
                        "temperature_step");
}

std::string canonical_request_body(const std::string& model,
                                   const std::vector<prompting::Message>& messages,
                                   double temperature) {
    json body;
    body["model"] = model;
    body["temperature"] = temperature;
    json msgs = json::array();
    for (const auto& m : messages)
        msgs.push_back(json{{"role", prompting::role_name(m.role)}, {"content", m.content}});
    body["messages"] = std::move(msgs);
    return body.dump();
}

std::string request_digest(const std::string& model,
                           const std::vector<prompting::Message>& messages,
                           double temperature) {
    return sha256_hex(canonical_request_body(model, messages, temperature));
}

ProtocolProfile ProtocolProfile::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw DataError("bad protocol profile " + path.string() + ": " + e.what());
    }
    ProtocolProfile p;
    const auto take = [&](const char* field, std::string& into) {
        if (j.contains(field)) into = j.at(field).get<std::string>();
    };
    take("request_path", p.request_path);
    take("model_field", p.model_field);
    take("messages_field", p.messages_field);
    take("role_field", p.role_field);
    take("content_field", p.content_field);
    take("temperature_field", p.temperature_field);
    take("response_text_pointer", p.response_text_pointer);
    take("auth_header", p.auth_header);
    take("auth_prefix", p.auth_prefix);
    take("api_key_env", p.api_key_env);
    return p;
}

HttpChatClient::HttpChatClient(std::string base_url, ProtocolProfile profile, int timeout_ms)
    : base_url_(std::move(base_url)), profile_(std::move(profile)), timeout_ms_(timeout_ms) {}

std::string HttpChatClient::complete(const prompting::PromptBundle& bundle,
                                     const std::string& model, double temperature) {
    json body;
    body[profile_.model_field] = model;
    body[profile_.temperature_field] = temperature;
    json msgs = json::array();
    for (const auto& m : bundle.messages)
        msgs.push_back(json{{profile_.role_field, prompting::role_name(m.role)},
                            {profile_.content_field, m.content}});
    body[profile_.messages_field] = std::move(msgs);

    httplib::Client cli(base_url_);
    cli.set_connection_timeout(0, timeout_ms_ * 1000LL);
    cli.set_read_timeout(0, timeout_ms_ * 1000LL);
    cli.set_write_timeout(0, timeout_ms_ * 1000LL);

    httplib::Headers headers;
    if (!profile_.auth_header.empty() && !profile_.api_key_env.empty()) {
        if (const char* key = std::getenv(profile_.api_key_env.c_str()))
            headers.emplace(profile_.auth_header, profile_.auth_prefix + key);
    }

    const auto res = cli.Post(profile_.request_path, headers, body.dump(), "application/json");
    if (!res)
        throw TransportError("cannot reach " + base_url_ + profile_.request_path + ": " +
                             httplib::to_string(res.error()));
    if (res->status != 200)
        throw TransportError("provider returned HTTP " + std::to_string(res->status) +
                             " from " + base_url_ + profile_.request_path + ": " +
                             res->body.substr(0, 500));
    json reply;
    try {
        reply = json::parse(res->body);
    } catch (const json::exception& e) {
        throw TransportError("provider response is not JSON: " + std::string(e.what()));
    }
    const json::json_pointer ptr(profile_.response_text_pointer);
    if (!reply.contains(ptr) || !reply.at(ptr).is_string())
        throw TransportError("provider response lacks text at " +
                             profile_.response_text_pointer + ": " +
                             res->body.substr(0, 500));
    return reply.at(ptr).get<std::string>();
}

std::string HttpChatClient::client_digest() const {
    json j;
    j["base_url"] = base_url_;
    j["request_path"] = profile_.request_path;
    j["model_field"] = profile_.model_field;
    j["messages_field"] = profile_.messages_field;
    j["role_field"] = profile_.role_field;
    j["content_field"] = profile_.content_field;
    j["temperature_field"] = profile_.temperature_field;
    j["response_text_pointer"] = profile_.response_text_pointer;
    return sha256_hex("http:" + j.dump());
}

std::shared_ptr<MockChatClient> MockChatClient::from_script_file(
    const std::filesystem::path& path) {
    return from_script_json(read_file(path));
}

std::shared_ptr<MockChatClient> MockChatClient::from_script_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw DataError("bad mock script: " + std::string(e.what()));
    }
    if (!j.is_object()) throw DataError("mock script must be a JSON object");

    auto mock = std::make_shared<MockChatClient>();
    for (const auto& [key, value] : j.items()) {
        std::vector<std::string> texts;
        if (value.is_string()) {
            texts.push_back(value.get<std::string>());
        } else if (value.is_array()) {
            for (const auto& item : value) {
                if (!item.is_string())
                    throw DataError("mock script entry \"" + key +
                                    "\": list elements must be strings");
                texts.push_back(item.get<std::string>());
            }
            if (texts.empty())
                throw DataError("mock script entry \"" + key + "\": empty list");
        } else {
            throw DataError("mock script entry \"" + key +
                            "\": value must be a string or list of strings");
        }
        mock->script_.emplace(key, std::move(texts));
    }
    mock->script_digest_ = sha256_hex(json_text);
    return mock;
}

std::string MockChatClient::complete(const prompting::PromptBundle& bundle,
                                     const std::string& model, double temperature) {
    const std::string digest = request_digest(model, bundle.messages, temperature);
    const std::string seg_key =
        bundle.segment_key.to_string() + "|" + prompting::stage_name(bundle.stage);

    std::lock_guard<std::mutex> lock(mu_);
    calls_.push_back({digest, bundle.segment_key.to_string(),
                      prompting::stage_name(bundle.stage), model, temperature});

    auto it = script_.find("sha256:" + digest);
    if (it == script_.end()) it = script_.find(seg_key);
    if (it == script_.end())
        throw TransportError("mock script has no entry for request sha256:" + digest +
                             " (segment key " + seg_key + ")");
    // Consume list entries per call so scripts can express an invalid attempt
    // followed by a valid one; sticky on the last element.
    std::size_t& cursor = cursor_[it->first];
    const std::vector<std::string>& texts = it->second;
    const std::string& text = texts[std::min(cursor, texts.size() - 1)];
    if (cursor + 1 < texts.size()) ++cursor;
    return text;
}

std::string MockChatClient::client_digest() const {
    return sha256_hex("mock:" + script_digest_);
}

std::vector<MockChatClient::Call> MockChatClient::calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return calls_;
}

std::size_t MockChatClient::call_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return calls_.size();
}

Provider::Provider(std::shared_ptr<ChatClient> client,
                   std::optional<std::filesystem::path> cache_dir)
    : client_(std::move(client)), cache_dir_(std::move(cache_dir)) {
    if (!client_) throw DataError("provider requires a chat client");
    if (cache_dir_) std::filesystem::create_directories(*cache_dir_);
}

LlmResponse Provider::complete_at(const prompting::PromptBundle& bundle,
                                  const ProviderConfig& cfg, double temperature) {
    const std::string body = canonical_request_body(cfg.model_name, bundle.messages,
                                                    temperature);
    const std::string digest = sha256_hex(body);

    if (cache_dir_) {
        const auto path = *cache_dir_ / (digest + ".json");
        std::ifstream in(path, std::ios::binary);
        if (in) {
            try {
                const json entry = json::parse(in);
                LlmResponse resp;
                resp.text = entry.at("response_text").get<std::string>();
                resp.temperature_used = temperature;
                resp.attempt = 1;
                resp.cached = true;
                resp.request_digest = digest;
                {
                    std::lock_guard<std::mutex> lock(mu_);
                    ++stats_.cache_hits;
                }
                return resp;
            } catch (const json::exception&) {
                // Unreadable entry: fall through and re-fetch; the rewrite
                // below repairs the file.
            }
        }
    }

    std::string text;
    for (int attempt = 0;; ++attempt) {
        try {
            {
                std::lock_guard<std::mutex> lock(mu_);
                ++stats_.provider_calls;
            }
            text = client_->complete(bundle, cfg.model_name, temperature);
            break;
        } catch (const TransportError&) {
            if (attempt >= kTransportRetries) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }

    if (cache_dir_) {
        json entry;
        entry["digest"] = digest;
        entry["request"] = json::parse(body);
        entry["response_text"] = text;
        entry["temperature"] = temperature;
        entry["timestamp"] = utc_timestamp();
        const auto tmp = *cache_dir_ / (digest + ".tmp" +
                                        std::to_string(tmp_counter_.fetch_add(1)));
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw DataError("cannot write cache file " + tmp.string());
            out << entry.dump(2) << '\n';
        }
        std::filesystem::rename(tmp, *cache_dir_ / (digest + ".json"));
    }

    LlmResponse resp;
    resp.text = std::move(text);
    resp.temperature_used = temperature;
    resp.attempt = 1;
    resp.cached = false;
    resp.request_digest = digest;
    return resp;
}

LlmResponse Provider::complete(const prompting::PromptBundle& bundle,
                               const ProviderConfig& cfg) {
    cfg.validate();
    return complete_at(bundle, cfg, cfg.base_temperature);
}

LlmResponse Provider::complete_validated(const prompting::PromptBundle& bundle,
                                         const ProviderConfig& cfg, const Validator& valid) {
    cfg.validate();
    std::vector<std::string> attempts;
    for (int k = 0; k <= cfg.max_retries; ++k) {
        const double temperature = cfg.base_temperature + k * cfg.temperature_step;
        LlmResponse resp = complete_at(bundle, cfg, temperature);
        resp.attempt = k + 1;
        if (valid(resp.text)) return resp;
        attempts.push_back(std::move(resp.text));
    }
    throw InvalidResponseError(
        "no valid response for " + bundle.segment_key.to_string() + " (" +
            prompting::stage_name(bundle.stage) + " stage) after " +
            std::to_string(cfg.max_retries + 1) + " attempt(s)",
        std::move(attempts));
}

ProviderStats Provider::stats() const {
    std::lock_guard<std::mutex> lock(mu_);
    return stats_;
}

}  // namespace eaeval::provider
