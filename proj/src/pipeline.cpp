#include "eaeval/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include <json.hpp>

#include "eaeval/digest.hpp"
#include "eaeval/errors.hpp"
#include "eaeval/parsing.hpp"

namespace eaeval::pipeline {

using nlohmann::json;

std::string count_path_name(CountPath path) {
    return path == CountPath::Query ? "query" : "regex";
}

std::string RunManifest::digest() const {
    json core;
    core["dataset_digest"] = dataset_digest;
    core["variant"] = variant_tag;
    core["count_path"] = count_path;
    core["provider_digest"] = provider_digest;
    core["model_name"] = model_name;
    core["prompt_config_digest"] = prompt_config_digest;
    core["w_major"] = w_major;
    core["parser_version"] = parser_version;
    return sha256_hex(core.dump());
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    json j;
    j["manifest_digest"] = m.digest();
    j["dataset_digest"] = m.dataset_digest;
    j["variant"] = m.variant_tag;
    j["count_path"] = m.count_path;
    j["provider_digest"] = m.provider_digest;
    j["model_name"] = m.model_name;
    j["prompt_config_digest"] = m.prompt_config_digest;
    j["prompt_file_digests"] = m.prompt_file_digests;
    j["w_major"] = m.w_major;
    j["parser_version"] = m.parser_version;
    j["timestamp"] = m.timestamp;
    j["output_paths"] = m.output_paths;
    j["segments_total"] = m.segments_total;
    j["segments_scored"] = m.segments_scored;
    j["segments_failed"] = m.segments_failed;
    j["provider_calls"] = m.provider_calls;
    j["cache_hits"] = m.cache_hits;
    j["regex_format_warnings"] = m.regex_format_warnings;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write manifest " + path.string());
    out << j.dump(2) << '\n';
}

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool gemba_valid(const std::string& text) {
    return parsing::parse_gemba(text).has_value();
}

bool count_valid(const std::string& text) {
    return parsing::parse_count_reply(text).has_value();
}

struct SegmentOutcome {
    std::optional<scoring::RunRecord> record;
    std::optional<SegmentFailure> failure;
    bool regex_warning = false;
};

SegmentOutcome evaluate_segment(const corpus::Segment& seg,
                                const prompting::PromptLibrary& library,
                                provider::Provider& prov, const provider::ProviderConfig& cfg,
                                const EvaluateOptions& options) {
    const corpus::SegmentKey key{seg.lang_pair, seg.system_id, seg.seg_index};
    SegmentOutcome outcome;
    try {
        scoring::RunRecord record;
        record.segment_key = key;
        record.strategy = options.variant.tag();
        record.parser_version = parsing::kParserVersion;

        if (options.variant.strategy == prompting::Strategy::GembaDA) {
            const auto bundle = library.build_gemba_da(seg, options.variant);
            const auto resp = prov.complete_validated(bundle, cfg, gemba_valid);
            record.score = parsing::parse_gemba(resp.text)->value;
            record.response = resp.text;
            outcome.record = std::move(record);
            return outcome;
        }

        const auto& exemplar = library.exemplar_for(seg.lang_pair);
        const auto identify_bundle =
            library.build_eaprompt_identify(seg, exemplar, options.variant);

        parsing::ErrorCounts counts;
        if (identify_bundle.stage == prompting::Stage::Single) {
            // One-step: the lone response must carry whatever the chosen
            // counting path consumes.
            const provider::Validator valid = options.count_path == CountPath::Query
                                                  ? provider::Validator(count_valid)
                                                  : provider::Validator(
                                                        parsing::looks_like_identify_response);
            const auto resp = prov.complete_validated(identify_bundle, cfg, valid);
            if (options.count_path == CountPath::Query) {
                counts = *parsing::parse_count_reply(resp.text);
            } else {
                counts = parsing::count_errors_regex(resp.text);
                outcome.regex_warning = counts.format_warning;
            }
            record.response = resp.text;
        } else {
            const auto identify_resp = prov.complete_validated(
                identify_bundle, cfg, parsing::looks_like_identify_response);
            record.identify_response = identify_resp.text;
            if (options.count_path == CountPath::Query) {
                const auto count_bundle =
                    library.build_eaprompt_count(identify_bundle, identify_resp.text);
                const auto count_resp = prov.complete_validated(count_bundle, cfg, count_valid);
                counts = *parsing::parse_count_reply(count_resp.text);
                record.count_response = count_resp.text;
            } else {
                counts = parsing::count_errors_regex(identify_resp.text);
                outcome.regex_warning = counts.format_warning;
            }
        }

        scoring::SeverityWeights weights;
        weights.w_major = options.w_major;
        weights.validate();
        record.n_major = counts.n_major;
        record.n_minor = counts.n_minor;
        record.w_major = options.w_major;
        record.provenance = counts.provenance;
        record.score = scoring::ea_score(counts, weights);
        outcome.record = std::move(record);
    } catch (const TransportError& e) {
        outcome.failure = SegmentFailure{key, FailureKind::Transport, e.what()};
    } catch (const InvalidResponseError& e) {
        outcome.failure = SegmentFailure{key, FailureKind::InvalidResponse, e.what()};
    } catch (const DataError& e) {
        outcome.failure = SegmentFailure{key, FailureKind::Data, e.what()};
    }
    return outcome;
}

}  // namespace

EvaluateResult evaluate_dataset(const corpus::Dataset& dataset,
                                const prompting::PromptLibrary& library,
                                provider::Provider& prov, const provider::ProviderConfig& cfg,
                                const EvaluateOptions& options) {
    options.variant.validate();
    cfg.validate();
    if (options.variant.strategy == prompting::Strategy::EAPrompt) {
        scoring::SeverityWeights weights;
        weights.w_major = options.w_major;
        weights.validate();
    }

    const auto& segments = dataset.segments();
    std::vector<SegmentOutcome> outcomes(segments.size());

    const std::size_t workers =
        std::min<std::size_t>(std::max(cfg.parallelism, 1), std::max<std::size_t>(segments.size(), 1));
    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= segments.size()) return;
            outcomes[i] = evaluate_segment(segments[i], library, prov, cfg, options);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    EvaluateResult result;
    for (auto& outcome : outcomes) {
        if (outcome.record) result.records.push_back(std::move(*outcome.record));
        if (outcome.failure) result.failures.push_back(std::move(*outcome.failure));
        if (outcome.regex_warning) ++result.manifest.regex_format_warnings;
    }

    RunManifest& m = result.manifest;
    m.dataset_digest = sha256_hex(corpus::serialize_dataset(dataset, corpus::FileFormat::Tsv));
    m.variant_tag = options.variant.tag();
    m.count_path = options.variant.strategy == prompting::Strategy::EAPrompt
                       ? count_path_name(options.count_path)
                       : "-";
    m.provider_digest =
        sha256_hex(prov.client().client_digest() + "|" + cfg.model_name + "|" +
                   std::to_string(cfg.base_temperature) + "|" +
                   std::to_string(cfg.temperature_step) + "|" + std::to_string(cfg.max_retries));
    m.model_name = cfg.model_name;
    m.prompt_config_digest = library.config_digest();
    m.prompt_file_digests = library.file_digests();
    m.w_major = options.w_major;
    m.parser_version = parsing::kParserVersion;
    m.timestamp = utc_timestamp();
    m.segments_total = segments.size();
    m.segments_scored = result.records.size();
    m.segments_failed = result.failures.size();
    const auto stats = prov.stats();
    m.provider_calls = stats.provider_calls;
    m.cache_hits = stats.cache_hits;
    return result;
}

}  // namespace eaeval::pipeline
