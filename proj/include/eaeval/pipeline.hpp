#pragma once

// End-to-end evaluation over a dataset: build prompts, complete them through
// the provider, parse, score, and collect run records plus a manifest that
// pins every input the run depended on.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "eaeval/corpus.hpp"
#include "eaeval/prompting.hpp"
#include "eaeval/provider.hpp"
#include "eaeval/scoring.hpp"

namespace eaeval::pipeline {

enum class CountPath { Query, Regex };

std::string count_path_name(CountPath path);

struct EvaluateOptions {
    prompting::PromptVariant variant;
    CountPath count_path = CountPath::Query;  // error-analysis strategies only
    double w_major = 1.0;
};

struct RunManifest {
    std::string dataset_digest;
    std::string variant_tag;
    std::string count_path;  // "query", "regex", or "-" for direct assessment
    std::string provider_digest;
    std::string model_name;
    std::string prompt_config_digest;
    std::map<std::string, std::string> prompt_file_digests;
    double w_major = 1.0;
    std::string parser_version;
    std::string timestamp;
    std::vector<std::string> output_paths;
    std::size_t segments_total = 0;
    std::size_t segments_scored = 0;
    std::size_t segments_failed = 0;
    std::size_t provider_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t regex_format_warnings = 0;

    // Over the inputs that determine results: dataset, variant, count path,
    // provider, prompts, w_major, parser version. Timestamp, stats, and
    // output paths stay out so reruns agree.
    std::string digest() const;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

enum class FailureKind { Transport, InvalidResponse, Data };

struct SegmentFailure {
    corpus::SegmentKey segment_key;
    FailureKind kind = FailureKind::Data;
    std::string message;
};

struct EvaluateResult {
    std::vector<scoring::RunRecord> records;  // dataset order, failures omitted
    std::vector<SegmentFailure> failures;
    RunManifest manifest;
};

// Runs every segment through the configured strategy. Per-segment failures
// are collected, not fatal; two-stage exchanges for one segment stay
// sequential while distinct segments run on cfg.parallelism threads.
EvaluateResult evaluate_dataset(const corpus::Dataset& dataset,
                                const prompting::PromptLibrary& library,
                                provider::Provider& provider,
                                const provider::ProviderConfig& cfg,
                                const EvaluateOptions& options);

}  // namespace eaeval::pipeline
