#pragma once

// Severity-weighted segment scoring and the w_major sweep.
//
// A segment's score is -w_major * n_major - w_minor * n_minor. w_minor stays
// fixed at 1; w_major is swept over a grid and picked by meta-eval accuracy.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eaeval/corpus.hpp"
#include "eaeval/metaeval.hpp"
#include "eaeval/parsing.hpp"

namespace eaeval::scoring {

struct SeverityWeights {
    double w_major = 1.0;
    double w_minor = 1.0;

    // w_major >= w_minor > 0. Throws DataError otherwise.
    void validate() const;
};

double ea_score(const parsing::ErrorCounts& counts, const SeverityWeights& weights);

struct MetricScore {
    corpus::SegmentKey segment_key;
    double value = 0.0;
    std::string strategy;
    std::optional<SeverityWeights> weights;
};

// One line of a run-record file. Count fields are present for error-analysis
// strategies and absent for direct-assessment ones.
struct RunRecord {
    corpus::SegmentKey segment_key;
    std::string strategy;
    std::optional<int> n_major;
    std::optional<int> n_minor;
    std::optional<double> w_major;
    double score = 0.0;
    std::optional<parsing::Provenance> provenance;
    std::string parser_version;
    // Raw model output, kept so counts can be re-derived without re-querying.
    std::optional<std::string> identify_response;
    std::optional<std::string> count_response;
    std::optional<std::string> response;
};

struct RunFileHeader {
    std::string manifest_digest;
    std::string strategy;
    std::string parser_version;
};

// JSONL: first line {"header": {...}}, then one record object per line.
void write_run_records(const std::filesystem::path& path, const RunFileHeader& header,
                       const std::vector<RunRecord>& records);
std::pair<RunFileHeader, std::vector<RunRecord>> read_run_records(
    const std::filesystem::path& path);

// Scores straight from a record file, for meta-eval.
corpus::ScoreMatrix score_matrix_from_records(const std::vector<RunRecord>& records);

// Counts for re-scoring under a different w_major. Throws DataError when a
// record carries no counts (direct-assessment records cannot be re-weighted).
std::map<corpus::SegmentKey, parsing::ErrorCounts> counts_from_records(
    const std::vector<RunRecord>& records);

// Scores every counted segment at each grid value and meta-evaluates against
// gold. Grid must be non-empty with every value >= 1.
std::map<double, metaeval::MetaEvalReport> weight_sweep(
    const std::map<corpus::SegmentKey, parsing::ErrorCounts>& counts,
    const corpus::ScoreMatrix& gold, const std::vector<double>& grid,
    metaeval::GoldTieMode mode = metaeval::GoldTieMode::Exact);

// Grid value with the best accuracy averaged over language pairs (segment
// acc_eq*; falls back to system-level accuracy when no language pair has
// segment pairs). Ties go to the smaller weight.
double select_w_major(const std::map<double, metaeval::MetaEvalReport>& sweep);

}  // namespace eaeval::scoring
