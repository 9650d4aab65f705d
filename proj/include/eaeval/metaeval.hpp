#pragma once

#include "eaeval/corpus.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace eaeval::metaeval {

// Gold pairs tie on exact equality by default (gold MQM scores are discrete
// sums). Epsilon applies the metric's tie window to gold differences as well.
enum class GoldTieMode { Exact, Epsilon };

// Segment-level group-by-item pairwise accuracy with the calibrated tie
// threshold that produced it.
struct SegmentAccuracy {
    double acc_eq_star = 0.0;
    double epsilon_star = 0.0;
    std::size_t pairs = 0;
};

struct MetaEvalReport {
    double system_level_accuracy = 0.0;
    std::map<std::string, SegmentAccuracy> per_lp_segment_accuracy;
    std::size_t system_pairs = 0;
    std::size_t segment_pairs = 0;
    // Gold-scored cells the metric left unscored (dropped from all pairs).
    std::size_t unscored_segments = 0;
    // All pairwise-complete metric values identical; accuracy is then
    // dominated by how ties happen to resolve.
    bool degenerate_metric = false;
};

// Per-(lang_pair, system) mean over pairwise-complete segments. Exposed as
// its own layer: pairwise accuracy is a rank statistic of these aggregates.
using SystemScores = std::map<std::pair<std::string, std::string>, double>;

// Averages `scores` per system over segments scored in both matrices.
// Systems with no pairwise-complete segment are absent from the result.
SystemScores aggregate_system_scores(const corpus::ScoreMatrix& scores,
                                     const corpus::ScoreMatrix& other);

// Fraction of same-language-pair system pairs ordered identically by the two
// aggregate score sets, pooled over language pairs. Ties count as agreement
// only when both sides tie exactly.
double pairwise_accuracy_on_aggregates(const SystemScores& metric, const SystemScores& gold,
                                       std::size_t* pairs_out = nullptr);

// System-level pairwise accuracy of `metric` against `gold` over segment
// score matrices. Throws DataError when no language pair has two comparable
// systems.
double system_pairwise_accuracy(const corpus::ScoreMatrix& metric,
                                const corpus::ScoreMatrix& gold,
                                std::size_t* pairs_out = nullptr);

// acc_eq at a fixed tie threshold: a metric pair within epsilon is a tie, a
// gold pair ties per the mode; per-segment pair accuracy is averaged over
// segments of the language pair.
double acc_eq_at(const corpus::ScoreMatrix& metric, const corpus::ScoreMatrix& gold,
                 const std::string& lang_pair, double epsilon,
                 GoldTieMode mode = GoldTieMode::Exact);

// Calibrates the tie threshold by exhaustive search over 0 and all midpoints
// between consecutive distinct observed |difference| values (metric only in
// Exact mode, metric and gold in Epsilon mode), and returns the maximizing
// (accuracy, epsilon). Equal accuracies resolve to the smallest epsilon.
// Throws DataError when the language pair has no comparable pair.
SegmentAccuracy segment_acc_eq_star(const corpus::ScoreMatrix& metric,
                                    const corpus::ScoreMatrix& gold,
                                    const std::string& lang_pair,
                                    GoldTieMode mode = GoldTieMode::Exact);

// Full report: pooled system accuracy plus per-language-pair calibrated
// segment accuracy. Language pairs without comparable segment pairs are
// omitted from the per-LP map; fully disjoint matrices throw DataError.
MetaEvalReport build_report(const corpus::ScoreMatrix& metric, const corpus::ScoreMatrix& gold,
                            GoldTieMode mode = GoldTieMode::Exact);

// Plain-text table, one row per labeled report: system accuracy pooled over
// language pairs, then per-language-pair segment accuracy columns.
std::string format_report_table(const std::vector<std::pair<std::string, MetaEvalReport>>& rows);

}  // namespace eaeval::metaeval
