#pragma once

// Analysis artifacts: error-count histograms, distances between them, and the
// agreement check between the two error-counting paths (counting query vs
// regex over the identify response).

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eaeval/corpus.hpp"
#include "eaeval/parsing.hpp"

namespace eaeval::reports {

struct ErrorDistribution {
    std::map<int, std::size_t> histogram_major;  // error count -> segments
    std::map<int, std::size_t> histogram_minor;
    std::string source_label;
};

ErrorDistribution error_distribution(
    const std::map<corpus::SegmentKey, parsing::ErrorCounts>& counts,
    std::string source_label);

struct DistributionDistance {
    double major = 0.0;  // total-variation distance over normalized histograms
    double minor = 0.0;
    double mean = 0.0;
};

// Both histograms empty counts as distance 0; one empty against one non-empty
// counts as 1.
DistributionDistance distribution_distance(const ErrorDistribution& a,
                                           const ErrorDistribution& b);

struct PathDisagreement {
    corpus::SegmentKey segment_key;
    parsing::ErrorCounts from_regex;
    std::optional<parsing::ErrorCounts> from_query;  // absent: reply unparseable
};

struct AgreementReport {
    std::size_t total = 0;
    std::size_t matching = 0;
    std::vector<PathDisagreement> disagreements;

    double agreement_rate() const {
        return total == 0 ? 1.0 : double(matching) / double(total);
    }
};

// Requires both maps to cover exactly the same segment keys.
AgreementReport compare_count_paths(
    const std::map<corpus::SegmentKey, std::string>& identify_responses,
    const std::map<corpus::SegmentKey, std::string>& count_responses);

// CSV rows: count,frequency,severity,source_label. The manifest digest, when
// given, lands in a leading comment line so outputs stay traceable.
std::string distribution_csv(const std::vector<ErrorDistribution>& distributions,
                             const std::optional<std::string>& manifest_digest);

std::string agreement_report_text(const AgreementReport& report);

}  // namespace eaeval::reports
