#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eaeval::corpus {

// One evaluation unit: a system's translation of one source segment.
struct Segment {
    std::string lang_pair;  // e.g. "en-de"
    std::string domain;
    std::string doc_id;
    int seg_index = 0;
    std::string system_id;
    std::string source;
    std::optional<std::string> reference;
    std::string hypothesis;
};

// Identity of a scored cell: which system's output on which segment.
struct SegmentKey {
    std::string lang_pair;
    std::string system_id;
    int seg_index = 0;

    auto operator<=>(const SegmentKey&) const = default;
    std::string to_string() const;
};

// A segment position independent of system (one column of a ScoreMatrix).
struct SegmentId {
    std::string lang_pair;
    int seg_index = 0;

    auto operator<=>(const SegmentId&) const = default;
};

enum class Severity { Major, Minor };

Severity parse_severity(const std::string& text);
std::string severity_name(Severity s);

// One human-annotated error span.
struct MqmAnnotation {
    std::string span;
    Severity severity = Severity::Minor;
    std::string category;
};

struct GoldScore {
    std::string lang_pair;
    std::string system_id;
    int seg_index = 0;
    double score = 0.0;
};

enum class FileFormat { Tsv, Jsonl };

// Infers Tsv/Jsonl from the extension; throws DataError otherwise.
FileFormat format_from_path(const std::filesystem::path& path);

// An immutable, loaded evaluation dataset. Segments keep file order; the
// loader enforces key uniqueness and reference consistency, so a Dataset in
// hand is safe to share across threads.
class Dataset {
public:
    static Dataset from_segments(std::vector<Segment> segments);

    const std::vector<Segment>& segments() const { return segments_; }
    bool has_references() const { return has_references_; }
    bool empty() const { return segments_.empty(); }
    std::size_t size() const { return segments_.size(); }

    // Distinct language pairs in first-seen order.
    std::vector<std::string> lang_pairs() const;
    // Segment counts per language pair (the load-time report).
    std::map<std::string, std::size_t> counts_per_lang_pair() const;
    std::vector<std::string> systems(const std::string& lang_pair) const;
    const Segment* find(const SegmentKey& key) const;

private:
    std::vector<Segment> segments_;
    std::map<SegmentKey, std::size_t> by_key_;
    bool has_references_ = false;
};

// Dense (system x segment) table of optional scores. Cells are empty exactly
// where no score was provided; meta-evaluation works on pairwise-complete
// cells only.
class ScoreMatrix {
public:
    void set(const std::string& system_id, const std::string& lang_pair, int seg_index,
             double value);
    std::optional<double> get(const std::string& system_id, const std::string& lang_pair,
                              int seg_index) const;
    bool has(const std::string& system_id, const std::string& lang_pair, int seg_index) const;

    const std::vector<std::string>& systems() const { return systems_; }
    const std::vector<SegmentId>& segments() const { return segments_; }
    std::vector<std::string> lang_pairs() const;
    std::size_t filled_cells() const;

private:
    std::size_t system_index(const std::string& system_id);
    std::size_t segment_index(const SegmentId& id);

    std::vector<std::string> systems_;
    std::vector<SegmentId> segments_;
    std::map<std::string, std::size_t> system_lookup_;
    std::map<SegmentId, std::size_t> segment_lookup_;
    std::vector<std::vector<std::optional<double>>> values_;  // [system][segment]
};

// Loads segments from TSV (columns: lang_pair, domain, doc_id, seg_index,
// system_id, source, reference, hypothesis; empty reference means absent) or
// JSONL with the same field names. Errors name the offending line.
Dataset load_dataset(const std::filesystem::path& path, FileFormat format);

// Inverse of load_dataset; load_dataset(serialize_dataset(d)) == d. The
// string overload returns the file content instead of writing it, which also
// serves as the canonical dataset text for digests.
void serialize_dataset(const Dataset& dataset, const std::filesystem::path& path,
                       FileFormat format);
std::string serialize_dataset(const Dataset& dataset, FileFormat format);

// Gold score TSV: lang_pair, system_id, seg_index, score. When a dataset is
// given, rows referencing systems or segments outside it are rejected.
ScoreMatrix load_gold(const std::filesystem::path& path, const Dataset* validate_against = nullptr);

// MQM annotation TSV: lang_pair, system_id, seg_index, severity, span,
// category. Zero rows for a segment means "annotated, no errors" only if the
// segment appears with severity "none"; otherwise the segment is absent.
std::map<SegmentKey, std::vector<MqmAnnotation>> load_annotations(
    const std::filesystem::path& path);

using SeverityWeightMap = std::map<Severity, double>;

// MQM-convention severity weights (the gold files WMT ships are already
// scored; this path exists for raw annotation input).
inline SeverityWeightMap default_mqm_weights() {
    return {{Severity::Major, 5.0}, {Severity::Minor, 1.0}};
}

// Negated weighted error count; 0 is a perfect segment, more/worse errors
// push the score down.
double mqm_score_from_annotations(const std::vector<MqmAnnotation>& annotations,
                                  const SeverityWeightMap& weights);

}  // namespace eaeval::corpus
