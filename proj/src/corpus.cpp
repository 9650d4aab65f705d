#include "eaeval/corpus.hpp"

#include "eaeval/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace eaeval::corpus {

using nlohmann::json;

std::string SegmentKey::to_string() const {
    return lang_pair + "|" + system_id + "|" + std::to_string(seg_index);
}

Severity parse_severity(const std::string& text) {
    std::string lower;
    lower.reserve(text.size());
    for (char c : text) lower.push_back(char(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "major") return Severity::Major;
    if (lower == "minor") return Severity::Minor;
    throw DataError("unknown severity: '" + text + "' (expected Major or Minor)");
}

std::string severity_name(Severity s) {
    return s == Severity::Major ? "major" : "minor";
}

FileFormat format_from_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".tsv" || ext == ".txt") return FileFormat::Tsv;
    if (ext == ".jsonl" || ext == ".ndjson") return FileFormat::Jsonl;
    throw DataError("cannot infer file format from extension: " + path.string());
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

int parse_seg_index(const std::string& text, const std::string& where) {
    std::size_t consumed = 0;
    int value = 0;
    try {
        value = std::stoi(text, &consumed);
    } catch (const std::exception&) {
        throw DataError(where + ": seg_index is not an integer: '" + text + "'");
    }
    if (consumed != text.size() || value < 0)
        throw DataError(where + ": seg_index must be a non-negative integer, got '" + text + "'");
    return value;
}

double parse_score(const std::string& text, const std::string& where) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &consumed);
    } catch (const std::exception&) {
        throw DataError(where + ": non-numeric score: '" + text + "'");
    }
    if (consumed != text.size())
        throw DataError(where + ": non-numeric score: '" + text + "'");
    return value;
}

void check_tsv_text_field(const std::string& value, const std::string& field) {
    if (value.find('\t') != std::string::npos || value.find('\n') != std::string::npos)
        throw DataError("field '" + field + "' contains a tab or newline; not representable in TSV");
}

// Trailing \r from CRLF input is stripped; everything else is preserved.
void chomp(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

Segment segment_from_json(const json& obj, const std::string& where) {
    Segment seg;
    const char* required[] = {"lang_pair", "domain", "doc_id", "seg_index",
                              "system_id", "source", "hypothesis"};
    for (const char* field : required) {
        if (!obj.contains(field))
            throw DataError(where + ": missing field '" + std::string(field) + "'");
    }
    seg.lang_pair = obj.at("lang_pair").get<std::string>();
    seg.domain = obj.at("domain").get<std::string>();
    seg.doc_id = obj.at("doc_id").get<std::string>();
    if (!obj.at("seg_index").is_number_integer() || obj.at("seg_index").get<int>() < 0)
        throw DataError(where + ": seg_index must be a non-negative integer");
    seg.seg_index = obj.at("seg_index").get<int>();
    seg.system_id = obj.at("system_id").get<std::string>();
    seg.source = obj.at("source").get<std::string>();
    seg.hypothesis = obj.at("hypothesis").get<std::string>();
    if (obj.contains("reference") && !obj.at("reference").is_null()) {
        const auto ref = obj.at("reference").get<std::string>();
        if (!ref.empty()) seg.reference = ref;
    }
    return seg;
}

}  // namespace

Dataset Dataset::from_segments(std::vector<Segment> segments) {
    Dataset ds;
    ds.segments_ = std::move(segments);
    std::set<std::tuple<std::string, std::string, std::string, int>> full_keys;
    for (std::size_t i = 0; i < ds.segments_.size(); ++i) {
        const Segment& seg = ds.segments_[i];
        const std::string where = "segment record " + std::to_string(i + 1);
        if (seg.source.empty()) throw DataError(where + ": empty source");
        if (seg.hypothesis.empty()) throw DataError(where + ": empty hypothesis");
        if (seg.seg_index < 0) throw DataError(where + ": negative seg_index");
        if (!full_keys.emplace(seg.lang_pair, seg.system_id, seg.doc_id, seg.seg_index).second)
            throw DataError(where + ": duplicate key (" + seg.lang_pair + ", " + seg.system_id +
                            ", " + seg.doc_id + ", " + std::to_string(seg.seg_index) + ")");
        // Downstream score matrices key on (lang_pair, system, seg_index), so
        // seg_index must be unique per system even across documents.
        SegmentKey key{seg.lang_pair, seg.system_id, seg.seg_index};
        if (!ds.by_key_.emplace(key, i).second)
            throw DataError(where + ": seg_index " + std::to_string(seg.seg_index) +
                            " repeats within (" + seg.lang_pair + ", " + seg.system_id + ")");
    }
    if (!ds.segments_.empty()) {
        ds.has_references_ = ds.segments_.front().reference.has_value();
        for (std::size_t i = 0; i < ds.segments_.size(); ++i) {
            if (ds.segments_[i].reference.has_value() != ds.has_references_)
                throw DataError("segment record " + std::to_string(i + 1) +
                                ": reference presence differs from the rest of the dataset");
        }
    }
    return ds;
}

std::vector<std::string> Dataset::lang_pairs() const {
    std::vector<std::string> out;
    for (const auto& seg : segments_) {
        if (std::find(out.begin(), out.end(), seg.lang_pair) == out.end())
            out.push_back(seg.lang_pair);
    }
    return out;
}

std::map<std::string, std::size_t> Dataset::counts_per_lang_pair() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& seg : segments_) ++counts[seg.lang_pair];
    return counts;
}

std::vector<std::string> Dataset::systems(const std::string& lang_pair) const {
    std::vector<std::string> out;
    for (const auto& seg : segments_) {
        if (seg.lang_pair != lang_pair) continue;
        if (std::find(out.begin(), out.end(), seg.system_id) == out.end())
            out.push_back(seg.system_id);
    }
    return out;
}

const Segment* Dataset::find(const SegmentKey& key) const {
    const auto it = by_key_.find(key);
    return it == by_key_.end() ? nullptr : &segments_[it->second];
}

std::size_t ScoreMatrix::system_index(const std::string& system_id) {
    const auto it = system_lookup_.find(system_id);
    if (it != system_lookup_.end()) return it->second;
    const std::size_t idx = systems_.size();
    systems_.push_back(system_id);
    system_lookup_.emplace(system_id, idx);
    values_.emplace_back(segments_.size());
    return idx;
}

std::size_t ScoreMatrix::segment_index(const SegmentId& id) {
    const auto it = segment_lookup_.find(id);
    if (it != segment_lookup_.end()) return it->second;
    const std::size_t idx = segments_.size();
    segments_.push_back(id);
    segment_lookup_.emplace(id, idx);
    for (auto& row : values_) row.emplace_back();
    return idx;
}

void ScoreMatrix::set(const std::string& system_id, const std::string& lang_pair, int seg_index,
                      double value) {
    values_[system_index(system_id)][segment_index({lang_pair, seg_index})] = value;
}

std::optional<double> ScoreMatrix::get(const std::string& system_id, const std::string& lang_pair,
                                       int seg_index) const {
    const auto sys = system_lookup_.find(system_id);
    if (sys == system_lookup_.end()) return std::nullopt;
    const auto seg = segment_lookup_.find({lang_pair, seg_index});
    if (seg == segment_lookup_.end()) return std::nullopt;
    return values_[sys->second][seg->second];
}

bool ScoreMatrix::has(const std::string& system_id, const std::string& lang_pair,
                      int seg_index) const {
    return get(system_id, lang_pair, seg_index).has_value();
}

std::vector<std::string> ScoreMatrix::lang_pairs() const {
    std::vector<std::string> out;
    for (const auto& seg : segments_) {
        if (std::find(out.begin(), out.end(), seg.lang_pair) == out.end())
            out.push_back(seg.lang_pair);
    }
    return out;
}

std::size_t ScoreMatrix::filled_cells() const {
    std::size_t n = 0;
    for (const auto& row : values_)
        for (const auto& cell : row)
            if (cell.has_value()) ++n;
    return n;
}

Dataset load_dataset(const std::filesystem::path& path, FileFormat format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path.string());

    std::vector<Segment> segments;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty()) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        if (format == FileFormat::Tsv) {
            const auto fields = split_tabs(line);
            static const char* names[] = {"lang_pair", "domain", "doc_id",    "seg_index",
                                          "system_id", "source", "reference", "hypothesis"};
            if (fields.size() != 8) {
                std::string msg = where + ": expected 8 tab-separated fields, got " +
                                  std::to_string(fields.size());
                if (fields.size() < 8) msg += " (first missing field: " + std::string(names[fields.size()]) + ")";
                throw DataError(msg);
            }
            Segment seg;
            seg.lang_pair = fields[0];
            seg.domain = fields[1];
            seg.doc_id = fields[2];
            seg.seg_index = parse_seg_index(fields[3], where);
            seg.system_id = fields[4];
            seg.source = fields[5];
            if (!fields[6].empty()) seg.reference = fields[6];
            seg.hypothesis = fields[7];
            if (seg.source.empty()) throw DataError(where + ": missing field 'source'");
            if (seg.hypothesis.empty()) throw DataError(where + ": missing field 'hypothesis'");
            segments.push_back(std::move(seg));
        } else {
            json obj;
            try {
                obj = json::parse(line);
            } catch (const json::parse_error& e) {
                throw DataError(where + ": invalid JSON: " + e.what());
            }
            segments.push_back(segment_from_json(obj, where));
        }
    }
    try {
        return Dataset::from_segments(std::move(segments));
    } catch (const DataError& e) {
        throw DataError(path.filename().string() + ": " + e.what());
    }
}

namespace {

void serialize_dataset_to(const Dataset& dataset, std::ostream& out, FileFormat format) {
    for (const auto& seg : dataset.segments()) {
        if (format == FileFormat::Tsv) {
            check_tsv_text_field(seg.source, "source");
            check_tsv_text_field(seg.hypothesis, "hypothesis");
            if (seg.reference) check_tsv_text_field(*seg.reference, "reference");
            out << seg.lang_pair << '\t' << seg.domain << '\t' << seg.doc_id << '\t'
                << seg.seg_index << '\t' << seg.system_id << '\t' << seg.source << '\t'
                << seg.reference.value_or("") << '\t' << seg.hypothesis << '\n';
        } else {
            json obj{{"lang_pair", seg.lang_pair}, {"domain", seg.domain},
                     {"doc_id", seg.doc_id},       {"seg_index", seg.seg_index},
                     {"system_id", seg.system_id}, {"source", seg.source},
                     {"hypothesis", seg.hypothesis}};
            if (seg.reference) obj["reference"] = *seg.reference;
            out << obj.dump() << '\n';
        }
    }
}

}  // namespace

void serialize_dataset(const Dataset& dataset, const std::filesystem::path& path,
                       FileFormat format) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open output file: " + path.string());
    serialize_dataset_to(dataset, out, format);
}

std::string serialize_dataset(const Dataset& dataset, FileFormat format) {
    std::ostringstream out;
    serialize_dataset_to(dataset, out, format);
    return out.str();
}

ScoreMatrix load_gold(const std::filesystem::path& path, const Dataset* validate_against) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open gold file: " + path.string());

    ScoreMatrix matrix;
    std::set<SegmentKey> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty()) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        const auto fields = split_tabs(line);
        if (fields.size() != 4)
            throw DataError(where + ": expected 4 tab-separated fields (lang_pair, system_id, "
                            "seg_index, score), got " + std::to_string(fields.size()));
        GoldScore row;
        row.lang_pair = fields[0];
        row.system_id = fields[1];
        row.seg_index = parse_seg_index(fields[2], where);
        row.score = parse_score(fields[3], where);

        const SegmentKey key{row.lang_pair, row.system_id, row.seg_index};
        if (!seen.insert(key).second)
            throw DataError(where + ": duplicate gold score for (" + key.to_string() + ")");
        if (validate_against && !validate_against->find(key))
            throw DataError(where + ": gold row references unknown segment (" + key.to_string() +
                            ")");
        matrix.set(row.system_id, row.lang_pair, row.seg_index, row.score);
    }
    return matrix;
}

std::map<SegmentKey, std::vector<MqmAnnotation>> load_annotations(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open annotation file: " + path.string());

    std::map<SegmentKey, std::vector<MqmAnnotation>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty()) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        const auto fields = split_tabs(line);
        if (fields.size() != 6)
            throw DataError(where + ": expected 6 tab-separated fields (lang_pair, system_id, "
                            "seg_index, severity, span, category), got " +
                            std::to_string(fields.size()));
        const SegmentKey key{fields[0], fields[1], parse_seg_index(fields[2], where)};
        // A "none" row marks a segment as annotated with zero errors, so it
        // still contributes to error-count distributions.
        std::string sev = fields[3];
        std::transform(sev.begin(), sev.end(), sev.begin(),
                       [](unsigned char c) { return char(std::tolower(c)); });
        if (sev == "none") {
            out.try_emplace(key);
            continue;
        }
        MqmAnnotation anno;
        anno.severity = parse_severity(fields[3]);
        anno.span = fields[4];
        anno.category = fields[5];
        out[key].push_back(std::move(anno));
    }
    return out;
}

double mqm_score_from_annotations(const std::vector<MqmAnnotation>& annotations,
                                  const SeverityWeightMap& weights) {
    if (!weights.count(Severity::Major) || !weights.count(Severity::Minor))
        throw DataError("severity weight map must cover both Major and Minor");
    double penalty = 0.0;
    for (const auto& anno : annotations) penalty += weights.at(anno.severity);
    return -penalty;
}

}  // namespace eaeval::corpus
