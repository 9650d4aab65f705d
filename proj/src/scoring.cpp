#include "eaeval/scoring.hpp"

#include <fstream>

#include <json.hpp>

#include "eaeval/errors.hpp"

namespace eaeval::scoring {

using nlohmann::json;

void SeverityWeights::validate() const {
    if (!(w_minor > 0.0))
        throw DataError("severity weights: w_minor must be positive, got " +
                        std::to_string(w_minor));
    if (!(w_major >= w_minor))
        throw DataError("severity weights: w_major (" + std::to_string(w_major) +
                        ") must be >= w_minor (" + std::to_string(w_minor) + ")");
}

double ea_score(const parsing::ErrorCounts& counts, const SeverityWeights& weights) {
    return -weights.w_major * counts.n_major - weights.w_minor * counts.n_minor;
}

namespace {

json key_to_json(const corpus::SegmentKey& key) {
    return json{{"lang_pair", key.lang_pair},
                {"system_id", key.system_id},
                {"seg_index", key.seg_index}};
}

corpus::SegmentKey key_from_json(const json& j) {
    corpus::SegmentKey key;
    key.lang_pair = j.at("lang_pair").get<std::string>();
    key.system_id = j.at("system_id").get<std::string>();
    key.seg_index = j.at("seg_index").get<std::int64_t>();
    return key;
}

json record_to_json(const RunRecord& r) {
    json j;
    j["segment_key"] = key_to_json(r.segment_key);
    j["strategy"] = r.strategy;
    if (r.n_major) j["n_major"] = *r.n_major;
    if (r.n_minor) j["n_minor"] = *r.n_minor;
    if (r.w_major) j["w_major"] = *r.w_major;
    j["score"] = r.score;
    if (r.provenance) j["provenance"] = parsing::provenance_name(*r.provenance);
    j["parser_version"] = r.parser_version;
    if (r.identify_response) j["identify_response"] = *r.identify_response;
    if (r.count_response) j["count_response"] = *r.count_response;
    if (r.response) j["response"] = *r.response;
    return j;
}

RunRecord record_from_json(const json& j) {
    RunRecord r;
    r.segment_key = key_from_json(j.at("segment_key"));
    r.strategy = j.at("strategy").get<std::string>();
    if (j.contains("n_major")) r.n_major = j.at("n_major").get<int>();
    if (j.contains("n_minor")) r.n_minor = j.at("n_minor").get<int>();
    if (j.contains("w_major")) r.w_major = j.at("w_major").get<double>();
    r.score = j.at("score").get<double>();
    if (j.contains("provenance"))
        r.provenance = parsing::parse_provenance(j.at("provenance").get<std::string>());
    r.parser_version = j.at("parser_version").get<std::string>();
    if (j.contains("identify_response"))
        r.identify_response = j.at("identify_response").get<std::string>();
    if (j.contains("count_response"))
        r.count_response = j.at("count_response").get<std::string>();
    if (j.contains("response")) r.response = j.at("response").get<std::string>();
    return r;
}

}  // namespace

void write_run_records(const std::filesystem::path& path, const RunFileHeader& header,
                       const std::vector<RunRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    json h;
    h["header"] = json{{"manifest_digest", header.manifest_digest},
                       {"strategy", header.strategy},
                       {"parser_version", header.parser_version}};
    out << h.dump() << '\n';
    for (const RunRecord& r : records) out << record_to_json(r).dump() << '\n';
    if (!out) throw DataError("write failed: " + path.string());
}

std::pair<RunFileHeader, std::vector<RunRecord>> read_run_records(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path.string());

    std::string line;
    std::size_t line_no = 0;
    RunFileHeader header;
    std::vector<RunRecord> records;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad JSON: " +
                            e.what());
        }
        try {
            if (!saw_header) {
                if (!j.contains("header"))
                    throw DataError(path.string() + ":" + std::to_string(line_no) +
                                    ": run-record file must start with a header line");
                const json& h = j.at("header");
                header.manifest_digest = h.at("manifest_digest").get<std::string>();
                header.strategy = h.at("strategy").get<std::string>();
                header.parser_version = h.at("parser_version").get<std::string>();
                saw_header = true;
                continue;
            }
            records.push_back(record_from_json(j));
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": bad run record: " + e.what());
        }
    }
    if (!saw_header) throw DataError(path.string() + ": empty run-record file");
    return {header, records};
}

corpus::ScoreMatrix score_matrix_from_records(const std::vector<RunRecord>& records) {
    corpus::ScoreMatrix m;
    for (const RunRecord& r : records)
        m.set(r.segment_key.system_id, r.segment_key.lang_pair, r.segment_key.seg_index,
              r.score);
    return m;
}

std::map<corpus::SegmentKey, parsing::ErrorCounts> counts_from_records(
    const std::vector<RunRecord>& records) {
    std::map<corpus::SegmentKey, parsing::ErrorCounts> out;
    for (const RunRecord& r : records) {
        if (!r.n_major || !r.n_minor)
            throw DataError("record for " + r.segment_key.to_string() +
                            " carries no error counts (strategy " + r.strategy +
                            "); cannot re-weight");
        parsing::ErrorCounts c;
        c.n_major = *r.n_major;
        c.n_minor = *r.n_minor;
        if (r.provenance) c.provenance = *r.provenance;
        out[r.segment_key] = c;
    }
    return out;
}

std::map<double, metaeval::MetaEvalReport> weight_sweep(
    const std::map<corpus::SegmentKey, parsing::ErrorCounts>& counts,
    const corpus::ScoreMatrix& gold, const std::vector<double>& grid,
    metaeval::GoldTieMode mode) {
    if (grid.empty()) throw DataError("weight sweep: empty grid");

    std::map<double, metaeval::MetaEvalReport> out;
    for (const double w : grid) {
        SeverityWeights weights;
        weights.w_major = w;
        if (w < 1.0)
            throw DataError("weight sweep: grid values must be >= 1, got " +
                            std::to_string(w));
        weights.validate();
        corpus::ScoreMatrix metric;
        for (const auto& [key, c] : counts)
            metric.set(key.system_id, key.lang_pair, key.seg_index, ea_score(c, weights));
        out.emplace(w, metaeval::build_report(metric, gold, mode));
    }
    return out;
}

double select_w_major(const std::map<double, metaeval::MetaEvalReport>& sweep) {
    if (sweep.empty()) throw DataError("select_w_major: empty sweep");

    double best_w = 0.0;
    double best_acc = -1.0;
    // std::map iterates in ascending weight order, so strict > keeps the
    // smallest weight on a plateau.
    for (const auto& [w, report] : sweep) {
        double acc;
        if (report.per_lp_segment_accuracy.empty()) {
            acc = report.system_level_accuracy;
        } else {
            acc = 0.0;
            for (const auto& [lp, seg] : report.per_lp_segment_accuracy) {
                (void)lp;
                acc += seg.acc_eq_star;
            }
            acc /= double(report.per_lp_segment_accuracy.size());
        }
        if (acc > best_acc) {
            best_acc = acc;
            best_w = w;
        }
    }
    return best_w;
}

}  // namespace eaeval::scoring
