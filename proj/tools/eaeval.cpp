// Command-line front end: evaluate translations with an LLM judge, meta-
// evaluate run records against MQM gold, and export analysis reports.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 provider error, 4 parse-
// failure threshold exceeded.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eaeval/corpus.hpp"
#include "eaeval/errors.hpp"
#include "eaeval/metaeval.hpp"
#include "eaeval/parsing.hpp"
#include "eaeval/pipeline.hpp"
#include "eaeval/prompting.hpp"
#include "eaeval/provider.hpp"
#include "eaeval/reports.hpp"
#include "eaeval/scoring.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Command-level misuse that CLI11 cannot express (conditional requirements,
// malformed value syntax). Maps to exit code 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct EvaluateArgs {
    std::string dataset_path;
    std::string prompt_kind;
    std::string variant_str = "2step-itemized";
    bool use_reference = true;
    std::string count_path_str = "query";
    double w_major = 1.0;
    std::string provider_kind = "mock";
    std::string mock_script;
    std::string endpoint;
    std::string profile_path;
    std::string model = "default-model";
    double temperature = 0.0;
    double temperature_step = 0.2;
    int max_retries = 3;
    int parallelism = 1;
    int timeout_ms = 30000;
    std::string cache_dir;
    std::string prompts_manifest = "data/prompts/manifest.json";
    std::string out_path = "run_records.jsonl";
    double parse_failure_threshold = 1.0;
};

struct MetaEvalArgs {
    std::string records_path;
    std::string gold_path;
    std::string sweep;
    std::string out_path;
    std::string gold_ties = "exact";
};

struct ReportArgs {
    std::string records_path;
    std::string gold_annotations;
    std::string out_dir = ".";
    bool compare_paths = false;
};

eaeval::prompting::PromptVariant make_variant(const EvaluateArgs& a) {
    using namespace eaeval::prompting;
    if (a.prompt_kind == "gemba-da") return PromptVariant::gemba(a.use_reference);
    const Steps steps = a.variant_str.rfind("1step", 0) == 0 ? Steps::OneStep : Steps::TwoStep;
    const DemoStyle demo = a.variant_str.find("itemized") != std::string::npos
                               ? DemoStyle::Itemized
                               : DemoStyle::Detailed;
    return PromptVariant::eaprompt(steps, demo, a.use_reference);
}

std::vector<double> parse_sweep_grid(const std::string& text) {
    const auto bad = [&text]() {
        throw UsageError("--sweep expects \"LO..HI\" (integers) or a comma list of weights, "
                         "got \"" + text + "\"");
    };
    std::vector<double> grid;
    const auto range_pos = text.find("..");
    try {
        if (range_pos != std::string::npos) {
            std::size_t used = 0;
            const int lo = std::stoi(text.substr(0, range_pos), &used);
            if (used != range_pos) bad();
            const std::string hi_text = text.substr(range_pos + 2);
            const int hi = std::stoi(hi_text, &used);
            if (used != hi_text.size()) bad();
            if (lo > hi) bad();
            for (int w = lo; w <= hi; ++w) grid.push_back(double(w));
        } else {
            std::size_t start = 0;
            while (start <= text.size()) {
                const auto comma = text.find(',', start);
                const std::string item =
                    text.substr(start, comma == std::string::npos ? std::string::npos
                                                                  : comma - start);
                std::size_t used = 0;
                grid.push_back(std::stod(item, &used));
                if (used != item.size()) bad();
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }
    } catch (const std::logic_error&) {
        bad();
    }
    if (grid.empty()) bad();
    return grid;
}

json report_to_json(const eaeval::metaeval::MetaEvalReport& report) {
    json j;
    j["system_level_accuracy"] = report.system_level_accuracy;
    j["system_pairs"] = report.system_pairs;
    j["segment_pairs"] = report.segment_pairs;
    j["unscored_segments"] = report.unscored_segments;
    j["degenerate_metric"] = report.degenerate_metric;
    json per_lp = json::object();
    for (const auto& [lp, acc] : report.per_lp_segment_accuracy)
        per_lp[lp] = json{{"acc_eq_star", acc.acc_eq_star},
                          {"epsilon_star", acc.epsilon_star},
                          {"pairs", acc.pairs}};
    j["per_lp_segment_accuracy"] = std::move(per_lp);
    return j;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw eaeval::DataError("cannot write " + path.string());
    out << content;
}

int cmd_evaluate(const EvaluateArgs& a) {
    using namespace eaeval;

    const auto variant = make_variant(a);
    const auto dataset =
        corpus::load_dataset(a.dataset_path, corpus::format_from_path(a.dataset_path));
    const auto library = prompting::PromptLibrary::load(a.prompts_manifest);

    std::shared_ptr<provider::ChatClient> client;
    if (a.provider_kind == "mock") {
        if (a.mock_script.empty())
            throw UsageError("--provider mock requires --mock-script");
        client = provider::MockChatClient::from_script_file(a.mock_script);
    } else {
        if (a.endpoint.empty()) throw UsageError("--provider http requires --endpoint");
        provider::ProtocolProfile profile;
        if (!a.profile_path.empty()) profile = provider::ProtocolProfile::load(a.profile_path);
        client = std::make_shared<provider::HttpChatClient>(a.endpoint, profile, a.timeout_ms);
    }

    provider::Provider prov(client, a.cache_dir.empty()
                                        ? std::nullopt
                                        : std::optional<fs::path>(a.cache_dir));
    provider::ProviderConfig cfg;
    cfg.endpoint = a.provider_kind == "mock" ? "mock" : a.endpoint;
    cfg.model_name = a.model;
    cfg.base_temperature = a.temperature;
    cfg.temperature_step = a.temperature_step;
    cfg.max_retries = a.max_retries;
    cfg.parallelism = a.parallelism;
    cfg.timeout_ms = a.timeout_ms;

    pipeline::EvaluateOptions options;
    options.variant = variant;
    options.count_path = a.count_path_str == "regex" ? pipeline::CountPath::Regex
                                                     : pipeline::CountPath::Query;
    options.w_major = a.w_major;

    auto result = pipeline::evaluate_dataset(dataset, library, prov, cfg, options);

    const fs::path out_path = a.out_path;
    const fs::path manifest_path = out_path.string() + ".manifest.json";
    result.manifest.output_paths = {out_path.string(), manifest_path.string()};

    scoring::RunFileHeader header;
    header.manifest_digest = result.manifest.digest();
    header.strategy = variant.tag();
    header.parser_version = parsing::kParserVersion;
    scoring::write_run_records(out_path, header, result.records);
    pipeline::write_manifest(manifest_path, result.manifest);

    std::size_t transport_failures = 0;
    std::size_t parse_failures = 0;
    for (const auto& f : result.failures) {
        const char* kind = f.kind == pipeline::FailureKind::Transport ? "transport"
                           : f.kind == pipeline::FailureKind::InvalidResponse
                               ? "invalid-response"
                               : "data";
        if (f.kind == pipeline::FailureKind::Transport) ++transport_failures;
        if (f.kind == pipeline::FailureKind::InvalidResponse) ++parse_failures;
        std::cerr << "segment " << f.segment_key.to_string() << " failed (" << kind
                  << "): " << f.message << '\n';
    }
    std::cerr << "scored " << result.records.size() << "/" << dataset.segments().size()
              << " segments; provider calls " << result.manifest.provider_calls
              << ", cache hits " << result.manifest.cache_hits << '\n'
              << "records: " << out_path.string() << '\n';

    if (result.records.empty() && !result.failures.empty() &&
        transport_failures == result.failures.size()) {
        std::cerr << "no segment could reach the provider\n";
        return 3;
    }
    if (!dataset.segments().empty() &&
        double(parse_failures) / double(dataset.segments().size()) >
            a.parse_failure_threshold) {
        std::cerr << "parse-failure fraction exceeded --parse-failure-threshold\n";
        return 4;
    }
    return 0;
}

int cmd_meta_eval(const MetaEvalArgs& a) {
    using namespace eaeval;

    const auto [header, records] = scoring::read_run_records(a.records_path);
    const auto gold = corpus::load_gold(a.gold_path);
    const auto metric = scoring::score_matrix_from_records(records);
    const auto mode = a.gold_ties == "epsilon" ? metaeval::GoldTieMode::Epsilon
                                               : metaeval::GoldTieMode::Exact;
    const auto report = metaeval::build_report(metric, gold, mode);

    std::vector<std::pair<std::string, metaeval::MetaEvalReport>> rows;
    rows.emplace_back(header.strategy, report);

    json out;
    out["manifest_digest"] = header.manifest_digest;
    out["strategy"] = header.strategy;
    out["gold_ties"] = a.gold_ties;
    out["report"] = report_to_json(report);

    if (!a.sweep.empty()) {
        const auto grid = parse_sweep_grid(a.sweep);
        const auto counts = scoring::counts_from_records(records);
        const auto sweep = scoring::weight_sweep(counts, gold, grid, mode);
        const double selected = scoring::select_w_major(sweep);
        json sweep_json = json::object();
        for (const auto& [w, sweep_report] : sweep) {
            std::string label = "w_major=" + std::to_string(w);
            label.erase(label.find_last_not_of('0') + 1);
            if (!label.empty() && label.back() == '.') label.pop_back();
            rows.emplace_back(label, sweep_report);
            sweep_json[label] = report_to_json(sweep_report);
        }
        out["sweep"] = std::move(sweep_json);
        out["selected_w_major"] = selected;
        std::cout << metaeval::format_report_table(rows);
        std::cout << "selected w_major: " << selected << '\n';
    } else {
        std::cout << metaeval::format_report_table(rows);
    }
    if (report.unscored_segments > 0)
        std::cout << "unscored segments: " << report.unscored_segments << '\n';

    if (!a.out_path.empty()) write_text_file(a.out_path, out.dump(2) + "\n");
    return 0;
}

int cmd_report(const ReportArgs& a) {
    using namespace eaeval;

    const auto [header, records] = scoring::read_run_records(a.records_path);
    if (records.empty())
        std::cerr << "warning: " << a.records_path << " holds no records; outputs will be "
                  << "empty\n";
    fs::create_directories(a.out_dir);
    const fs::path out_dir = a.out_dir;

    std::map<corpus::SegmentKey, parsing::ErrorCounts> metric_counts;
    for (const auto& r : records) {
        if (!r.n_major || !r.n_minor) continue;
        parsing::ErrorCounts c;
        c.n_major = *r.n_major;
        c.n_minor = *r.n_minor;
        metric_counts[r.segment_key] = c;
    }
    const auto metric_dist =
        reports::error_distribution(metric_counts, header.strategy);
    write_text_file(out_dir / "distribution_metric.csv",
                    reports::distribution_csv({metric_dist}, header.manifest_digest));

    if (!a.gold_annotations.empty()) {
        const auto annotations = corpus::load_annotations(a.gold_annotations);
        std::map<corpus::SegmentKey, parsing::ErrorCounts> gold_counts;
        for (const auto& [key, spans] : annotations) {
            parsing::ErrorCounts c;
            for (const auto& span : spans) {
                if (span.severity == corpus::Severity::Major)
                    ++c.n_major;
                else
                    ++c.n_minor;
            }
            gold_counts[key] = c;
        }
        const auto gold_dist = reports::error_distribution(gold_counts, "MQM gold");
        write_text_file(out_dir / "distribution_gold.csv",
                        reports::distribution_csv({gold_dist}, header.manifest_digest));
        const auto distance = reports::distribution_distance(metric_dist, gold_dist);
        std::ostringstream distance_text;
        distance_text.setf(std::ios::fixed);
        distance_text.precision(6);
        distance_text << "tv_distance_major=" << distance.major << '\n'
                      << "tv_distance_minor=" << distance.minor << '\n'
                      << "tv_distance_mean=" << distance.mean << '\n';
        write_text_file(out_dir / "tv_distance.txt", distance_text.str());
        std::cout << distance_text.str();
    }

    if (a.compare_paths) {
        std::map<corpus::SegmentKey, std::string> identify_responses;
        std::map<corpus::SegmentKey, std::string> count_responses;
        for (const auto& r : records) {
            if (!r.identify_response || !r.count_response)
                throw DataError("record " + r.segment_key.to_string() +
                                " lacks identify/count responses; --compare-paths needs a "
                                "two-step run with --count-path query");
            identify_responses[r.segment_key] = *r.identify_response;
            count_responses[r.segment_key] = *r.count_response;
        }
        const auto agreement = reports::compare_count_paths(identify_responses,
                                                            count_responses);
        const auto text = reports::agreement_report_text(agreement);
        write_text_file(out_dir / "count_path_agreement.txt", text);
        std::cout << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM-as-judge translation evaluation with MQM meta-evaluation"};
    app.require_subcommand(1);

    EvaluateArgs ev;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Score every segment of a dataset through the configured prompt");
    evaluate->add_option("dataset", ev.dataset_path, "segment file (.tsv or .jsonl)")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--prompt", ev.prompt_kind, "prompting strategy")
        ->required()
        ->check(CLI::IsMember({"gemba-da", "eaprompt"}));
    evaluate
        ->add_option("--variant", ev.variant_str,
                     "error-analysis prompt shape (default 2step-itemized)")
        ->check(CLI::IsMember(
            {"1step-itemized", "1step-detailed", "2step-itemized", "2step-detailed"}));
    evaluate->add_flag("--ref,!--no-ref", ev.use_reference,
                       "include the reference translation (default --ref)");
    evaluate->add_option("--count-path", ev.count_path_str,
                         "how error counts are obtained for eaprompt")
        ->check(CLI::IsMember({"query", "regex"}));
    evaluate->add_option("--w-major", ev.w_major, "major-error weight for record scores");
    evaluate->add_option("--provider", ev.provider_kind, "completion backend")
        ->check(CLI::IsMember({"mock", "http"}));
    evaluate->add_option("--mock-script", ev.mock_script, "scripted responses (JSON)")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--endpoint", ev.endpoint, "http base URL, e.g. http://host:port");
    evaluate->add_option("--profile", ev.profile_path, "protocol profile JSON")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--model", ev.model, "model name sent to the provider");
    evaluate->add_option("--temperature", ev.temperature, "base sampling temperature");
    evaluate->add_option("--temperature-step", ev.temperature_step,
                         "temperature increase per invalid-answer retry");
    evaluate->add_option("--max-retries", ev.max_retries, "invalid-answer retries");
    evaluate->add_option("--parallelism", ev.parallelism, "concurrent segments");
    evaluate->add_option("--timeout-ms", ev.timeout_ms, "http timeout");
    evaluate->add_option("--cache-dir", ev.cache_dir, "response cache directory");
    evaluate->add_option("--prompts", ev.prompts_manifest, "prompt manifest JSON");
    evaluate->add_option("--out", ev.out_path, "run-records output path");
    evaluate
        ->add_option("--parse-failure-threshold", ev.parse_failure_threshold,
                     "fail (exit 4) when the parse-failure fraction exceeds this")
        ->check(CLI::Range(0.0, 1.0));

    MetaEvalArgs me;
    CLI::App* meta = app.add_subcommand("meta-eval",
                                        "Compare run records against MQM gold scores");
    meta->add_option("--records", me.records_path, "run-records file")
        ->required()
        ->check(CLI::ExistingFile);
    meta->add_option("--gold", me.gold_path, "gold score TSV")
        ->required()
        ->check(CLI::ExistingFile);
    meta->add_option("--sweep", me.sweep, "w_major grid, \"1..10\" or \"1,2,5\"");
    meta->add_option("--gold-ties", me.gold_ties,
                     "gold tie convention: exact equality, or the metric's epsilon window")
        ->check(CLI::IsMember({"exact", "epsilon"}));
    meta->add_option("--out", me.out_path, "report JSON output path");

    ReportArgs rp;
    CLI::App* report = app.add_subcommand("report",
                                          "Export error distributions and path agreement");
    report->add_option("--records", rp.records_path, "run-records file")
        ->required()
        ->check(CLI::ExistingFile);
    report->add_option("--gold-annotations", rp.gold_annotations,
                       "MQM annotation TSV for the gold distribution")
        ->check(CLI::ExistingFile);
    report->add_option("--out-dir", rp.out_dir, "output directory");
    report->add_flag("--compare-paths", rp.compare_paths,
                     "check regex counting against the counting-query replies");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(evaluate)) return cmd_evaluate(ev);
        if (app.got_subcommand(meta)) return cmd_meta_eval(me);
        return cmd_report(rp);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const eaeval::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const eaeval::InvalidResponseError& e) {
        std::cerr << "provider error: " << e.what() << '\n';
        return 3;
    } catch (const eaeval::TransportError& e) {
        std::cerr << "provider error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
