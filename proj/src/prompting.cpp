#include "eaeval/prompting.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eaeval/digest.hpp"
#include "eaeval/errors.hpp"
#include "eaeval/parsing.hpp"

namespace eaeval::prompting {

using nlohmann::json;

std::string role_name(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    throw DataError("unknown message role");
}

std::string stage_name(Stage stage) {
    switch (stage) {
        case Stage::Identify: return "identify";
        case Stage::Count: return "count";
        case Stage::Single: return "single";
    }
    throw DataError("unknown prompt stage");
}

PromptVariant PromptVariant::gemba(bool use_reference) {
    PromptVariant v;
    v.strategy = Strategy::GembaDA;
    v.use_reference = use_reference;
    return v;
}

PromptVariant PromptVariant::eaprompt(Steps steps, DemoStyle demo, bool use_reference) {
    PromptVariant v;
    v.strategy = Strategy::EAPrompt;
    v.steps = steps;
    v.demo_style = demo;
    v.use_reference = use_reference;
    return v;
}

void PromptVariant::validate() const {
    if (strategy == Strategy::GembaDA) {
        if (steps || demo_style)
            throw DataError("direct-assessment variant takes no steps/demo_style");
    } else {
        if (!steps || !demo_style)
            throw DataError("error-analysis variant requires steps and demo_style");
    }
}

std::string PromptVariant::tag() const {
    validate();
    if (strategy == Strategy::GembaDA)
        return std::string("gemba-da:") + (use_reference ? "ref" : "noref");
    std::string out = "eaprompt:";
    out += *steps == Steps::OneStep ? "1step" : "2step";
    out += *demo_style == DemoStyle::Itemized ? ":itemized" : ":detailed";
    out += use_reference ? ":ref" : ":noref";
    return out;
}

std::optional<PromptVariant> variant_from_tag(std::string_view tag) {
    std::vector<std::string> parts;
    std::string current;
    for (const char c : tag) {
        if (c == ':') {
            parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    parts.push_back(current);

    const auto ref_flag = [](const std::string& s) -> std::optional<bool> {
        if (s == "ref") return true;
        if (s == "noref") return false;
        return std::nullopt;
    };

    if (parts.size() == 2 && parts[0] == "gemba-da") {
        if (const auto r = ref_flag(parts[1])) return PromptVariant::gemba(*r);
        return std::nullopt;
    }
    if (parts.size() == 4 && parts[0] == "eaprompt") {
        std::optional<Steps> steps;
        if (parts[1] == "1step") steps = Steps::OneStep;
        if (parts[1] == "2step") steps = Steps::TwoStep;
        std::optional<DemoStyle> demo;
        if (parts[2] == "itemized") demo = DemoStyle::Itemized;
        if (parts[2] == "detailed") demo = DemoStyle::Detailed;
        const auto r = ref_flag(parts[3]);
        if (steps && demo && r) return PromptVariant::eaprompt(*steps, *demo, *r);
    }
    return std::nullopt;
}

std::string language_name(std::string_view code) {
    static const std::map<std::string_view, std::string_view> names = {
        {"ar", "Arabic"},  {"cs", "Czech"},    {"da", "Danish"},  {"de", "German"},
        {"en", "English"}, {"es", "Spanish"},  {"fi", "Finnish"}, {"fr", "French"},
        {"he", "Hebrew"},  {"hi", "Hindi"},    {"it", "Italian"}, {"ja", "Japanese"},
        {"ko", "Korean"},  {"liv", "Livonian"}, {"nl", "Dutch"},  {"pl", "Polish"},
        {"pt", "Portuguese"}, {"ru", "Russian"}, {"sv", "Swedish"}, {"tr", "Turkish"},
        {"uk", "Ukrainian"}, {"zh", "Chinese"},
    };
    const auto it = names.find(code);
    if (it != names.end()) return std::string(it->second);
    return std::string(code);
}

std::pair<std::string, std::string> lang_pair_names(const std::string& lang_pair) {
    const auto dash = lang_pair.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == lang_pair.size())
        throw DataError("malformed language pair: \"" + lang_pair + "\" (expected src-tgt)");
    return {language_name(std::string_view(lang_pair).substr(0, dash)),
            language_name(std::string_view(lang_pair).substr(dash + 1))};
}

namespace {

const std::set<std::string>& known_placeholders() {
    static const std::set<std::string> names = {"source",      "reference", "hypothesis",
                                                "source_lang", "target_lang", "n_major",
                                                "n_minor"};
    return names;
}

std::string render(const std::string& tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string::npos) {
                const std::string name = tmpl.substr(i + 1, close - i - 1);
                const auto it = values.find(name);
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
                if (known_placeholders().count(name))
                    throw DataError("template needs {" + name +
                                    "} but no value was supplied; check that the template "
                                    "matches the variant (reference vs reference-less)");
            }
        }
        out += tmpl[i++];
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::map<std::string, std::string> segment_values(const corpus::Segment& seg, bool with_ref) {
    const auto [src_lang, tgt_lang] = lang_pair_names(seg.lang_pair);
    std::map<std::string, std::string> values = {{"source", seg.source},
                                                 {"hypothesis", seg.hypothesis},
                                                 {"source_lang", src_lang},
                                                 {"target_lang", tgt_lang}};
    if (with_ref) values["reference"] = *seg.reference;
    return values;
}

std::map<std::string, std::string> exemplar_values(const Exemplar& ex, bool with_ref) {
    const auto [src_lang, tgt_lang] = lang_pair_names(ex.lang_pair);
    std::map<std::string, std::string> values = {{"source", ex.source},
                                                 {"hypothesis", ex.hypothesis},
                                                 {"source_lang", src_lang},
                                                 {"target_lang", tgt_lang}};
    if (with_ref) values["reference"] = ex.reference;
    return values;
}

void require_reference(const corpus::Segment& seg, const PromptVariant& v) {
    if (v.use_reference && !seg.reference)
        throw DataError("variant " + v.tag() + " needs a reference but segment " +
                        corpus::SegmentKey{seg.lang_pair, seg.system_id, seg.seg_index}
                            .to_string() +
                        " has none");
}

}  // namespace

PromptLibrary PromptLibrary::load(const std::filesystem::path& manifest_path) {
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw DataError("bad prompt manifest " + manifest_path.string() + ": " + e.what());
    }

    PromptLibrary lib;
    lib.file_digests_["manifest"] = sha256_file(manifest_path);
    const auto base = manifest_path.parent_path();

    static const std::array<const char*, 8> required = {
        "gemba_da_ref",    "gemba_da_noref", "ea_identify_ref", "ea_identify_noref",
        "ea_onestep_ref",  "ea_onestep_noref", "ea_count",      "ea_count_answer"};

    try {
        for (const auto& [name, rel] : manifest.at("templates").items()) {
            const auto path = base / rel.get<std::string>();
            lib.templates_[name] = read_file(path);
            lib.file_digests_["template:" + name] = sha256_file(path);
        }
        for (const auto& [lp, rel] : manifest.at("exemplars").items()) {
            const auto path = base / rel.get<std::string>();
            json ej;
            try {
                ej = json::parse(read_file(path));
            } catch (const json::exception& e) {
                throw DataError("bad exemplar file " + path.string() + ": " + e.what());
            }
            Exemplar ex;
            ex.lang_pair = ej.at("lang_pair").get<std::string>();
            ex.source = ej.at("source").get<std::string>();
            ex.reference = ej.at("reference").get<std::string>();
            ex.hypothesis = ej.at("hypothesis").get<std::string>();
            ex.itemized_response = ej.at("itemized_response").get<std::string>();
            ex.detailed_response = ej.at("detailed_response").get<std::string>();
            ex.major_count = ej.at("major_count").get<int>();
            ex.minor_count = ej.at("minor_count").get<int>();
            if (ex.lang_pair != lp)
                throw DataError("exemplar " + path.string() + " declares lang_pair " +
                                ex.lang_pair + " but the manifest maps it to " + lp);
            if (ex.major_count < 0 || ex.minor_count < 0)
                throw DataError("exemplar " + path.string() + ": negative error count");
            const auto counted = parsing::count_errors_regex(ex.itemized_response);
            if (counted.format_warning || counted.n_major != ex.major_count ||
                counted.n_minor != ex.minor_count)
                throw DataError(
                    "exemplar " + path.string() + ": itemized_response counts to (" +
                    std::to_string(counted.n_major) + "," + std::to_string(counted.n_minor) +
                    ") by regex but declares (" + std::to_string(ex.major_count) + "," +
                    std::to_string(ex.minor_count) +
                    "); demonstrations must stay machine-countable");
            lib.exemplars_[lp] = std::move(ex);
            lib.file_digests_["exemplar:" + lp] = sha256_file(path);
        }
        if (manifest.contains("allow_target_language_exemplar_fallback"))
            lib.target_language_fallback_ =
                manifest.at("allow_target_language_exemplar_fallback").get<bool>();
    } catch (const json::exception& e) {
        throw DataError("bad prompt manifest " + manifest_path.string() + ": " + e.what());
    }

    for (const char* name : required)
        if (!lib.templates_.count(name))
            throw DataError("prompt manifest " + manifest_path.string() +
                            " is missing template \"" + name + "\"");
    return lib;
}

const std::string& PromptLibrary::template_named(const std::string& name) const {
    const auto it = templates_.find(name);
    if (it == templates_.end()) throw DataError("no template named \"" + name + "\"");
    return it->second;
}

bool PromptLibrary::has_exemplar(const std::string& lang_pair) const {
    return exemplars_.count(lang_pair) > 0;
}

const Exemplar& PromptLibrary::exemplar_for(const std::string& lang_pair) const {
    const auto it = exemplars_.find(lang_pair);
    if (it != exemplars_.end()) return it->second;
    if (target_language_fallback_) {
        const auto target = lang_pair_names(lang_pair).second;
        for (const auto& [lp, ex] : exemplars_)
            if (lang_pair_names(lp).second == target) return ex;
    }
    std::string available;
    for (const auto& [lp, ex] : exemplars_) {
        (void)ex;
        if (!available.empty()) available += ", ";
        available += lp;
    }
    throw DataError("no exemplar for language pair " + lang_pair + " (available: " +
                    available + ")");
}

std::string PromptLibrary::exemplar_response(const Exemplar& ex, const PromptVariant& v) const {
    std::string out =
        *v.demo_style == DemoStyle::Itemized ? ex.itemized_response : ex.detailed_response;
    if (*v.steps == Steps::OneStep) {
        out += "\n\n";
        out += render(template_named("ea_count_answer"),
                      {{"n_major", std::to_string(ex.major_count)},
                       {"n_minor", std::to_string(ex.minor_count)}});
    }
    return out;
}

PromptBundle PromptLibrary::build_gemba_da(const corpus::Segment& seg,
                                           const PromptVariant& v) const {
    v.validate();
    if (v.strategy != Strategy::GembaDA)
        throw DataError("build_gemba_da called with variant " + v.tag());
    require_reference(seg, v);

    PromptBundle bundle;
    bundle.variant = v;
    bundle.segment_key = {seg.lang_pair, seg.system_id, seg.seg_index};
    bundle.stage = Stage::Single;
    const auto& tmpl = template_named(v.use_reference ? "gemba_da_ref" : "gemba_da_noref");
    bundle.messages.push_back({Role::User, render(tmpl, segment_values(seg, v.use_reference))});
    return bundle;
}

PromptBundle PromptLibrary::build_eaprompt_identify(const corpus::Segment& seg,
                                                    const Exemplar& ex,
                                                    const PromptVariant& v) const {
    v.validate();
    if (v.strategy != Strategy::EAPrompt)
        throw DataError("build_eaprompt_identify called with variant " + v.tag());
    if (ex.lang_pair != seg.lang_pair) {
        const bool target_match =
            target_language_fallback_ &&
            lang_pair_names(ex.lang_pair).second == lang_pair_names(seg.lang_pair).second;
        if (!target_match)
            throw DataError("exemplar language pair " + ex.lang_pair +
                            " does not match segment language pair " + seg.lang_pair);
    }
    require_reference(seg, v);

    const bool one_step = *v.steps == Steps::OneStep;
    const auto& tmpl = template_named(
        one_step ? (v.use_reference ? "ea_onestep_ref" : "ea_onestep_noref")
                 : (v.use_reference ? "ea_identify_ref" : "ea_identify_noref"));

    PromptBundle bundle;
    bundle.variant = v;
    bundle.segment_key = {seg.lang_pair, seg.system_id, seg.seg_index};
    bundle.stage = one_step ? Stage::Single : Stage::Identify;
    bundle.messages.push_back({Role::User, render(tmpl, exemplar_values(ex, v.use_reference))});
    bundle.messages.push_back({Role::Assistant, exemplar_response(ex, v)});
    bundle.messages.push_back({Role::User, render(tmpl, segment_values(seg, v.use_reference))});
    return bundle;
}

PromptBundle PromptLibrary::build_eaprompt_count(const PromptBundle& identify,
                                                 const std::string& identify_response) const {
    if (identify.stage != Stage::Identify)
        throw DataError("count follow-up requires an identify-stage bundle, got stage " +
                        std::to_string(int(identify.stage)));
    if (blank(identify_response))
        throw DataError("count follow-up requires a non-empty identify response for " +
                        identify.segment_key.to_string());

    PromptBundle bundle = identify;
    bundle.stage = Stage::Count;
    bundle.messages.push_back({Role::Assistant, identify_response});
    bundle.messages.push_back({Role::User, template_named("ea_count")});
    return bundle;
}

std::string PromptLibrary::config_digest() const {
    std::string acc;
    for (const auto& [name, digest] : file_digests_) {
        acc += name;
        acc += '=';
        acc += digest;
        acc += '\n';
    }
    return sha256_hex(acc);
}

}  // namespace eaeval::prompting
