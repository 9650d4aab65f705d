#pragma once

// Prompt construction for both evaluation strategies.
//
// Direct assessment sends one zero-shot scoring request. Error analysis sends
// a one-shot exemplar followed by the segment under evaluation, either as a
// single combined query or as an identify turn plus a counting follow-up.
// Instruction wording lives in template files; exemplars are per-language-pair
// config, both referenced from a manifest.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eaeval/corpus.hpp"

namespace eaeval::prompting {

enum class Strategy { GembaDA, EAPrompt };
enum class Steps { OneStep, TwoStep };
enum class DemoStyle { Itemized, Detailed };
enum class Stage { Identify, Count, Single };
enum class Role { System, User, Assistant };

std::string role_name(Role role);
std::string stage_name(Stage stage);

struct PromptVariant {
    Strategy strategy = Strategy::GembaDA;
    std::optional<Steps> steps;            // EAPrompt only
    std::optional<DemoStyle> demo_style;   // EAPrompt only
    bool use_reference = true;

    static PromptVariant gemba(bool use_reference);
    static PromptVariant eaprompt(Steps steps, DemoStyle demo, bool use_reference);

    // GembaDA leaves steps/demo_style unset; EAPrompt sets both.
    void validate() const;

    // Stable tag used in run records and reports, e.g. "gemba-da:ref",
    // "eaprompt:2step:itemized:noref".
    std::string tag() const;
};

std::optional<PromptVariant> variant_from_tag(std::string_view tag);

struct Message {
    Role role = Role::User;
    std::string content;

    bool operator==(const Message&) const = default;
};

struct PromptBundle {
    std::vector<Message> messages;
    PromptVariant variant;
    corpus::SegmentKey segment_key;
    Stage stage = Stage::Single;
};

struct Exemplar {
    std::string lang_pair;
    std::string source;
    std::string reference;
    std::string hypothesis;
    std::string itemized_response;
    std::string detailed_response;
    int major_count = 0;
    int minor_count = 0;
};

// "en" -> "English"; unknown codes are returned unchanged.
std::string language_name(std::string_view code);

// Splits "zh-en" into source and target language names.
std::pair<std::string, std::string> lang_pair_names(const std::string& lang_pair);

class PromptLibrary {
  public:
    // Manifest JSON: {"templates": {name: relpath}, "exemplars": {lang_pair:
    // relpath}, "allow_target_language_exemplar_fallback": bool}. Paths are
    // relative to the manifest's directory. Each exemplar's itemized response
    // must regex-count to its declared totals so the no-query counting path
    // stays consistent with the demonstrations.
    static PromptLibrary load(const std::filesystem::path& manifest_path);

    PromptBundle build_gemba_da(const corpus::Segment& seg, const PromptVariant& v) const;
    PromptBundle build_eaprompt_identify(const corpus::Segment& seg, const Exemplar& ex,
                                         const PromptVariant& v) const;
    PromptBundle build_eaprompt_count(const PromptBundle& identify,
                                      const std::string& identify_response) const;

    bool has_exemplar(const std::string& lang_pair) const;
    const Exemplar& exemplar_for(const std::string& lang_pair) const;

    // name -> sha256 of file content, for run manifests.
    const std::map<std::string, std::string>& file_digests() const { return file_digests_; }
    // Single digest over every template and exemplar, order-independent.
    std::string config_digest() const;

  private:
    std::map<std::string, std::string> templates_;
    std::map<std::string, Exemplar> exemplars_;
    std::map<std::string, std::string> file_digests_;
    bool target_language_fallback_ = false;

    const std::string& template_named(const std::string& name) const;
    std::string exemplar_response(const Exemplar& ex, const PromptVariant& v) const;
};

}  // namespace eaeval::prompting
