#pragma once

#include <optional>
#include <string>

namespace eaeval::parsing {

// Bumped whenever extraction behavior changes; serialized run records carry
// it so downstream comparisons know which parser produced the counts.
inline constexpr const char* kParserVersion = "v1";

enum class Provenance { CountQuery, RegexMatch };

std::string provenance_name(Provenance p);
Provenance parse_provenance(const std::string& name);

// Major/minor error counts extracted from a response.
struct ErrorCounts {
    int n_major = 0;
    int n_minor = 0;
    Provenance provenance = Provenance::CountQuery;
    // Set when the regex counter found neither section heading: "format not
    // understood" rather than "no errors found".
    bool format_warning = false;

    bool operator==(const ErrorCounts& other) const {
        return n_major == other.n_major && n_minor == other.n_minor;
    }
};

// A direct-assessment quality score on the 0-100 scale.
struct DirectScore {
    double value = 0.0;
};

// Pulls a 0-100 score out of a direct-assessment response: first in-range
// number after a "score" cue, else the first standalone in-range number.
// nullopt when the text has no usable number (feeds the retry loop).
std::optional<DirectScore> parse_gemba(const std::string& text);

// Extracts the two counts from a counting-query reply by binding integers to
// "major"/"minor" mentions. nullopt when either count cannot be bound.
std::optional<ErrorCounts> parse_count_reply(const std::string& text);

struct RegexCountOptions {
    // Dash bullets ("- item") are not an enumerator format of the counting
    // procedure; some models emit them anyway.
    bool count_dash_bullets = false;
};

// Counts enumerated items under the major/minor section headings of an
// identify-stage response. Total: text without headings counts (0,0) with
// format_warning set. Recognized enumerators at line start: "1.", "1)", "(1)".
ErrorCounts count_errors_regex(const std::string& text, const RegexCountOptions& options = {});

// True when text plausibly answers an identify-errors instruction: it has a
// severity section heading or explicitly states the translation has no
// errors. Used as the retry validator for identify-stage responses.
bool looks_like_identify_response(const std::string& text);

}  // namespace eaeval::parsing
