#include "eaeval/parsing.hpp"

#include "eaeval/errors.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <vector>

namespace eaeval::parsing {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string lowercase(const std::string& text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

struct NumberToken {
    std::size_t begin = 0;
    std::size_t end = 0;
    double value = 0.0;
};

// Standalone decimal numbers: not glued to a word, an identifier, a version
// string ("v1.2") or a sign ("-5").
std::vector<NumberToken> find_numbers(const std::string& text) {
    static const std::regex number_re(R"([0-9]+(\.[0-9]+)?)");
    std::vector<NumberToken> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), number_re);
         it != std::sregex_iterator(); ++it) {
        const std::size_t begin = std::size_t(it->position());
        const std::size_t end = begin + std::size_t(it->length());
        if (begin > 0) {
            const char prev = text[begin - 1];
            if (is_word_char(prev) || prev == '-' || prev == '.' || prev == '+') continue;
        }
        if (end < text.size() && is_word_char(text[end])) continue;
        out.push_back({begin, end, std::stod(it->str())});
    }
    return out;
}

const std::vector<std::pair<std::string, int>>& number_words() {
    static const std::vector<std::pair<std::string, int>> words = {
        {"zero", 0}, {"none", 0}, {"no", 0},   {"one", 1},  {"two", 2},   {"three", 3},
        {"four", 4}, {"five", 5}, {"six", 6},  {"seven", 7}, {"eight", 8}, {"nine", 9},
        {"ten", 10}};
    return words;
}

std::optional<int> word_to_count(const std::string& token) {
    for (const auto& [word, value] : number_words())
        if (token == word) return value;
    return std::nullopt;
}

// The last whitespace-separated token strictly before `pos`, verbatim, and
// only from the same line. Kept unstripped so "2." (a sentence boundary)
// fails the count check and cannot leak across sentences like "Major: 2.
// Minor: 0."; the same-line rule keeps the tail of one section ("... none")
// from binding to the next section's heading.
std::optional<std::string> token_before(const std::string& lower, std::size_t pos) {
    std::size_t end = pos;
    while (end > 0 && std::isspace(static_cast<unsigned char>(lower[end - 1]))) {
        if (lower[end - 1] == '\n' || lower[end - 1] == '\r') return std::nullopt;
        --end;
    }
    if (end == 0) return std::nullopt;
    std::size_t begin = end;
    while (begin > 0 && !std::isspace(static_cast<unsigned char>(lower[begin - 1]))) --begin;
    if (begin == end) return std::nullopt;
    return lower.substr(begin, end - begin);
}

std::optional<int> parse_count_token(const std::string& token) {
    if (!token.empty() && std::all_of(token.begin(), token.end(), [](unsigned char c) {
            return std::isdigit(c) != 0;
        })) {
        try {
            return std::stoi(token);
        } catch (const std::exception&) {
            return std::nullopt;  // out of int range
        }
    }
    return word_to_count(token);
}

// Binds a count to one severity mention: the token immediately before the
// word ("2 major errors") or, when windowed binding is allowed, the first
// count token within a short window after it ("major errors: 2"), stopping at
// the opposite severity word.
std::optional<int> bind_count(const std::string& lower, std::size_t word_pos,
                              std::size_t word_end, const std::string& other_word,
                              bool before_only) {
    if (auto before = token_before(lower, word_pos)) {
        if (auto n = parse_count_token(*before)) return n;
    }
    if (before_only) return std::nullopt;

    constexpr std::size_t kWindow = 48;
    const std::size_t stop = std::min(lower.size(), word_end + kWindow);
    std::string window = lower.substr(word_end, stop - word_end);
    const auto other = window.find(other_word);
    if (other != std::string::npos) window.resize(other);

    static const std::regex token_re(R"([a-z0-9]+)");
    for (auto it = std::sregex_iterator(window.begin(), window.end(), token_re);
         it != std::sregex_iterator(); ++it) {
        if (auto n = parse_count_token(it->str())) return n;
    }
    return std::nullopt;
}

// Two passes over every whole-word occurrence: adjacent-before bindings are
// unambiguous ("there are 2 major errors") and win over windowed ones, which
// could otherwise latch onto an enumerator right under a section heading in
// a combined identify-and-count response.
std::optional<int> bind_severity_count(const std::string& lower, const std::string& word,
                                       const std::string& other_word) {
    for (const bool before_only : {true, false}) {
        std::size_t pos = 0;
        while ((pos = lower.find(word, pos)) != std::string::npos) {
            // Whole-word match only ("minority" must not bind "minor").
            const bool left_ok = pos == 0 || !is_word_char(lower[pos - 1]);
            const std::size_t end = pos + word.size();
            const bool right_ok = end >= lower.size() || !is_word_char(lower[end]);
            if (left_ok && right_ok) {
                if (auto n = bind_count(lower, pos, end, other_word, before_only)) {
                    if (*n >= 0) return n;
                }
            }
            pos = end;
        }
    }
    return std::nullopt;
}

struct SectionSpan {
    bool found = false;
    std::size_t begin = 0;  // start of the heading match
    std::size_t end = 0;    // exclusive
};

// First case-insensitive occurrence of "<severity> error(s)".
SectionSpan find_heading(const std::string& text, const char* severity) {
    const std::regex heading_re(std::string(severity) + R"(\s+errors?)",
                                std::regex::icase);
    std::smatch m;
    if (!std::regex_search(text, m, heading_re)) return {};
    return {true, std::size_t(m.position()), text.size()};
}

int count_enumerated_lines(const std::string& section, const RegexCountOptions& options) {
    static const std::regex enum_re(R"(^\s*(\(\d+\)|\d+\.|\d+\))(\s|$))");
    static const std::regex dash_re(R"(^\s*-\s+\S)");
    int count = 0;
    std::size_t start = 0;
    while (start <= section.size()) {
        std::size_t nl = section.find('\n', start);
        if (nl == std::string::npos) nl = section.size();
        const std::string line = section.substr(start, nl - start);
        if (std::regex_search(line, enum_re)) ++count;
        else if (options.count_dash_bullets && std::regex_search(line, dash_re)) ++count;
        if (nl == section.size()) break;
        start = nl + 1;
    }
    return count;
}

}  // namespace

std::string provenance_name(Provenance p) {
    return p == Provenance::CountQuery ? "count_query" : "regex_match";
}

Provenance parse_provenance(const std::string& name) {
    if (name == "count_query") return Provenance::CountQuery;
    if (name == "regex_match") return Provenance::RegexMatch;
    throw DataError("unknown provenance: '" + name + "'");
}

std::optional<DirectScore> parse_gemba(const std::string& text) {
    const auto numbers = find_numbers(text);
    if (numbers.empty()) return std::nullopt;

    const auto in_range = [](double v) { return v >= 0.0 && v <= 100.0; };

    const std::string lower = lowercase(text);
    const std::size_t cue = lower.find("score");
    if (cue != std::string::npos) {
        for (const auto& num : numbers) {
            if (num.begin >= cue + 5 && in_range(num.value)) return DirectScore{num.value};
        }
    }
    for (const auto& num : numbers) {
        if (in_range(num.value)) return DirectScore{num.value};
    }
    return std::nullopt;
}

std::optional<ErrorCounts> parse_count_reply(const std::string& text) {
    const std::string lower = lowercase(text);
    const auto major = bind_severity_count(lower, "major", "minor");
    const auto minor = bind_severity_count(lower, "minor", "major");
    if (!major || !minor) return std::nullopt;
    return ErrorCounts{*major, *minor, Provenance::CountQuery, false};
}

ErrorCounts count_errors_regex(const std::string& text, const RegexCountOptions& options) {
    SectionSpan major = find_heading(text, "major");
    SectionSpan minor = find_heading(text, "minor");

    // Each section runs from its heading to the other heading (when that one
    // comes later) or to the end of the text.
    if (major.found && minor.found) {
        if (major.begin < minor.begin) major.end = minor.begin;
        else minor.end = major.begin;
    }

    ErrorCounts counts;
    counts.provenance = Provenance::RegexMatch;
    if (major.found)
        counts.n_major =
            count_enumerated_lines(text.substr(major.begin, major.end - major.begin), options);
    if (minor.found)
        counts.n_minor =
            count_enumerated_lines(text.substr(minor.begin, minor.end - minor.begin), options);
    counts.format_warning = !major.found && !minor.found;
    return counts;
}

bool looks_like_identify_response(const std::string& text) {
    if (find_heading(text, "major").found || find_heading(text, "minor").found) return true;
    static const std::regex no_errors_re(
        R"((no|free of|without|doesn't contain|does not contain|contains no)\s+(any\s+)?(errors|issues|mistakes)|error[ -]free)",
        std::regex::icase);
    return std::regex_search(text, no_errors_re);
}

}  // namespace eaeval::parsing
