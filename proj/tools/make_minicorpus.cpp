// Regenerates the bundled mini-corpus under data/minicorpus: segments, gold
// scores, MQM-style annotations, and a mock provider script whose responses
// enumerate exactly the planted errors. Gold is -5*majors - minors, so a
// severity weight of 5 reproduces gold exactly while weight 1 scrambles the
// system ranking. Output is deterministic; run it only to regenerate the
// committed files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kLangPairs = {"en-de", "zh-en"};
const std::vector<std::string> kSystems = {"sysA", "sysB", "sysC"};
constexpr int kSegments = 20;

struct Counts {
    int major = 0;
    int minor = 0;
};

Counts base_counts(const std::string& system, int s) {
    if (system == "sysA") return {(s == 3 || s == 11) ? 1 : 0, s < 10 ? 2 : 1};
    if (system == "sysB") return {s <= 8 ? 1 : 0, (s == 4 || s == 14) ? 1 : 0};
    return {s <= 11 ? 1 : 0, s >= 6 ? 1 : 0};  // sysC
}

// The second language pair reuses the per-system patterns shifted by five
// segments, keeping per-system totals equal across language pairs.
Counts counts_for(const std::string& lang_pair, const std::string& system, int s) {
    const int shifted = lang_pair == kLangPairs[1] ? (s + 15) % kSegments : s;
    return base_counts(system, shifted);
}

std::string source_text(const std::string& lang_pair, int s) {
    if (lang_pair == "en-de")
        return "Order update " + std::to_string(s) +
               ": the package leaves the warehouse today.";
    return "订单更新第" + std::to_string(s) + "条：包裹今天离开仓库。";
}

std::string reference_text(const std::string& lang_pair, int s) {
    if (lang_pair == "en-de")
        return "Bestellaktualisierung " + std::to_string(s) +
               ": Das Paket verlässt heute das Lager.";
    return "Order update " + std::to_string(s) + ": the parcel leaves the warehouse today.";
}

std::string hypothesis_text(const std::string& lang_pair, const std::string& system, int s) {
    const std::string n = std::to_string(s);
    if (lang_pair == "en-de") {
        if (system == "sysA") return "Bestell-Update " + n + ": das Paket verlaesst heute das Lager.";
        if (system == "sysB") return "Bestellung " + n + ": Paket geht heute vom Lager.";
        return "Aktualisierung " + n + " der Bestellung: das Paket faehrt heute ab.";
    }
    if (system == "sysA") return "Order updating " + n + ": the parcel goes out of warehouse today.";
    if (system == "sysB") return "Update order " + n + ": parcel leaves storage today.";
    return "The order news " + n + ": today parcel away from warehouse.";
}

std::string identify_text(const Counts& c, int s) {
    std::string out;
    if (c.major == 0) {
        out += "Major errors: none\n";
    } else {
        out += "Major errors:\n";
        for (int k = 1; k <= c.major; ++k)
            out += std::to_string(k) + ". \"segment " + std::to_string(s) + " phrase " +
                   std::to_string(k) + "\" - Accuracy/Mistranslation\n";
    }
    if (c.minor == 0) {
        out += "Minor errors: none";
    } else {
        out += "Minor errors:\n";
        for (int k = 1; k <= c.minor; ++k) {
            out += std::to_string(k) + ". \"segment " + std::to_string(s) + " wording " +
                   std::to_string(k) + "\" - Style/Awkward";
            if (k < c.minor) out += '\n';
        }
    }
    return out;
}

std::string count_text(const Counts& c) {
    return "There are " + std::to_string(c.major) + " major errors and " +
           std::to_string(c.minor) + " minor errors in the translation.";
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot write " << path << '\n';
        std::exit(2);
    }
    out << content;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out_dir = argc > 1 ? argv[1] : "data/minicorpus";
    fs::create_directories(out_dir);

    std::string segments;
    std::string gold;
    std::string annotations;
    json script = json::object();

    for (const auto& lp : kLangPairs) {
        for (const auto& system : kSystems) {
            for (int s = 0; s < kSegments; ++s) {
                const Counts c = counts_for(lp, system, s);
                const std::string doc = "doc" + std::to_string(s / 10);

                segments += lp + "\t" + "ecommerce" + "\t" + doc + "\t" + std::to_string(s) +
                            "\t" + system + "\t" + source_text(lp, s) + "\t" +
                            reference_text(lp, s) + "\t" + hypothesis_text(lp, system, s) +
                            "\n";

                const int gold_score = -(5 * c.major + c.minor);
                gold += lp + "\t" + system + "\t" + std::to_string(s) + "\t" +
                        std::to_string(gold_score) + "\n";

                if (c.major == 0 && c.minor == 0) {
                    annotations += lp + "\t" + system + "\t" + std::to_string(s) +
                                   "\tnone\t\t\n";
                } else {
                    for (int k = 1; k <= c.major; ++k)
                        annotations += lp + "\t" + system + "\t" + std::to_string(s) +
                                       "\tmajor\tsegment " + std::to_string(s) + " phrase " +
                                       std::to_string(k) + "\tAccuracy/Mistranslation\n";
                    for (int k = 1; k <= c.minor; ++k)
                        annotations += lp + "\t" + system + "\t" + std::to_string(s) +
                                       "\tminor\tsegment " + std::to_string(s) + " wording " +
                                       std::to_string(k) + "\tStyle/Awkward\n";
                }

                const std::string key = lp + "|" + system + "|" + std::to_string(s);
                const std::string identify = identify_text(c, s);
                const std::string count = count_text(c);
                script[key + "|identify"] = identify;
                script[key + "|count"] = count;
                script[key + "|single"] =
                    identify + "\n\nCounting the items listed above: " + count;
            }
        }
    }

    write_file(out_dir / "segments.tsv", segments);
    write_file(out_dir / "gold.tsv", gold);
    write_file(out_dir / "annotations.tsv", annotations);
    write_file(out_dir / "mock_script.json", script.dump(2) + "\n");
    std::cout << "wrote mini-corpus to " << out_dir.string() << '\n';
    return 0;
}
