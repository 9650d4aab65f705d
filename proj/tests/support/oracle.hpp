#pragma once

// Reference implementations for the meta-evaluation statistics, written the
// slow obvious way: enumerate every pair, evaluate every candidate threshold
// from scratch. Deliberately independent of src/metaeval.cpp; only the score
// matrix container is shared. Mean expressions mirror the production ones
// term for term so agreement can be asserted with exact equality.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "eaeval/corpus.hpp"

namespace oracle {

using eaeval::corpus::ScoreMatrix;
using eaeval::corpus::SegmentId;

inline int sign(double d) {
    return (d > 0.0) - (d < 0.0);
}

inline std::vector<SegmentId> segments_sorted(const ScoreMatrix& m) {
    std::vector<SegmentId> out = m.segments();
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::string> systems_sorted(const ScoreMatrix& m) {
    std::vector<std::string> out = m.systems();
    std::sort(out.begin(), out.end());
    return out;
}

// Mean of `scores` per (lang_pair, system) over cells scored in both
// matrices, accumulated in ascending (lang_pair, seg_index) order.
inline std::map<std::pair<std::string, std::string>, double> aggregate(
    const ScoreMatrix& scores, const ScoreMatrix& other) {
    std::map<std::pair<std::string, std::string>, double> out;
    const auto segments = segments_sorted(scores);
    for (const auto& sys : systems_sorted(scores)) {
        std::map<std::string, double> sum;
        std::map<std::string, std::size_t> count;
        for (const auto& seg : segments) {
            const auto own = scores.get(sys, seg.lang_pair, seg.seg_index);
            if (!own || !other.has(sys, seg.lang_pair, seg.seg_index)) continue;
            sum[seg.lang_pair] += *own;
            count[seg.lang_pair] += 1;
        }
        for (const auto& [lp, s] : sum) out[{lp, sys}] = s / double(count[lp]);
    }
    return out;
}

// Pooled sign-concordance over all same-language-pair system pairs of the
// aggregated means. nullopt when no language pair has two comparable systems.
inline std::optional<double> system_accuracy(const ScoreMatrix& metric, const ScoreMatrix& gold,
                                             std::size_t* pairs_out = nullptr) {
    const auto m_agg = aggregate(metric, gold);
    const auto g_agg = aggregate(gold, metric);

    std::map<std::string, std::vector<std::pair<double, double>>> by_lp;
    for (const auto& [key, g] : g_agg) {
        const auto it = m_agg.find(key);
        if (it != m_agg.end()) by_lp[key.first].emplace_back(it->second, g);
    }

    std::size_t correct = 0;
    std::size_t total = 0;
    for (const auto& [lp, values] : by_lp) {
        (void)lp;
        for (std::size_t i = 0; i < values.size(); ++i) {
            for (std::size_t j = i + 1; j < values.size(); ++j) {
                ++total;
                if (sign(values[i].first - values[j].first) ==
                    sign(values[i].second - values[j].second))
                    ++correct;
            }
        }
    }
    if (total == 0) return std::nullopt;
    if (pairs_out) *pairs_out = total;
    return double(correct) / double(total);
}

// (metric_diff, gold_diff) for every comparable system pair, one vector per
// segment of the language pair, segments ascending, systems ascending.
inline std::vector<std::vector<std::pair<double, double>>> lp_pair_diffs(
    const ScoreMatrix& metric, const ScoreMatrix& gold, const std::string& lang_pair) {
    std::vector<std::vector<std::pair<double, double>>> out;
    const auto systems = systems_sorted(gold);
    for (const auto& seg : segments_sorted(gold)) {
        if (seg.lang_pair != lang_pair) continue;
        std::vector<std::pair<double, double>> scored;
        for (const auto& sys : systems) {
            const auto g = gold.get(sys, seg.lang_pair, seg.seg_index);
            const auto m = metric.get(sys, seg.lang_pair, seg.seg_index);
            if (g && m) scored.emplace_back(*m, *g);
        }
        if (scored.size() < 2) continue;
        std::vector<std::pair<double, double>> diffs;
        for (std::size_t i = 0; i < scored.size(); ++i)
            for (std::size_t j = i + 1; j < scored.size(); ++j)
                diffs.emplace_back(scored[i].first - scored[j].first,
                                   scored[i].second - scored[j].second);
        out.push_back(std::move(diffs));
    }
    return out;
}

inline double acc_at(const std::vector<std::vector<std::pair<double, double>>>& per_segment,
                     double epsilon, bool gold_epsilon) {
    double sum = 0.0;
    for (const auto& pairs : per_segment) {
        std::size_t correct = 0;
        for (const auto& [md, gd] : pairs) {
            const bool metric_tie = std::abs(md) <= epsilon;
            const bool gold_tie = gold_epsilon ? std::abs(gd) <= epsilon : gd == 0.0;
            const bool ok =
                (metric_tie || gold_tie) ? (metric_tie && gold_tie) : sign(md) == sign(gd);
            if (ok) ++correct;
        }
        sum += double(correct) / double(pairs.size());
    }
    return sum / double(per_segment.size());
}

struct AccEqStar {
    double acc = 0.0;
    double epsilon = 0.0;
    std::size_t pairs = 0;
};

// Exhaustive search over 0 plus the midpoints between consecutive distinct
// observed |difference| values; smallest epsilon wins ties.
inline std::optional<AccEqStar> acc_eq_star(const ScoreMatrix& metric, const ScoreMatrix& gold,
                                            const std::string& lang_pair,
                                            bool gold_epsilon = false) {
    const auto per_segment = lp_pair_diffs(metric, gold, lang_pair);
    if (per_segment.empty()) return std::nullopt;

    std::vector<double> diffs;
    std::size_t n_pairs = 0;
    for (const auto& pairs : per_segment) {
        for (const auto& [md, gd] : pairs) {
            diffs.push_back(std::abs(md));
            if (gold_epsilon) diffs.push_back(std::abs(gd));
            ++n_pairs;
        }
    }
    std::sort(diffs.begin(), diffs.end());
    diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());

    std::vector<double> candidates{0.0};
    for (std::size_t i = 0; i + 1 < diffs.size(); ++i)
        candidates.push_back((diffs[i] + diffs[i + 1]) / 2.0);

    AccEqStar best;
    best.acc = -1.0;
    best.pairs = n_pairs;
    for (const double eps : candidates) {
        const double acc = acc_at(per_segment, eps, gold_epsilon);
        if (acc > best.acc) {
            best.acc = acc;
            best.epsilon = eps;
        }
    }
    return best;
}

// Random score-matrix pair: 1-2 language pairs, 2-6 systems, 1-10 segments,
// quarter-step scores in [-5, 5], deliberate exact ties, scattered missing
// cells. Segment 0 always carries two complete systems so every instance has
// at least one comparable pair.
struct Instance {
    ScoreMatrix metric;
    ScoreMatrix gold;
    std::vector<std::string> lang_pairs;
};

inline Instance random_instance(std::mt19937& rng) {
    static const char* kLps[] = {"aa-bb", "cc-dd"};
    std::uniform_int_distribution<int> lp_count(1, 2);
    std::uniform_int_distribution<int> sys_count(2, 6);
    std::uniform_int_distribution<int> seg_count(1, 10);
    std::uniform_int_distribution<int> quarter(-20, 20);
    std::uniform_int_distribution<int> percent(0, 99);

    Instance inst;
    const int n_lps = lp_count(rng);
    for (int l = 0; l < n_lps; ++l) {
        const std::string lp = kLps[l];
        inst.lang_pairs.push_back(lp);
        const int n_sys = sys_count(rng);
        const int n_seg = seg_count(rng);
        for (int seg = 0; seg < n_seg; ++seg) {
            std::vector<double> prev_m;
            std::vector<double> prev_g;
            for (int s = 0; s < n_sys; ++s) {
                const std::string sys = "s" + std::to_string(s);
                double m = quarter(rng) * 0.25;
                double g = quarter(rng) * 0.25;
                if (!prev_m.empty() && percent(rng) < 30)
                    m = prev_m[std::uniform_int_distribution<std::size_t>(
                        0, prev_m.size() - 1)(rng)];
                if (!prev_g.empty() && percent(rng) < 30)
                    g = prev_g[std::uniform_int_distribution<std::size_t>(
                        0, prev_g.size() - 1)(rng)];
                const bool anchored = seg == 0 && s < 2;
                if (anchored || percent(rng) >= 12) {
                    inst.metric.set(sys, lp, seg, m);
                    prev_m.push_back(m);
                }
                if (anchored || percent(rng) >= 12) {
                    inst.gold.set(sys, lp, seg, g);
                    prev_g.push_back(g);
                }
            }
        }
    }
    return inst;
}

}  // namespace oracle
