#include "eaeval/metaeval.hpp"

#include "eaeval/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace eaeval::metaeval {

using corpus::ScoreMatrix;
using corpus::SegmentId;

namespace {

int sign_of(double a, double b) {
    return (a > b) - (a < b);
}

// Canonical iteration order shared by every statistic in this module:
// segments sorted by (lang_pair, seg_index), systems sorted by id. Keeping
// one order makes floating-point results reproducible bit-for-bit.
std::vector<SegmentId> sorted_segments(const ScoreMatrix& m) {
    std::vector<SegmentId> out = m.segments();
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> sorted_systems(const ScoreMatrix& m) {
    std::vector<std::string> out = m.systems();
    std::sort(out.begin(), out.end());
    return out;
}

// One comparable (segment, system-pair) observation within a language pair.
struct PairObs {
    std::size_t segment_slot = 0;
    double metric_diff = 0.0;  // m_i - m_j
    double gold_diff = 0.0;    // g_i - g_j, consulted in Epsilon mode only
    int gold_sign = 0;         // 0 marks an exact gold tie
};

struct LpPairs {
    std::vector<PairObs> pairs;
    std::size_t segment_count = 0;          // segments with >= 1 comparable pair
    std::vector<std::size_t> pairs_per_segment;
};

LpPairs collect_pairs(const ScoreMatrix& metric, const ScoreMatrix& gold,
                      const std::string& lang_pair) {
    LpPairs out;
    const auto systems = sorted_systems(gold);
    for (const SegmentId& seg : sorted_segments(gold)) {
        if (seg.lang_pair != lang_pair) continue;
        std::vector<std::pair<double, double>> scored;  // (metric, gold) per system
        for (const auto& sys : systems) {
            const auto g = gold.get(sys, seg.lang_pair, seg.seg_index);
            const auto m = metric.get(sys, seg.lang_pair, seg.seg_index);
            if (g && m) scored.emplace_back(*m, *g);
        }
        if (scored.size() < 2) continue;
        const std::size_t slot = out.segment_count++;
        std::size_t n_pairs = 0;
        for (std::size_t i = 0; i < scored.size(); ++i) {
            for (std::size_t j = i + 1; j < scored.size(); ++j) {
                PairObs obs;
                obs.segment_slot = slot;
                obs.metric_diff = scored[i].first - scored[j].first;
                obs.gold_diff = scored[i].second - scored[j].second;
                obs.gold_sign = sign_of(scored[i].second, scored[j].second);
                out.pairs.push_back(obs);
                ++n_pairs;
            }
        }
        out.pairs_per_segment.push_back(n_pairs);
    }
    return out;
}

bool pair_correct(const PairObs& obs, double epsilon, GoldTieMode mode) {
    const bool metric_tie = std::abs(obs.metric_diff) <= epsilon;
    const bool gold_tie = mode == GoldTieMode::Epsilon ? std::abs(obs.gold_diff) <= epsilon
                                                       : obs.gold_sign == 0;
    if (metric_tie || gold_tie) return metric_tie && gold_tie;
    return sign_of(obs.metric_diff, 0.0) == obs.gold_sign;
}

double mean_segment_accuracy(const std::vector<std::size_t>& correct,
                             const std::vector<std::size_t>& total) {
    double sum = 0.0;
    for (std::size_t s = 0; s < total.size(); ++s)
        sum += double(correct[s]) / double(total[s]);
    return sum / double(total.size());
}

}  // namespace

SystemScores aggregate_system_scores(const ScoreMatrix& scores, const ScoreMatrix& other) {
    SystemScores out;
    const auto segments = sorted_segments(scores);
    for (const auto& sys : sorted_systems(scores)) {
        std::map<std::string, std::pair<double, std::size_t>> per_lp;  // sum, count
        for (const SegmentId& seg : segments) {
            const auto own = scores.get(sys, seg.lang_pair, seg.seg_index);
            if (!own) continue;
            if (!other.has(sys, seg.lang_pair, seg.seg_index)) continue;
            auto& [sum, count] = per_lp[seg.lang_pair];
            sum += *own;
            ++count;
        }
        for (const auto& [lp, acc] : per_lp)
            out[{lp, sys}] = acc.first / double(acc.second);
    }
    return out;
}

double pairwise_accuracy_on_aggregates(const SystemScores& metric, const SystemScores& gold,
                                       std::size_t* pairs_out) {
    // Group comparable systems by language pair.
    std::map<std::string, std::vector<std::pair<double, double>>> by_lp;
    for (const auto& [key, g] : gold) {
        const auto it = metric.find(key);
        if (it != metric.end()) by_lp[key.first].emplace_back(it->second, g);
    }

    std::size_t correct = 0;
    std::size_t total = 0;
    for (const auto& [lp, scores] : by_lp) {
        (void)lp;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            for (std::size_t j = i + 1; j < scores.size(); ++j) {
                ++total;
                if (sign_of(scores[i].first, scores[j].first) ==
                    sign_of(scores[i].second, scores[j].second))
                    ++correct;
            }
        }
    }
    if (total == 0)
        throw DataError("system pairwise accuracy undefined: no language pair has two "
                        "systems scored by both metric and gold");
    if (pairs_out) *pairs_out = total;
    return double(correct) / double(total);
}

double system_pairwise_accuracy(const ScoreMatrix& metric, const ScoreMatrix& gold,
                                std::size_t* pairs_out) {
    return pairwise_accuracy_on_aggregates(aggregate_system_scores(metric, gold),
                                           aggregate_system_scores(gold, metric), pairs_out);
}

double acc_eq_at(const ScoreMatrix& metric, const ScoreMatrix& gold,
                 const std::string& lang_pair, double epsilon, GoldTieMode mode) {
    const LpPairs lp = collect_pairs(metric, gold, lang_pair);
    if (lp.pairs.empty())
        throw DataError("segment accuracy undefined for " + lang_pair +
                        ": no segment has two systems scored by both metric and gold");
    std::vector<std::size_t> correct(lp.segment_count, 0);
    for (const PairObs& obs : lp.pairs)
        if (pair_correct(obs, epsilon, mode)) ++correct[obs.segment_slot];
    return mean_segment_accuracy(correct, lp.pairs_per_segment);
}

SegmentAccuracy segment_acc_eq_star(const ScoreMatrix& metric, const ScoreMatrix& gold,
                                    const std::string& lang_pair, GoldTieMode mode) {
    LpPairs lp = collect_pairs(metric, gold, lang_pair);
    if (lp.pairs.empty())
        throw DataError("segment accuracy undefined for " + lang_pair +
                        ": no segment has two systems scored by both metric and gold");

    // Candidate thresholds: 0 plus the midpoints between consecutive distinct
    // observed |difference| values. acc_eq is piecewise constant in epsilon
    // with breakpoints exactly at the observed differences, so this search is
    // exhaustive over distinct accuracy values below the max diff. In Epsilon
    // mode gold differences are breakpoints too; capping candidates at the
    // largest midpoint keeps the degenerate everything-ties solution out.
    std::vector<double> diffs;
    diffs.reserve(lp.pairs.size());
    for (const PairObs& obs : lp.pairs) {
        diffs.push_back(std::abs(obs.metric_diff));
        if (mode == GoldTieMode::Epsilon) diffs.push_back(std::abs(obs.gold_diff));
    }
    std::sort(diffs.begin(), diffs.end());
    diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());

    std::vector<double> candidates;
    candidates.push_back(0.0);
    for (std::size_t i = 0; i + 1 < diffs.size(); ++i)
        candidates.push_back((diffs[i] + diffs[i + 1]) / 2.0);

    if (mode == GoldTieMode::Epsilon) {
        // Gold tie state changes along the sweep as well, so evaluate each
        // candidate from scratch instead of maintaining flip counters.
        SegmentAccuracy best;
        best.acc_eq_star = -1.0;
        best.pairs = lp.pairs.size();
        for (const double eps : candidates) {
            std::vector<std::size_t> correct(lp.segment_count, 0);
            for (const PairObs& obs : lp.pairs)
                if (pair_correct(obs, eps, mode)) ++correct[obs.segment_slot];
            const double acc = mean_segment_accuracy(correct, lp.pairs_per_segment);
            if (acc > best.acc_eq_star) {
                best.acc_eq_star = acc;
                best.epsilon_star = eps;
            }
        }
        return best;
    }

    // Sweep candidates in ascending order, flipping each pair from its sign
    // state to its tie state once epsilon passes the pair's |diff|. Per-
    // segment counters stay integral; the mean is recomputed fresh per
    // candidate so results match a from-scratch evaluation exactly.
    std::sort(lp.pairs.begin(), lp.pairs.end(),
              [](const PairObs& a, const PairObs& b) {
                  return std::abs(a.metric_diff) < std::abs(b.metric_diff);
              });
    std::vector<std::size_t> correct(lp.segment_count, 0);
    for (const PairObs& obs : lp.pairs) {
        // Start below the smallest candidate: nothing tied yet.
        if (sign_of(obs.metric_diff, 0.0) == obs.gold_sign && obs.gold_sign != 0)
            ++correct[obs.segment_slot];
    }

    SegmentAccuracy best;
    best.acc_eq_star = -1.0;
    best.pairs = lp.pairs.size();
    std::size_t next_pair = 0;
    for (const double eps : candidates) {
        while (next_pair < lp.pairs.size() &&
               std::abs(lp.pairs[next_pair].metric_diff) <= eps) {
            const PairObs& obs = lp.pairs[next_pair];
            const bool was_correct = sign_of(obs.metric_diff, 0.0) == obs.gold_sign &&
                                     obs.gold_sign != 0;
            const bool now_correct = obs.gold_sign == 0;
            if (was_correct && !now_correct) --correct[obs.segment_slot];
            if (!was_correct && now_correct) ++correct[obs.segment_slot];
            ++next_pair;
        }
        const double acc = mean_segment_accuracy(correct, lp.pairs_per_segment);
        if (acc > best.acc_eq_star) {
            best.acc_eq_star = acc;
            best.epsilon_star = eps;
        }
    }
    return best;
}

MetaEvalReport build_report(const ScoreMatrix& metric, const ScoreMatrix& gold,
                            GoldTieMode mode) {
    MetaEvalReport report;

    std::set<double> distinct_metric_values;
    std::size_t complete_cells = 0;
    for (const SegmentId& seg : gold.segments()) {
        for (const auto& sys : gold.systems()) {
            if (!gold.has(sys, seg.lang_pair, seg.seg_index)) continue;
            const auto m = metric.get(sys, seg.lang_pair, seg.seg_index);
            if (!m) {
                ++report.unscored_segments;
                continue;
            }
            ++complete_cells;
            distinct_metric_values.insert(*m);
        }
    }
    if (complete_cells == 0)
        throw DataError("metric and gold matrices share no scored cells");
    report.degenerate_metric = distinct_metric_values.size() == 1;

    report.system_level_accuracy = system_pairwise_accuracy(metric, gold, &report.system_pairs);

    for (const auto& lp : gold.lang_pairs()) {
        try {
            const SegmentAccuracy acc = segment_acc_eq_star(metric, gold, lp, mode);
            report.segment_pairs += acc.pairs;
            report.per_lp_segment_accuracy.emplace(lp, acc);
        } catch (const DataError&) {
            // No segment of this language pair has two comparable systems;
            // the language pair contributes to the system-level pool only.
        }
    }
    return report;
}

std::string format_report_table(const std::vector<std::pair<std::string, MetaEvalReport>>& rows) {
    std::set<std::string> lps;
    for (const auto& [name, report] : rows) {
        (void)name;
        for (const auto& [lp, acc] : report.per_lp_segment_accuracy) {
            (void)acc;
            lps.insert(lp);
        }
    }

    std::size_t name_width = std::string("metric").size();
    for (const auto& [name, report] : rows) {
        (void)report;
        name_width = std::max(name_width, name.size());
    }

    std::ostringstream out;
    out << std::left << std::setw(int(name_width + 2)) << "metric" << std::right
        << std::setw(12) << "system-acc";
    for (const auto& lp : lps) out << std::setw(12) << ("seg " + lp);
    out << '\n';

    out << std::fixed << std::setprecision(4);
    for (const auto& [name, report] : rows) {
        out << std::left << std::setw(int(name_width + 2)) << name << std::right
            << std::setw(12) << report.system_level_accuracy;
        for (const auto& lp : lps) {
            const auto it = report.per_lp_segment_accuracy.find(lp);
            if (it == report.per_lp_segment_accuracy.end())
                out << std::setw(12) << "-";
            else
                out << std::setw(12) << it->second.acc_eq_star;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace eaeval::metaeval
