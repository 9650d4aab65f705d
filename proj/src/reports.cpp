#include "eaeval/reports.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "eaeval/errors.hpp"

namespace eaeval::reports {

ErrorDistribution error_distribution(
    const std::map<corpus::SegmentKey, parsing::ErrorCounts>& counts,
    std::string source_label) {
    ErrorDistribution dist;
    dist.source_label = std::move(source_label);
    for (const auto& [key, c] : counts) {
        (void)key;
        ++dist.histogram_major[c.n_major];
        ++dist.histogram_minor[c.n_minor];
    }
    return dist;
}

namespace {

double tv_distance(const std::map<int, std::size_t>& a, const std::map<int, std::size_t>& b) {
    std::size_t total_a = 0;
    std::size_t total_b = 0;
    for (const auto& [k, v] : a) {
        (void)k;
        total_a += v;
    }
    for (const auto& [k, v] : b) {
        (void)k;
        total_b += v;
    }
    if (total_a == 0 && total_b == 0) return 0.0;
    if (total_a == 0 || total_b == 0) return 1.0;

    std::set<int> support;
    for (const auto& [k, v] : a) {
        (void)v;
        support.insert(k);
    }
    for (const auto& [k, v] : b) {
        (void)v;
        support.insert(k);
    }
    double sum = 0.0;
    for (const int k : support) {
        const auto ia = a.find(k);
        const auto ib = b.find(k);
        const double pa = ia == a.end() ? 0.0 : double(ia->second) / double(total_a);
        const double pb = ib == b.end() ? 0.0 : double(ib->second) / double(total_b);
        sum += std::abs(pa - pb);
    }
    return sum / 2.0;
}

}  // namespace

DistributionDistance distribution_distance(const ErrorDistribution& a,
                                           const ErrorDistribution& b) {
    DistributionDistance d;
    d.major = tv_distance(a.histogram_major, b.histogram_major);
    d.minor = tv_distance(a.histogram_minor, b.histogram_minor);
    d.mean = (d.major + d.minor) / 2.0;
    return d;
}

AgreementReport compare_count_paths(
    const std::map<corpus::SegmentKey, std::string>& identify_responses,
    const std::map<corpus::SegmentKey, std::string>& count_responses) {
    std::vector<std::string> only_identify;
    std::vector<std::string> only_count;
    for (const auto& [key, text] : identify_responses) {
        (void)text;
        if (!count_responses.count(key)) only_identify.push_back(key.to_string());
    }
    for (const auto& [key, text] : count_responses) {
        (void)text;
        if (!identify_responses.count(key)) only_count.push_back(key.to_string());
    }
    if (!only_identify.empty() || !only_count.empty()) {
        std::string msg = "count-path comparison requires matching segment sets;";
        const auto cite = [&msg](const char* label, const std::vector<std::string>& keys) {
            if (keys.empty()) return;
            msg += std::string(" ") + label + ":";
            for (std::size_t i = 0; i < keys.size() && i < 3; ++i) msg += " " + keys[i];
            if (keys.size() > 3) msg += " (+" + std::to_string(keys.size() - 3) + " more)";
        };
        cite("only identify side", only_identify);
        cite("only count side", only_count);
        throw DataError(msg);
    }

    AgreementReport report;
    for (const auto& [key, identify_text] : identify_responses) {
        ++report.total;
        const parsing::ErrorCounts regex_counts = parsing::count_errors_regex(identify_text);
        const auto query_counts = parsing::parse_count_reply(count_responses.at(key));
        if (query_counts && *query_counts == regex_counts) {
            ++report.matching;
        } else {
            report.disagreements.push_back({key, regex_counts, query_counts});
        }
    }
    return report;
}

std::string distribution_csv(const std::vector<ErrorDistribution>& distributions,
                             const std::optional<std::string>& manifest_digest) {
    std::ostringstream out;
    if (manifest_digest) out << "# manifest_digest=" << *manifest_digest << '\n';
    out << "count,frequency,severity,source_label\n";
    for (const auto& dist : distributions) {
        for (const auto& [count, freq] : dist.histogram_major)
            out << count << ',' << freq << ",major," << dist.source_label << '\n';
        for (const auto& [count, freq] : dist.histogram_minor)
            out << count << ',' << freq << ",minor," << dist.source_label << '\n';
    }
    return out.str();
}

std::string agreement_report_text(const AgreementReport& report) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    out << "count-path agreement: " << report.matching << "/" << report.total << " = "
        << report.agreement_rate();
    if (report.total == 0) out << " (no segments compared)";
    out << '\n';
    for (const auto& d : report.disagreements) {
        out << "  " << d.segment_key.to_string() << ": regex (" << d.from_regex.n_major
            << "," << d.from_regex.n_minor << ") vs query ";
        if (d.from_query)
            out << "(" << d.from_query->n_major << "," << d.from_query->n_minor << ")";
        else
            out << "(unparseable reply)";
        out << '\n';
    }
    return out.str();
}

}  // namespace eaeval::reports
