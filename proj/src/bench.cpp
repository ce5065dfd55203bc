#include "pharmaharvest/bench.hpp"

#include "pharmaharvest/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace pharmaharvest::bench {
namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string_view short_name(SourceId id) {
    switch (id) {
        case SourceId::Daen: return "DAEN";
        case SourceId::Dma: return "DMA";
        case SourceId::Lareb: return "Lareb";
        case SourceId::Medsafe: return "Medsafe";
        case SourceId::Faers: return "FAERS";
        case SourceId::Vaers: return "VAERS";
        case SourceId::VigiAccess: return "VigiAccess";
    }
    return "?";
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
    if (p < 0 || p > 1) throw InvalidArgument("quantile probability outside [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted[lo];
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

TimingSummary summarize(SourceId source, std::span<const double> seconds) {
    if (seconds.empty()) throw InvalidArgument("timing summary needs at least one sample");
    TimingSummary s;
    s.source = source;
    s.n = seconds.size();
    s.samples_s.assign(seconds.begin(), seconds.end());

    // Welford
    double mean = 0, m2 = 0;
    std::size_t k = 0;
    for (const double x : seconds) {
        ++k;
        const double delta = x - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (x - mean);
    }
    s.mean_s = mean;
    s.sd_s = s.n > 1 ? std::sqrt(std::max(0.0, m2 / static_cast<double>(s.n - 1))) : 0.0;

    std::vector<double> sorted(seconds.begin(), seconds.end());
    std::sort(sorted.begin(), sorted.end());
    s.q1_s = quantile_sorted(sorted, 0.25);
    s.median_s = quantile_sorted(sorted, 0.5);
    s.q3_s = quantile_sorted(sorted, 0.75);
    return s;
}

TimingSummary time_retrieval(SourceId source, int repetitions, Clock& clock,
                             const std::function<void(int rep)>& retrieve) {
    if (repetitions < 1) throw InvalidArgument("repetitions must be at least 1");
    std::vector<double> seconds;
    seconds.reserve(static_cast<std::size_t>(repetitions));
    for (int rep = 0; rep < repetitions; ++rep) {
        const auto start = clock.now();
        try {
            retrieve(rep);
        } catch (const Error& e) {
            std::optional<TimingSummary> partial;
            if (!seconds.empty()) partial = summarize(source, seconds);
            throw PartialBenchmark("repetition " + std::to_string(rep + 1) + " of " + std::to_string(repetitions) +
                                       " failed: " + e.what(),
                                   e.code(), std::move(partial));
        }
        seconds.push_back(std::chrono::duration<double>(clock.now() - start).count());
    }
    return summarize(source, seconds);
}

std::string format_table(std::span<const TimingSummary> rows) {
    std::string out = "Database | Mean (SD) | Median [Q1, Q3]\n";
    for (const auto& r : rows) {
        out += std::string(short_name(r.source)) + " | " + fixed(r.mean_s, 2) + " (" + fixed(r.sd_s, 2) +
               ") | " + fixed(r.median_s, 2) + " [" + fixed(r.q1_s, 2) + ", " + fixed(r.q3_s, 2) + "]\n";
    }
    return out;
}

std::string format_csv(std::span<const TimingSummary> rows) {
    const std::vector<std::string> header{"database", "mean_s", "sd_s", "median_s", "q1_s", "q3_s", "n"};
    std::string out = csv::format_row(header);
    for (const auto& r : rows) {
        const std::vector<std::string> row{std::string(to_string(r.source)), full(r.mean_s),   full(r.sd_s),
                                           full(r.median_s),                 full(r.q1_s),     full(r.q3_s),
                                           std::to_string(r.n)};
        out += csv::format_row(row);
    }
    return out;
}

}  // namespace pharmaharvest::bench
