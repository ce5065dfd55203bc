#pragma once

#include "pharmaharvest/clock.hpp"
#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/types.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pharmaharvest::bench {

struct TimingSummary {
    SourceId source = SourceId::Dma;
    std::size_t n = 0;
    double mean_s = 0;
    double sd_s = 0;  ///< sample SD (n - 1); 0 when n == 1
    double median_s = 0;
    double q1_s = 0;
    double q3_s = 0;
    std::vector<double> samples_s;
};

/// Quantile of sorted data by linear interpolation between closest ranks:
/// h = (n - 1) p, x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
double quantile_sorted(std::span<const double> sorted, double p);

/// Throws InvalidArgument on an empty sample.
TimingSummary summarize(SourceId source, std::span<const double> seconds);

/// Raised when a repetition fails; carries whatever finished before it.
class PartialBenchmark : public Error {
public:
    PartialBenchmark(const std::string& message, std::string cause_code, std::optional<TimingSummary> partial)
        : Error("partial_benchmark", message), cause_code_(std::move(cause_code)), partial_(std::move(partial)) {}
    const std::string& cause_code() const noexcept { return cause_code_; }
    const std::optional<TimingSummary>& partial() const noexcept { return partial_; }

private:
    std::string cause_code_;
    std::optional<TimingSummary> partial_;
};

/// Runs `retrieve(rep)` for rep = 0..repetitions-1, timing each on `clock`.
TimingSummary time_retrieval(SourceId source, int repetitions, Clock& clock,
                             const std::function<void(int rep)>& retrieve);

/// "Database | Mean (SD) | Median [Q1, Q3]" with one row per summary,
/// seconds to two decimals.
std::string format_table(std::span<const TimingSummary> rows);
/// database,mean_s,sd_s,median_s,q1_s,q3_s,n
std::string format_csv(std::span<const TimingSummary> rows);

}  // namespace pharmaharvest::bench
