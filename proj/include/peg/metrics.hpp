#pragma once

#include <string>
#include <vector>

namespace peg {

struct MetricReport {
    double mrse = 0.0;
    double mrse_median = 0.0;
    double mape = 0.0;
    double wp_percent = 0.0;  // share of predictions with |err|/S strictly > 0.5
    int n = 0;

    std::string to_json() const;
    std::string to_text() const;
};

struct PredictionPair {
    double predicted = 0.0;
    double truth = 0.0;
};

// MRSE per the relative-square-error definition; median of an even count is
// the mean of the middle two; a relative error of exactly 0.5 counts as
// correct for WP. Rejects empty input and nonpositive truths.
MetricReport compute_metrics(const std::vector<PredictionPair>& pairs);

double mrse(const std::vector<double>& predictions, const std::vector<double>& truths);

}  // namespace peg
