#include "peg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace peg {

MetricReport compute_metrics(const std::vector<PredictionPair>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("compute_metrics: no pairs");
    MetricReport r;
    r.n = static_cast<int>(pairs.size());
    std::vector<double> rse;
    rse.reserve(pairs.size());
    int wrong = 0;
    for (const auto& p : pairs) {
        if (p.truth <= 0.0)
            throw std::invalid_argument("compute_metrics: true size must be positive");
        const double rel = (p.predicted - p.truth) / p.truth;
        rse.push_back(rel * rel);
        r.mrse += rel * rel;
        r.mape += std::fabs(rel);
        if (std::fabs(rel) > 0.5) ++wrong;
    }
    r.mrse /= r.n;
    r.mape /= r.n;
    r.wp_percent = 100.0 * wrong / r.n;
    std::sort(rse.begin(), rse.end());
    const size_t mid = rse.size() / 2;
    r.mrse_median = rse.size() % 2 ? rse[mid] : 0.5 * (rse[mid - 1] + rse[mid]);
    return r;
}

double mrse(const std::vector<double>& predictions, const std::vector<double>& truths) {
    if (predictions.size() != truths.size() || predictions.empty())
        throw std::invalid_argument("mrse: length mismatch or empty input");
    double acc = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        if (truths[i] <= 0.0) throw std::invalid_argument("mrse: true size must be positive");
        const double rel = (predictions[i] - truths[i]) / truths[i];
        acc += rel * rel;
    }
    return acc / predictions.size();
}

std::string MetricReport::to_json() const {
    std::ostringstream os;
    os.precision(12);
    os << "{\"mrse\": " << mrse << ", \"mrse_median\": " << mrse_median
       << ", \"mape\": " << mape << ", \"wp_percent\": " << wp_percent << ", \"n\": " << n
       << "}";
    return os.str();
}

std::string MetricReport::to_text() const {
    std::ostringstream os;
    os.precision(6);
    os << "MRSE        " << mrse << "\n"
       << "mRSE        " << mrse_median << "\n"
       << "MAPE        " << mape << "\n"
       << "WP (%)      " << wp_percent << "\n"
       << "n           " << n << "\n";
    return os.str();
}

}  // namespace peg
