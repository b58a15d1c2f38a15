#include "peg/gradcheck.hpp"

#include <cmath>

namespace peg::ad {

GradCheckReport finite_difference_check(
    const std::function<TensorPtr(Tape&)>& forward,
    const std::vector<std::pair<std::string, TensorPtr>>& leaves, double h, double tol) {
    for (const auto& [name, leaf] : leaves) {
        if (!leaf->requires_grad)
            throw std::invalid_argument("gradcheck leaf without requires_grad: " + name);
        leaf->zero_grad();
    }

    Tape tape;
    auto loss = forward(tape);
    tape.backward(loss);

    GradCheckReport report;
    report.pass = true;
    for (const auto& [name, leaf] : leaves) {
        for (int i = 0; i < leaf->size(); ++i) {
            const double orig = leaf->value[i];
            Tape t_plus;
            leaf->value[i] = orig + h;
            const double f_plus = forward(t_plus)->value[0];
            Tape t_minus;
            leaf->value[i] = orig - h;
            const double f_minus = forward(t_minus)->value[0];
            leaf->value[i] = orig;

            const double numeric = (f_plus - f_minus) / (2.0 * h);
            const double analytic = leaf->grad[i];
            const double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
            const double rel = std::fabs(analytic - numeric) / denom;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_leaf = name;
                report.worst_coord = i;
                report.analytic = analytic;
                report.numeric = numeric;
            }
        }
    }
    report.pass = report.max_rel_err <= tol;
    return report;
}

}  // namespace peg::ad
