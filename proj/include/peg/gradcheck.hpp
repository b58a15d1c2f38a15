#pragma once

#include <functional>
#include <string>
#include <vector>

#include "peg/tensor.hpp"

namespace peg::ad {

struct GradCheckReport {
    bool pass = false;
    double max_rel_err = 0.0;
    std::string worst_leaf;
    int worst_coord = -1;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Compares the analytic gradient of a scalar-valued function against a
// central finite difference over every coordinate of every leaf.
// `forward` must rebuild the graph from the current leaf values and be
// deterministic (freeze any noise before calling).
// Relative error uses max(1, |analytic|, |numeric|) as denominator.
GradCheckReport finite_difference_check(
    const std::function<TensorPtr(Tape&)>& forward,
    const std::vector<std::pair<std::string, TensorPtr>>& leaves, double h = 1e-6,
    double tol = 1e-4);

}  // namespace peg::ad
