#pragma once

#include <string>
#include <vector>

#include "peg/gradcheck.hpp"

namespace peg {

struct NamedCheck {
    std::string name;
    ad::GradCheckReport report;
};

// Finite-difference checks over every registered primitive op at random
// points, plus the composite fixtures: the topic loss on a 5-doc/K=3 batch,
// each preference encoder on a length-7 history, and end-to-end MRSE through
// a 6-node/2-layer propagate.
std::vector<NamedCheck> run_primitive_gradchecks(std::uint64_t seed = 1);
std::vector<NamedCheck> run_composite_gradchecks(std::uint64_t seed = 1);

}  // namespace peg
