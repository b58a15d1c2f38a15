#pragma once

#include <string>
#include <vector>

#include "peg/config.hpp"
#include "peg/graph.hpp"

namespace peg {

struct SynthOutput {
    SocialGraph graph;
    std::vector<RepostHistory> histories;
    std::vector<CascadeInstance> cascades;

    // diffusion bookkeeping, used by tests
    long exposures = 0;
    long adoptions = 0;
    int degenerate_cascades = 0;

    // content topic and seed-neighborhood majority topic per cascade
    std::vector<int> content_topic;
    std::vector<int> seed_majority_topic;
};

// Preferential-attachment follower graph, planted user topic mixtures with a
// short-term drift in the history tail, and independent-cascade diffusion
// where followers adopt with probability p0 * (1 + gamma * affinity).
SynthOutput generate(const SynthConfig& config);

// Writes network.tsv, histories.jsonl, cascades.jsonl into dir.
void write_dataset(const SynthOutput& data, const std::string& dir);

struct Dataset {
    SocialGraph graph;
    std::vector<RepostHistory> histories;
    std::vector<CascadeInstance> cascades;
};

// Loads the three files from dir; histories.jsonl is optional (empty result
// when absent, matching datasets without retweet history).
Dataset load_dataset(const std::string& dir);

}  // namespace peg
