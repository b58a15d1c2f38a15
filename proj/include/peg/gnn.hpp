#pragma once

#include <random>
#include <string>
#include <vector>

#include "peg/graph.hpp"
#include "peg/ops.hpp"
#include "peg/params.hpp"

namespace peg {

// In-influence adjacency over a contiguous local node index range.
struct LocalGraph {
    std::vector<std::vector<int>> in_neighbors;  // N(v): who influences v
    int size() const { return static_cast<int>(in_neighbors.size()); }
};

struct GnnLayerParams {
    ad::TensorPtr w;        // [d, d]
    ad::TensorPtr w_inf;    // [d, d+K]
    ad::TensorPtr w_s;      // [2d]
    ad::TensorPtr attn;     // [2d]
    ad::TensorPtr xi_raw;   // scalar, gate = sigmoid(xi_raw)
    ad::TensorPtr eta_raw;  // scalar, gate = sigmoid(eta_raw)

    static GnnLayerParams create(const std::string& prefix, int d_gnn, int topics,
                                 ad::ParamStore& params, std::mt19937_64& init_rng);
};

struct NodeState {
    std::vector<ad::TensorPtr> e;  // per node [d]
    std::vector<ad::TensorPtr> s;  // per node [1], in [0,1]
};

// Attention weights over the neighbor list: softmax of
// LeakyReLU(a^T [W e_v || W e_u]) with negative slope 0.2. The caller passes
// the already transformed vectors W e.
ad::TensorPtr gat_attention(ad::Tape& tape, const GnnLayerParams& layer,
                            const ad::TensorPtr& we_v,
                            const std::vector<ad::TensorPtr>& we_neighbors);

// I_v = [ sum_u s_u alpha_u W e_u  ||  Gamma(sum_u s_u) theta ]. Gamma is a
// hard step evaluated on the forward value, no gradient through it.
ad::TensorPtr neighbor_influence(ad::Tape& tape, const GnnLayerParams& layer,
                                 const ad::TensorPtr& we_v,
                                 const std::vector<ad::TensorPtr>& we_neighbors,
                                 const std::vector<ad::TensorPtr>& s_neighbors,
                                 const ad::TensorPtr& theta, int d_gnn);

// e^{l+1} = sigmoid(xi * W e^l + (1-xi) * W_I I)
ad::TensorPtr update_embedding(ad::Tape& tape, const GnnLayerParams& layer,
                               const ad::TensorPtr& we_v, const ad::TensorPtr& influence);

// s^{l+1} = sigmoid((1-eta) s^l + eta * sum_u w_s^T [W e_u || W e_v] s_u),
// without the isolated-node correction or seed clamp (propagate applies both).
ad::TensorPtr update_activation(ad::Tape& tape, const GnnLayerParams& layer,
                                const ad::TensorPtr& we_v, const ad::TensorPtr& s_v,
                                const std::vector<ad::TensorPtr>& we_neighbors,
                                const std::vector<ad::TensorPtr>& s_neighbors);

// e = initial embeddings, s = 1 for seeds else 0.
NodeState init_states(const std::vector<ad::TensorPtr>& embeddings,
                      const std::vector<bool>& is_seed);

// L simultaneous layers; reads layer l, writes layer l+1. Seeds are re-clamped
// to 1 after every layer; inactive nodes with an inactive neighborhood keep
// s = 0 instead of drifting to sigmoid(0).
NodeState propagate(ad::Tape& tape, const LocalGraph& graph, const NodeState& initial,
                    const std::vector<bool>& is_seed,
                    const std::vector<GnnLayerParams>& layers, const ad::TensorPtr& theta,
                    int d_gnn);

// S~ = sum over nodes of s^{(L)}
ad::TensorPtr predict_size(ad::Tape& tape, const NodeState& state);

// Full-graph adjacency as a LocalGraph (identity node mapping).
LocalGraph full_local_graph(const SocialGraph& graph);

// Seed names -> flags; throws naming the user when a seed is not in the graph.
std::vector<bool> seed_flags(const SocialGraph& graph, const std::vector<std::string>& seeds);

// Nodes reachable within `hops` hops of influence from the seed set — the
// followers' cone, since only those users can become active in `hops` layers —
// sampling at most `neighbor_cap` followers per node per hop uniformly
// without replacement. Edges are induced from the full graph.
struct Subgraph {
    std::vector<int> global_ids;  // local -> global
    LocalGraph local;
    std::vector<bool> is_seed;
};
Subgraph sample_local_subgraph(const SocialGraph& graph, const std::vector<int>& seed_ids,
                               int hops, int neighbor_cap, std::mt19937_64& rng);

}  // namespace peg
