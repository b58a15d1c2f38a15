#include "peg/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace peg {

using namespace ad;

GnnLayerParams GnnLayerParams::create(const std::string& prefix, int d_gnn, int topics,
                                      ParamStore& params, std::mt19937_64& rng) {
    auto glorot = [&](std::vector<int> shape) {
        const double stddev = std::sqrt(2.0 / (shape.front() + shape.back()));
        return randn_tensor(std::move(shape), rng, stddev);
    };
    GnnLayerParams layer;
    layer.w = params.add(prefix + ".w", glorot({d_gnn, d_gnn}));
    layer.w_inf = params.add(prefix + ".w_inf", glorot({d_gnn, d_gnn + topics}));
    layer.w_s = params.add(prefix + ".w_s", randn_tensor({2 * d_gnn}, rng, 0.1));
    layer.attn = params.add(prefix + ".attn", randn_tensor({2 * d_gnn}, rng, 0.1));
    layer.xi_raw = params.add(prefix + ".xi", zeros({1}));
    layer.eta_raw = params.add(prefix + ".eta", zeros({1}));
    return layer;
}

TensorPtr gat_attention(Tape& tape, const GnnLayerParams& layer, const TensorPtr& we_v,
                        const std::vector<TensorPtr>& we_neighbors) {
    if (we_neighbors.empty()) throw std::invalid_argument("gat_attention: empty neighborhood");
    std::vector<TensorPtr> scores;
    scores.reserve(we_neighbors.size());
    for (const auto& we_u : we_neighbors) {
        auto score = dot(tape, layer.attn, concat(tape, {we_v, we_u}));
        scores.push_back(leaky_relu(tape, score, 0.2));
    }
    return softmax(tape, concat(tape, scores));
}

TensorPtr neighbor_influence(Tape& tape, const GnnLayerParams& layer, const TensorPtr& we_v,
                             const std::vector<TensorPtr>& we_neighbors,
                             const std::vector<TensorPtr>& s_neighbors, const TensorPtr& theta,
                             int d_gnn) {
    if (we_neighbors.size() != s_neighbors.size())
        throw std::invalid_argument("neighbor_influence: neighbor lists disagree");
    const int topics = theta->size();
    if (we_neighbors.empty())
        return zeros({d_gnn + topics});

    auto weights = gat_attention(tape, layer, we_v, we_neighbors);
    TensorPtr agg;
    double s_total = 0.0;
    for (size_t i = 0; i < we_neighbors.size(); ++i) {
        s_total += s_neighbors[i]->value[0];
        auto coeff = mul(tape, s_neighbors[i], slice(tape, weights, static_cast<int>(i), 1));
        auto term = mul(tape, we_neighbors[i], coeff);
        agg = i == 0 ? term : add(tape, agg, term);
    }
    // Gamma frozen at its forward value: constant 0/1 factor on theta
    const double gamma = s_total > 0.0 ? 1.0 : 0.0;
    return concat(tape, {agg, scale(tape, theta, gamma)});
}

TensorPtr update_embedding(Tape& tape, const GnnLayerParams& layer, const TensorPtr& we_v,
                           const TensorPtr& influence) {
    auto xi = sigmoid(tape, layer.xi_raw);
    auto own = mul(tape, we_v, xi);
    auto inf = mul(tape, matvec(tape, layer.w_inf, influence),
                   add_const(tape, neg(tape, xi), 1.0));
    return sigmoid(tape, add(tape, own, inf));
}

TensorPtr update_activation(Tape& tape, const GnnLayerParams& layer, const TensorPtr& we_v,
                            const TensorPtr& s_v, const std::vector<TensorPtr>& we_neighbors,
                            const std::vector<TensorPtr>& s_neighbors) {
    auto eta = sigmoid(tape, layer.eta_raw);
    auto keep = mul(tape, s_v, add_const(tape, neg(tape, eta), 1.0));
    TensorPtr agg = zeros({1});
    for (size_t i = 0; i < we_neighbors.size(); ++i) {
        auto score = dot(tape, layer.w_s, concat(tape, {we_neighbors[i], we_v}));
        auto term = mul(tape, score, s_neighbors[i]);
        agg = i == 0 ? term : add(tape, agg, term);
    }
    return sigmoid(tape, add(tape, keep, mul(tape, eta, agg)));
}

NodeState init_states(const std::vector<TensorPtr>& embeddings,
                      const std::vector<bool>& is_seed) {
    if (embeddings.size() != is_seed.size())
        throw std::invalid_argument("init_states: embeddings and seed flags disagree");
    NodeState state;
    state.e = embeddings;
    state.s.reserve(is_seed.size());
    for (bool seed : is_seed) state.s.push_back(scalar(seed ? 1.0 : 0.0));
    return state;
}

NodeState propagate(Tape& tape, const LocalGraph& graph, const NodeState& initial,
                    const std::vector<bool>& is_seed, const std::vector<GnnLayerParams>& layers,
                    const TensorPtr& theta, int d_gnn) {
    if (layers.empty()) throw std::invalid_argument("propagate: need at least one layer");
    const int n = graph.size();
    if (static_cast<int>(initial.e.size()) != n || static_cast<int>(is_seed.size()) != n)
        throw std::invalid_argument("propagate: state size does not match graph");

    NodeState state = initial;
    for (const auto& layer : layers) {
        // shared transform, computed once per node per layer
        std::vector<TensorPtr> we(static_cast<size_t>(n));
        for (int v = 0; v < n; ++v)
            we[static_cast<size_t>(v)] = matvec(tape, layer.w, state.e[static_cast<size_t>(v)]);

        NodeState next;
        next.e.resize(static_cast<size_t>(n));
        next.s.resize(static_cast<size_t>(n));
        for (int v = 0; v < n; ++v) {
            const auto& nbrs = graph.in_neighbors[static_cast<size_t>(v)];
            std::vector<TensorPtr> we_nbrs, s_nbrs;
            we_nbrs.reserve(nbrs.size());
            s_nbrs.reserve(nbrs.size());
            double s_total = 0.0;
            for (int u : nbrs) {
                we_nbrs.push_back(we[static_cast<size_t>(u)]);
                s_nbrs.push_back(state.s[static_cast<size_t>(u)]);
                s_total += state.s[static_cast<size_t>(u)]->value[0];
            }

            auto influence =
                neighbor_influence(tape, layer, we[static_cast<size_t>(v)], we_nbrs, s_nbrs,
                                   theta, d_gnn);
            next.e[static_cast<size_t>(v)] =
                update_embedding(tape, layer, we[static_cast<size_t>(v)], influence);

            if (is_seed[static_cast<size_t>(v)]) {
                next.s[static_cast<size_t>(v)] = scalar(1.0);
            } else if (s_total == 0.0 && state.s[static_cast<size_t>(v)]->value[0] == 0.0) {
                // untouched inactive node: skip the update so sigmoid(0) does
                // not spuriously lift it to 0.5
                next.s[static_cast<size_t>(v)] = state.s[static_cast<size_t>(v)];
            } else {
                next.s[static_cast<size_t>(v)] =
                    update_activation(tape, layer, we[static_cast<size_t>(v)],
                                      state.s[static_cast<size_t>(v)], we_nbrs, s_nbrs);
            }
        }
        state = std::move(next);
    }
    return state;
}

TensorPtr predict_size(Tape& tape, const NodeState& state) {
    return sum(tape, concat(tape, state.s));
}

LocalGraph full_local_graph(const SocialGraph& graph) {
    LocalGraph g;
    g.in_neighbors.resize(static_cast<size_t>(graph.num_users()));
    for (int v = 0; v < graph.num_users(); ++v)
        g.in_neighbors[static_cast<size_t>(v)] = graph.influencers(v);
    return g;
}

std::vector<bool> seed_flags(const SocialGraph& graph, const std::vector<std::string>& seeds) {
    std::vector<bool> flags(static_cast<size_t>(graph.num_users()), false);
    for (const auto& name : seeds) {
        const int idx = graph.index_of(name);
        if (idx < 0) throw std::runtime_error("seed user not in graph: " + name);
        flags[static_cast<size_t>(idx)] = true;
    }
    return flags;
}

Subgraph sample_local_subgraph(const SocialGraph& graph, const std::vector<int>& seed_ids,
                               int hops, int neighbor_cap, std::mt19937_64& rng) {
    if (seed_ids.empty()) throw std::invalid_argument("sample_local_subgraph: no seeds");
    std::vector<int> included;
    std::vector<char> in_set(static_cast<size_t>(graph.num_users()), 0);
    for (int s : seed_ids) {
        if (!in_set[static_cast<size_t>(s)]) {
            in_set[static_cast<size_t>(s)] = 1;
            included.push_back(s);
        }
    }
    std::vector<int> frontier = included;
    for (int hop = 0; hop < hops; ++hop) {
        std::vector<int> next_frontier;
        for (int v : frontier) {
            // expand to the users v can influence: only they can become active
            std::vector<int> nbrs = graph.followers(v);
            if (static_cast<int>(nbrs.size()) > neighbor_cap) {
                std::shuffle(nbrs.begin(), nbrs.end(), rng);
                nbrs.resize(static_cast<size_t>(neighbor_cap));
                std::sort(nbrs.begin(), nbrs.end());
            }
            for (int u : nbrs) {
                if (!in_set[static_cast<size_t>(u)]) {
                    in_set[static_cast<size_t>(u)] = 1;
                    included.push_back(u);
                    next_frontier.push_back(u);
                }
            }
        }
        frontier = std::move(next_frontier);
    }

    Subgraph sub;
    sub.global_ids = included;
    std::vector<int> local_of(static_cast<size_t>(graph.num_users()), -1);
    for (size_t i = 0; i < included.size(); ++i)
        local_of[static_cast<size_t>(included[i])] = static_cast<int>(i);
    sub.local.in_neighbors.resize(included.size());
    for (size_t i = 0; i < included.size(); ++i) {
        for (int u : graph.influencers(included[i])) {
            const int lu = local_of[static_cast<size_t>(u)];
            if (lu >= 0) sub.local.in_neighbors[i].push_back(lu);
        }
    }
    sub.is_seed.assign(included.size(), false);
    for (int s : seed_ids) sub.is_seed[static_cast<size_t>(local_of[static_cast<size_t>(s)])] = true;
    return sub;
}

}  // namespace peg
