#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "peg/gradcheck.hpp"
#include "peg/gnn.hpp"

using namespace peg;
using namespace peg::ad;

namespace {

double sigmoid_d(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<GnnLayerParams> make_layers(int n, int d, int topics, ParamStore& params,
                                        std::uint64_t seed = 9) {
    std::mt19937_64 rng(seed);
    std::vector<GnnLayerParams> layers;
    for (int l = 0; l < n; ++l)
        layers.push_back(
            GnnLayerParams::create("gnn.l" + std::to_string(l), d, topics, params, rng));
    return layers;
}

std::vector<TensorPtr> random_embeddings(int n, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> norm(0.0, 0.5);
    std::vector<TensorPtr> e;
    for (int i = 0; i < n; ++i) {
        std::vector<double> v(static_cast<size_t>(d));
        for (auto& x : v) x = norm(rng);
        e.push_back(make_tensor({d}, std::move(v)));
    }
    return e;
}

// ring graph: node v is influenced by (v+1) mod n
LocalGraph ring(int n) {
    LocalGraph g;
    g.in_neighbors.resize(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) g.in_neighbors[static_cast<size_t>(v)] = {(v + 1) % n};
    return g;
}

}  // namespace

TEST_CASE("init_states: seeds get activation 1, others 0") {
    auto e = random_embeddings(4, 3, 1);
    auto st = init_states(e, {true, false, false, true});
    REQUIRE(st.s.size() == 4);
    CHECK(st.s[0]->value[0] == 1.0);
    CHECK(st.s[1]->value[0] == 0.0);
    CHECK(st.s[2]->value[0] == 0.0);
    CHECK(st.s[3]->value[0] == 1.0);
    CHECK_THROWS(init_states(e, {true, false}));
}

TEST_CASE("gat_attention: singleton gets 1, identical neighbors uniform") {
    const int d = 4;
    ParamStore params;
    auto layers = make_layers(1, d, 2, params);
    auto we = random_embeddings(3, d, 2);
    Tape tape;
    auto single = gat_attention(tape, layers[0], we[0], {we[1]});
    CHECK(single->value[0] == doctest::Approx(1.0).epsilon(1e-15));

    auto same = gat_attention(tape, layers[0], we[0], {we[1], we[1], we[1]});
    for (int i = 0; i < 3; ++i) CHECK(same->value[i] == doctest::Approx(1.0 / 3).epsilon(1e-14));

    CHECK_THROWS(gat_attention(tape, layers[0], we[0], {}));
}

TEST_CASE("gat_attention matches the leaky-relu softmax formula") {
    const int d = 3;
    ParamStore params;
    auto layers = make_layers(1, d, 2, params, 33);
    auto we = random_embeddings(4, d, 5);
    Tape tape;
    std::vector<TensorPtr> nbrs = {we[1], we[2], we[3]};
    auto attn = gat_attention(tape, layers[0], we[0], nbrs);

    auto score = [&](const TensorPtr& u) {
        double s = 0;
        for (int i = 0; i < d; ++i) s += layers[0].attn->value[i] * we[0]->value[i];
        for (int i = 0; i < d; ++i) s += layers[0].attn->value[d + i] * u->value[i];
        return s > 0 ? s : 0.2 * s;
    };
    double z = 0;
    std::vector<double> exps;
    for (const auto& u : nbrs) exps.push_back(std::exp(score(u)));
    for (double x : exps) z += x;
    for (size_t i = 0; i < nbrs.size(); ++i)
        CHECK(attn->value[static_cast<int>(i)] == doctest::Approx(exps[i] / z).epsilon(1e-12));
}

TEST_CASE("neighbor_influence: gamma switches the topic block on and off") {
    const int d = 3, k = 2;
    ParamStore params;
    auto layers = make_layers(1, d, k, params, 7);
    auto we = random_embeddings(3, d, 8);
    auto theta = make_tensor({k}, {0.3, 0.9});
    Tape tape;
    // all neighbors inactive: aggregated block may be zero and gamma = 0
    auto inactive = neighbor_influence(tape, layers[0], we[0], {we[1], we[2]},
                                       {scalar(0.0), scalar(0.0)}, theta, d);
    REQUIRE(inactive->size() == d + k);
    for (int i = 0; i < d + k; ++i) CHECK(inactive->value[i] == 0.0);

    // one active neighbor: gamma = 1, topic block equals theta
    auto active = neighbor_influence(tape, layers[0], we[0], {we[1], we[2]},
                                     {scalar(1.0), scalar(0.0)}, theta, d);
    CHECK(active->value[d] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(active->value[d + 1] == doctest::Approx(0.9).epsilon(1e-15));

    // empty neighborhood: zero vector of width d + K
    auto none = neighbor_influence(tape, layers[0], we[0], {}, {}, theta, d);
    REQUIRE(none->size() == d + k);
    for (int i = 0; i < d + k; ++i) CHECK(none->value[i] == 0.0);

    // single active neighbor with weight 1: embedding block is exactly we_u
    auto solo = neighbor_influence(tape, layers[0], we[0], {we[1]}, {scalar(1.0)}, theta, d);
    for (int i = 0; i < d; ++i)
        CHECK(solo->value[i] == doctest::Approx(we[1]->value[i]).epsilon(1e-14));
}

TEST_CASE("update_embedding at xi_raw = 0 mixes both halves equally") {
    const int d = 2, k = 2;
    ParamStore params;
    auto layers = make_layers(1, d, k, params, 10);
    // xi_raw initializes to 0, so xi = 0.5
    Tape tape;
    auto we = make_tensor({d}, {0.2, -0.4});
    auto inf = make_tensor({d + k}, {0.1, 0.0, 0.5, 0.5});
    auto out = update_embedding(tape, layers[0], we, inf);
    for (int i = 0; i < d; ++i) {
        double proj = 0;
        for (int j = 0; j < d + k; ++j)
            proj += layers[0].w_inf->value[i * (d + k) + j] * inf->value[j];
        CHECK(out->value[i] ==
              doctest::Approx(sigmoid_d(0.5 * we->value[i] + 0.5 * proj)).epsilon(1e-13));
    }
}

TEST_CASE("update_embedding gate saturation") {
    const int d = 2, k = 2;
    ParamStore params;
    auto layers = make_layers(1, d, k, params, 12);
    Tape tape;
    auto we = make_tensor({d}, {0.7, -1.1});
    auto inf = make_tensor({d + k}, {2.0, -3.0, 0.1, 0.9});

    layers[0].xi_raw->value[0] = 40.0;  // xi ~ 1: influence ignored
    auto own_only = update_embedding(tape, layers[0], we, inf);
    for (int i = 0; i < d; ++i)
        CHECK(own_only->value[i] == doctest::Approx(sigmoid_d(we->value[i])).epsilon(1e-12));

    layers[0].xi_raw->value[0] = -40.0;  // xi ~ 0: own embedding ignored
    auto inf_only = update_embedding(tape, layers[0], we, inf);
    for (int i = 0; i < d; ++i) {
        double proj = 0;
        for (int j = 0; j < d + k; ++j)
            proj += layers[0].w_inf->value[i * (d + k) + j] * inf->value[j];
        CHECK(inf_only->value[i] == doctest::Approx(sigmoid_d(proj)).epsilon(1e-12));
    }
}

TEST_CASE("update_activation oracle and eta saturation") {
    const int d = 2, k = 2;
    ParamStore params;
    auto layers = make_layers(1, d, k, params, 14);
    Tape tape;
    auto we_v = make_tensor({d}, {0.3, -0.2});
    auto we_u = make_tensor({d}, {-0.5, 0.8});
    auto s_v = scalar(0.4);
    auto s_u = scalar(0.9);

    double score = 0;
    for (int i = 0; i < d; ++i) score += layers[0].w_s->value[i] * we_u->value[i];
    for (int i = 0; i < d; ++i) score += layers[0].w_s->value[d + i] * we_v->value[i];

    // eta_raw = 0 -> eta = 0.5
    auto out = update_activation(tape, layers[0], we_v, s_v, {we_u}, {s_u});
    CHECK(out->value[0] ==
          doctest::Approx(sigmoid_d(0.5 * 0.4 + 0.5 * score * 0.9)).epsilon(1e-13));

    layers[0].eta_raw->value[0] = -40.0;  // eta ~ 0: keeps sigmoid(s_v)
    auto keep = update_activation(tape, layers[0], we_v, s_v, {we_u}, {s_u});
    CHECK(keep->value[0] == doctest::Approx(sigmoid_d(0.4)).epsilon(1e-12));

    layers[0].eta_raw->value[0] = 40.0;  // eta ~ 1: pure neighbor drive
    auto drive = update_activation(tape, layers[0], we_v, s_v, {we_u}, {s_u});
    CHECK(drive->value[0] == doctest::Approx(sigmoid_d(score * 0.9)).epsilon(1e-12));
}

TEST_CASE("propagate: seed clamp and isolated-node correction") {
    const int d = 3, k = 2, n = 4;
    ParamStore params;
    auto layers = make_layers(2, d, k, params, 20);
    auto theta = make_tensor({k}, {0.5, 0.5});

    // node 0 seed; 1 follows 0; 2 follows 1; 3 isolated
    LocalGraph g;
    g.in_neighbors = {{}, {0}, {1}, {}};
    std::vector<bool> seeds = {true, false, false, false};
    auto st = init_states(random_embeddings(n, d, 21), seeds);
    Tape tape;
    auto out = propagate(tape, g, st, seeds, layers, theta, d);

    CHECK(out.s[0]->value[0] == 1.0);                 // clamped through both layers
    CHECK(out.s[1]->value[0] > 0.0);                  // reached at layer 1
    CHECK(out.s[1]->value[0] < 1.0);
    CHECK(out.s[2]->value[0] > 0.0);                  // reached at layer 2
    CHECK(out.s[3]->value[0] == 0.0);                 // isolated: never drifts to 0.5

    // embeddings still update everywhere (sigmoid output range)
    for (int v = 0; v < n; ++v)
        for (int i = 0; i < d; ++i) {
            CHECK(out.e[static_cast<size_t>(v)]->value[i] > 0.0);
            CHECK(out.e[static_cast<size_t>(v)]->value[i] < 1.0);
        }
}

TEST_CASE("one layer of propagate equals the manual composition of the updates") {
    const int d = 3, k = 2;
    ParamStore params;
    auto layers = make_layers(1, d, k, params, 25);
    auto theta = make_tensor({k}, {0.2, 0.7});

    LocalGraph g;
    g.in_neighbors = {{1, 2}, {}, {}};
    std::vector<bool> seeds = {false, true, false};
    auto emb = random_embeddings(3, d, 26);
    auto st = init_states(emb, seeds);

    Tape tape;
    auto out = propagate(tape, g, st, seeds, layers, theta, d);

    auto we0 = matvec(tape, layers[0].w, emb[0]);
    auto we1 = matvec(tape, layers[0].w, emb[1]);
    auto we2 = matvec(tape, layers[0].w, emb[2]);
    auto inf = neighbor_influence(tape, layers[0], we0, {we1, we2},
                                  {st.s[1], st.s[2]}, theta, d);
    auto e0 = update_embedding(tape, layers[0], we0, inf);
    auto s0 = update_activation(tape, layers[0], we0, st.s[0], {we1, we2}, {st.s[1], st.s[2]});
    for (int i = 0; i < d; ++i)
        CHECK(out.e[0]->value[i] == doctest::Approx(e0->value[i]).epsilon(1e-14));
    CHECK(out.s[0]->value[0] == doctest::Approx(s0->value[0]).epsilon(1e-14));
    CHECK(out.s[1]->value[0] == 1.0);   // seed
    CHECK(out.s[2]->value[0] == 0.0);   // inactive with empty neighborhood
}

TEST_CASE("propagate is invariant to node relabeling") {
    const int d = 3, k = 2, n = 5;
    ParamStore params;
    auto layers = make_layers(2, d, k, params, 30);
    auto theta = make_tensor({k}, {0.6, 0.1});
    auto emb = random_embeddings(n, d, 31);

    LocalGraph g;
    g.in_neighbors = {{1, 2}, {3}, {0}, {}, {0, 3}};
    std::vector<bool> seeds = {false, false, false, true, false};

    // permutation p maps old label -> new label
    std::vector<int> p = {3, 0, 4, 2, 1};
    LocalGraph gp;
    gp.in_neighbors.resize(static_cast<size_t>(n));
    std::vector<bool> seeds_p(static_cast<size_t>(n));
    std::vector<TensorPtr> emb_p(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
        auto& lst = gp.in_neighbors[static_cast<size_t>(p[static_cast<size_t>(v)])];
        for (int u : g.in_neighbors[static_cast<size_t>(v)])
            lst.push_back(p[static_cast<size_t>(u)]);
        seeds_p[static_cast<size_t>(p[static_cast<size_t>(v)])] = seeds[static_cast<size_t>(v)];
        emb_p[static_cast<size_t>(p[static_cast<size_t>(v)])] =
            make_tensor({d}, emb[static_cast<size_t>(v)]->value);
    }

    Tape t1, t2;
    auto a = propagate(t1, g, init_states(emb, seeds), seeds, layers, theta, d);
    auto b = propagate(t2, gp, init_states(emb_p, seeds_p), seeds_p, layers, theta, d);
    for (int v = 0; v < n; ++v) {
        const int pv = p[static_cast<size_t>(v)];
        CHECK(a.s[static_cast<size_t>(v)]->value[0] ==
              doctest::Approx(b.s[static_cast<size_t>(pv)]->value[0]).epsilon(1e-13));
        for (int i = 0; i < d; ++i)
            CHECK(a.e[static_cast<size_t>(v)]->value[i] ==
                  doctest::Approx(b.e[static_cast<size_t>(pv)]->value[i]).epsilon(1e-13));
    }
    Tape t3;
    CHECK(predict_size(t1, a)->value[0] ==
          doctest::Approx(predict_size(t3, b)->value[0]).epsilon(1e-12));
}

TEST_CASE("predict_size sums the final activations") {
    NodeState st;
    st.s = {scalar(1.0), scalar(0.25), scalar(0.5), scalar(0.0)};
    st.e = {};
    Tape tape;
    CHECK(predict_size(tape, st)->value[0] == doctest::Approx(1.75).epsilon(1e-15));
}

TEST_CASE("seed_flags and full_local_graph") {
    SocialGraph g;
    g.add_edge("b", "a");  // b follows a: a influences b
    g.add_edge("c", "a");
    g.add_edge("c", "b");
    auto lg = full_local_graph(g);
    REQUIRE(lg.size() == 3);
    const int a = g.index_of("a"), b = g.index_of("b"), c = g.index_of("c");
    CHECK(lg.in_neighbors[static_cast<size_t>(a)].empty());
    CHECK(lg.in_neighbors[static_cast<size_t>(b)] == std::vector<int>{a});
    CHECK(lg.in_neighbors[static_cast<size_t>(c)] == std::vector<int>{a, b});

    auto flags = seed_flags(g, {"a", "c"});
    CHECK(flags[static_cast<size_t>(a)]);
    CHECK_FALSE(flags[static_cast<size_t>(b)]);
    CHECK(flags[static_cast<size_t>(c)]);
    CHECK_THROWS_WITH(seed_flags(g, {"zz"}), doctest::Contains("zz"));
}

TEST_CASE("sample_local_subgraph: BFS closure matches a reference traversal") {
    // chain a -> b -> c -> d of influence (x -> y: y follows x) plus a side edge
    SocialGraph g;
    g.add_edge("b", "a");
    g.add_edge("c", "b");
    g.add_edge("d", "c");
    g.add_edge("d", "a");
    std::mt19937_64 rng(1);

    // hops = 0: seeds only, no induced edges beyond the set
    auto s0 = sample_local_subgraph(g, {g.index_of("a")}, 0, 10, rng);
    CHECK(s0.global_ids.size() == 1);
    CHECK(s0.local.in_neighbors[0].empty());
    CHECK(s0.is_seed[0]);

    // hops = 1 from a: adds its followers b and d
    auto s1 = sample_local_subgraph(g, {g.index_of("a")}, 1, 10, rng);
    CHECK(s1.global_ids.size() == 3);

    // hops = 3 reaches everything; induced edges count matches the full graph
    auto s3 = sample_local_subgraph(g, {g.index_of("a")}, 3, 10, rng);
    REQUIRE(s3.global_ids.size() == 4);
    int edges = 0;
    for (const auto& lst : s3.local.in_neighbors) edges += static_cast<int>(lst.size());
    CHECK(edges == 4);
    // exactly one seed flag
    CHECK(std::count(s3.is_seed.begin(), s3.is_seed.end(), true) == 1);
}

TEST_CASE("sample_local_subgraph honors the neighbor cap") {
    SocialGraph g;
    for (int i = 0; i < 20; ++i)
        g.add_edge("u" + std::to_string(i), "hub");  // 20 users follow the hub
    std::mt19937_64 rng(4);
    auto sub = sample_local_subgraph(g, {g.index_of("hub")}, 1, 5, rng);
    CHECK(sub.global_ids.size() == 6);  // hub + 5 sampled followers

    // cap larger than the neighborhood keeps everything
    auto all = sample_local_subgraph(g, {g.index_of("hub")}, 1, 100, rng);
    CHECK(all.global_ids.size() == 21);

    CHECK_THROWS(sample_local_subgraph(g, {}, 1, 5, rng));
}

TEST_CASE("two-layer propagate passes finite differences end to end") {
    const int d = 3, k = 2, n = 6;
    ParamStore params;
    auto layers = make_layers(2, d, k, params, 40);

    LocalGraph g;
    g.in_neighbors = {{1}, {2, 3}, {}, {0, 4}, {5}, {}};
    std::vector<bool> seeds = {false, false, true, false, false, true};

    // make embeddings and theta trainable leaves so their gradients are checked
    auto emb = random_embeddings(n, d, 41);
    for (int v = 0; v < n; ++v)
        params.add("e" + std::to_string(v), emb[static_cast<size_t>(v)]);
    auto theta = params.add("theta", make_tensor({k}, {0.4, 0.8}));

    auto report = finite_difference_check(
        [&](Tape& t) {
            auto out = propagate(t, g, init_states(emb, seeds), seeds, layers, theta, d);
            return predict_size(t, out);
        },
        params.entries(), 1e-6, 1e-4);
    INFO("worst " << report.worst_leaf << "[" << report.worst_coord << "] analytic "
                  << report.analytic << " numeric " << report.numeric);
    CHECK(report.pass);
}
