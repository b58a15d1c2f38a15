#include "peg/opchecks.hpp"

#include <random>

#include "peg/gnn.hpp"
#include "peg/model.hpp"
#include "peg/preference.hpp"
#include "peg/topic_model.hpp"

namespace peg {

using namespace ad;

namespace {

TensorPtr random_leaf(std::vector<int> shape, std::mt19937_64& rng, double lo = -1.0,
                      double hi = 1.0) {
    std::uniform_real_distribution<double> unif(lo, hi);
    const int n = shape_size(shape);
    std::vector<double> v(static_cast<size_t>(n));
    for (auto& x : v) x = unif(rng);
    auto t = make_tensor(std::move(shape), std::move(v));
    t->requires_grad = true;
    t->grad.assign(t->value.size(), 0.0);
    return t;
}

using Leaves = std::vector<std::pair<std::string, TensorPtr>>;

NamedCheck check(const std::string& name, const std::function<TensorPtr(Tape&)>& forward,
                 const Leaves& leaves) {
    return {name, finite_difference_check(forward, leaves, 1e-6, 1e-4)};
}

}  // namespace

std::vector<NamedCheck> run_primitive_gradchecks(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<NamedCheck> out;

    auto unary = [&](const std::string& name, auto op, double lo, double hi) {
        auto x = random_leaf({5}, rng, lo, hi);
        out.push_back(check(
            name, [&, x](Tape& t) { return sum(t, op(t, x)); }, {{"x", x}}));
    };
    unary("sigmoid", [](Tape& t, const TensorPtr& x) { return sigmoid(t, x); }, -2.0, 2.0);
    unary("tanh", [](Tape& t, const TensorPtr& x) { return tanh_op(t, x); }, -2.0, 2.0);
    unary("exp", [](Tape& t, const TensorPtr& x) { return exp_op(t, x); }, -1.0, 1.0);
    unary("log", [](Tape& t, const TensorPtr& x) { return log_op(t, x); }, 0.3, 2.0);
    unary("softplus", [](Tape& t, const TensorPtr& x) { return softplus(t, x); }, -2.0, 2.0);
    unary("leaky_relu",
          [](Tape& t, const TensorPtr& x) { return leaky_relu(t, x, 0.2); }, 0.2, 2.0);
    unary("reciprocal", [](Tape& t, const TensorPtr& x) { return reciprocal(t, x); }, 0.3, 2.0);
    unary("neg", [](Tape& t, const TensorPtr& x) { return neg(t, x); }, -2.0, 2.0);
    unary("scale", [](Tape& t, const TensorPtr& x) { return scale(t, x, -1.7); }, -2.0, 2.0);
    unary("add_const",
          [](Tape& t, const TensorPtr& x) { return add_const(t, x, 0.3); }, -2.0, 2.0);
    unary("softmax", [](Tape& t, const TensorPtr& x) {
        return mul(t, softmax(t, x), x);  // weighted so the gradient is nonzero
    }, -2.0, 2.0);
    unary("mean", [](Tape& t, const TensorPtr& x) {
        return mean(t, mul(t, x, x));
    }, -2.0, 2.0);
    unary("reshape", [](Tape& t, const TensorPtr& x) {
        return mul(t, reshape(t, reshape(t, x, {5, 1}), {5}), x);
    }, -2.0, 2.0);
    unary("slice", [](Tape& t, const TensorPtr& x) { return slice(t, x, 1, 3); }, -2.0, 2.0);

    auto binary = [&](const std::string& name, auto op) {
        auto a = random_leaf({4}, rng, 0.3, 2.0);
        auto b = random_leaf({4}, rng, 0.3, 2.0);
        out.push_back(check(
            name, [&, a, b](Tape& t) { return sum(t, op(t, a, b)); },
            {{"a", a}, {"b", b}}));
    };
    binary("add", [](Tape& t, const TensorPtr& a, const TensorPtr& b) { return add(t, a, b); });
    binary("sub", [](Tape& t, const TensorPtr& a, const TensorPtr& b) { return sub(t, a, b); });
    binary("mul", [](Tape& t, const TensorPtr& a, const TensorPtr& b) { return mul(t, a, b); });
    binary("div", [](Tape& t, const TensorPtr& a, const TensorPtr& b) { return div(t, a, b); });
    binary("dot", [](Tape& t, const TensorPtr& a, const TensorPtr& b) { return dot(t, a, b); });

    {
        auto a = random_leaf({3, 4}, rng);
        auto b = random_leaf({4, 2}, rng);
        out.push_back(check(
            "matmul", [&, a, b](Tape& t) { return sum(t, matmul(t, a, b)); },
            {{"a", a}, {"b", b}}));
    }
    {
        auto w = random_leaf({3, 4}, rng);
        auto x = random_leaf({4}, rng);
        out.push_back(check(
            "matvec", [&, w, x](Tape& t) { return sum(t, matvec(t, w, x)); },
            {{"w", w}, {"x", x}}));
    }
    {
        auto a = random_leaf({3}, rng);
        auto b = random_leaf({2}, rng);
        out.push_back(check(
            "concat", [&, a, b](Tape& t) {
                auto c = concat(t, {a, b});
                return sum(t, mul(t, c, c));
            },
            {{"a", a}, {"b", b}}));
    }
    {
        auto a = random_leaf({3, 4}, rng);
        out.push_back(check(
            "row", [&, a](Tape& t) {
                auto r = row(t, a, 1);
                return sum(t, mul(t, r, r));
            },
            {{"a", a}}));
    }
    {
        auto a = random_leaf({6}, rng);
        out.push_back(check(
            "sum", [&, a](Tape& t) { return sum(t, mul(t, a, a)); }, {{"a", a}}));
    }
    {
        auto a = random_leaf({3, 4}, rng);
        out.push_back(check(
            "softmax_2d", [&, a](Tape& t) {
                return sum(t, mul(t, softmax(t, a, 1), a));
            },
            {{"a", a}}));
    }
    return out;
}

std::vector<NamedCheck> run_composite_gradchecks(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<NamedCheck> out;

    {
        // topic loss on a 5-doc batch, K = 3
        ParamStore params;
        std::mt19937_64 init(seed + 1);
        TopicModel topic(8, 3, 4, 5, 1.0, params, init);
        std::vector<BagOfWords> batch(5);
        batch[0].counts = {{0, 2}, {3, 1}};
        batch[1].counts = {{1, 1}, {2, 1}, {7, 3}};
        batch[2].counts = {{5, 4}};
        batch[3].counts = {{4, 1}, {6, 1}};
        batch[4].counts = {{0, 1}, {1, 1}, {2, 1}, {3, 1}};
        std::normal_distribution<double> norm(0.0, 1.0);
        std::vector<std::vector<double>> eps(5, std::vector<double>(3));
        for (auto& e : eps)
            for (auto& x : e) x = norm(rng);
        out.push_back(check(
            "topic_loss", [&](Tape& t) { return topic.loss(t, batch, eps); },
            params.entries()));
    }

    for (const char* variant : {"peg", "pega"}) {
        TrainConfig cfg;
        cfg.topics = 3;
        cfg.d_long = 4;
        cfg.d_short = 4;
        cfg.d_gnn = 5;
        cfg.short_window = 4;
        ParamStore params;
        std::mt19937_64 init(seed + 2);
        PreferenceEncoder enc(cfg, parse_variant(variant), params, init);
        std::uniform_real_distribution<double> unif(0.05, 0.95);
        std::vector<TensorPtr> history;
        for (int i = 0; i < 7; ++i) {
            std::vector<double> v(3);
            for (auto& x : v) x = unif(rng);
            history.push_back(make_tensor({3}, std::move(v)));
        }
        out.push_back(check(
            std::string("preference_") + variant,
            [&](Tape& t) { return sum(t, enc.embed(t, history)); }, params.entries()));
    }

    {
        // end-to-end MRSE through a 6-node / 2-layer propagate
        const int d = 3, k = 2;
        ParamStore params;
        std::mt19937_64 init(seed + 3);
        std::vector<GnnLayerParams> layers;
        for (int l = 0; l < 2; ++l)
            layers.push_back(GnnLayerParams::create("gnn.l" + std::to_string(l), d, k, params,
                                                    init));
        LocalGraph g;
        g.in_neighbors = {{1}, {2, 3}, {}, {0, 4}, {5}, {}};
        std::vector<bool> seeds = {false, false, true, false, false, true};
        std::normal_distribution<double> norm(0.0, 0.5);
        std::vector<TensorPtr> emb;
        for (int v = 0; v < 6; ++v) {
            std::vector<double> x(static_cast<size_t>(d));
            for (auto& e : x) e = norm(rng);
            emb.push_back(params.add("e" + std::to_string(v), make_tensor({d}, std::move(x))));
        }
        auto theta = params.add("theta", make_tensor({k}, {0.4, 0.8}));
        out.push_back(check(
            "propagate_mrse",
            [&](Tape& t) {
                auto state = propagate(t, g, init_states(emb, seeds), seeds, layers, theta, d);
                return mrse_loss(t, {predict_size(t, state)}, {4.0});
            },
            params.entries()));
    }
    return out;
}

}  // namespace peg
