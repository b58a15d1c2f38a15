#include <cmath>
#include <random>

#include "doctest.h"
#include "peg/gradcheck.hpp"
#include "peg/preference.hpp"

using namespace peg;
using namespace peg::ad;

namespace {

double sigmoid_d(double x) { return 1.0 / (1.0 + std::exp(-x)); }

TrainConfig small_cfg() {
    TrainConfig cfg;
    cfg.topics = 3;
    cfg.d_long = 4;
    cfg.d_short = 4;
    cfg.d_gnn = 5;
    cfg.short_window = 3;
    return cfg;
}

PreferenceEncoder make_encoder(const TrainConfig& cfg, ParamStore& params,
                               const std::string& variant = "peg", std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    return PreferenceEncoder(cfg, parse_variant(variant), params, rng);
}

std::vector<TensorPtr> random_history(int n, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    std::vector<TensorPtr> hist;
    for (int i = 0; i < n; ++i) {
        std::vector<double> v(static_cast<size_t>(k));
        for (auto& x : v) x = unif(rng);
        hist.push_back(make_tensor({k}, std::move(v)));
    }
    return hist;
}

// plain-double LSTM step, matching the cell layout
struct RefState {
    std::vector<double> h, c;
};

RefState ref_step(const LstmCell& cell, const std::vector<double>& x, const RefState& prev) {
    const int hd = cell.hidden_dim, in = cell.input_dim;
    auto affine = [&](const TensorPtr& w, const TensorPtr& u, const TensorPtr& b, int i) {
        double s = b->value[static_cast<size_t>(i)];
        for (int j = 0; j < in; ++j) s += w->value[i * in + j] * x[static_cast<size_t>(j)];
        for (int j = 0; j < hd; ++j) s += u->value[i * hd + j] * prev.h[static_cast<size_t>(j)];
        return s;
    };
    RefState next;
    next.h.resize(static_cast<size_t>(hd));
    next.c.resize(static_cast<size_t>(hd));
    for (int i = 0; i < hd; ++i) {
        const double ig = sigmoid_d(affine(cell.w_i, cell.u_i, cell.b_i, i));
        const double fg = sigmoid_d(affine(cell.w_f, cell.u_f, cell.b_f, i));
        const double og = sigmoid_d(affine(cell.w_o, cell.u_o, cell.b_o, i));
        const double g = std::tanh(affine(cell.w_c, cell.u_c, cell.b_c, i));
        next.c[static_cast<size_t>(i)] = fg * prev.c[static_cast<size_t>(i)] + ig * g;
        next.h[static_cast<size_t>(i)] = og * std::tanh(next.c[static_cast<size_t>(i)]);
    }
    return next;
}

}  // namespace

TEST_CASE("single-item history: pooled output equals the single step") {
    TrainConfig cfg = small_cfg();
    ParamStore params;
    auto enc = make_encoder(cfg, params);
    auto hist = random_history(1, cfg.topics, 11);

    Tape tape;
    auto pooled = enc.bilstm_long_term(tape, hist);
    auto fwd = enc.fwd_cell.step(tape, hist[0], enc.fwd_cell.zero_state());
    auto bwd = enc.bwd_cell.step(tape, hist[0], enc.bwd_cell.zero_state());
    REQUIRE(pooled->size() == 2 * cfg.d_long);
    for (int i = 0; i < cfg.d_long; ++i) {
        CHECK(pooled->value[i] == doctest::Approx(fwd.h->value[i]).epsilon(1e-14));
        CHECK(pooled->value[cfg.d_long + i] == doctest::Approx(bwd.h->value[i]).epsilon(1e-14));
    }
}

TEST_CASE("zero biases, zero weights: LSTM output is exactly zero") {
    TrainConfig cfg = small_cfg();
    ParamStore params;
    auto enc = make_encoder(cfg, params);
    for (auto& [name, t] : params.entries())
        if (name.rfind("pref.short", 0) == 0)
            std::fill(t->value.begin(), t->value.end(), 0.0);
    Tape tape;
    auto out = enc.lstm_short_term(tape, random_history(4, cfg.topics, 3));
    // with all weights 0: g = tanh(0) = 0, so c stays 0 and h = o * tanh(0) = 0
    for (int i = 0; i < cfg.d_short; ++i) CHECK(out->value[i] == 0.0);
}

TEST_CASE("bilstm matches a hand-unrolled double-precision oracle") {
    TrainConfig cfg = small_cfg();
    ParamStore params;
    auto enc = make_encoder(cfg, params, "peg", 42);
    auto hist = random_history(3, cfg.topics, 13);

    Tape tape;
    auto pooled = enc.bilstm_long_term(tape, hist);

    const int n = 3, hd = cfg.d_long;
    std::vector<std::vector<double>> xs;
    for (const auto& h : hist) xs.push_back(h->value);

    std::vector<RefState> fwd(static_cast<size_t>(n)), bwd(static_cast<size_t>(n));
    RefState st{std::vector<double>(static_cast<size_t>(hd), 0.0),
                std::vector<double>(static_cast<size_t>(hd), 0.0)};
    for (int i = 0; i < n; ++i) {
        st = ref_step(enc.fwd_cell, xs[static_cast<size_t>(i)], st);
        fwd[static_cast<size_t>(i)] = st;
    }
    st = RefState{std::vector<double>(static_cast<size_t>(hd), 0.0),
                  std::vector<double>(static_cast<size_t>(hd), 0.0)};
    for (int i = n - 1; i >= 0; --i) {
        st = ref_step(enc.bwd_cell, xs[static_cast<size_t>(i)], st);
        bwd[static_cast<size_t>(i)] = st;
    }
    for (int j = 0; j < hd; ++j) {
        double mf = 0, mb = 0;
        for (int i = 0; i < n; ++i) {
            mf += fwd[static_cast<size_t>(i)].h[static_cast<size_t>(j)];
            mb += bwd[static_cast<size_t>(i)].h[static_cast<size_t>(j)];
        }
        CHECK(pooled->value[j] == doctest::Approx(mf / n).epsilon(1e-12));
        CHECK(pooled->value[hd + j] == doctest::Approx(mb / n).epsilon(1e-12));
    }
}

TEST_CASE("reversing the history swaps the role of the two directions") {
    TrainConfig cfg = small_cfg();
    ParamStore pa, pb;
    std::mt19937_64 ra(4), rb(4);
    PreferenceEncoder a(cfg, parse_variant("peg"), pa, ra);
    PreferenceEncoder b(cfg, parse_variant("peg"), pb, rb);
    // give b the transposed direction assignment: b.fwd <- a.bwd, b.bwd <- a.fwd
    auto copy_cell = [](const LstmCell& src, LstmCell& dst) {
        dst.w_i->value = src.w_i->value; dst.u_i->value = src.u_i->value; dst.b_i->value = src.b_i->value;
        dst.w_f->value = src.w_f->value; dst.u_f->value = src.u_f->value; dst.b_f->value = src.b_f->value;
        dst.w_o->value = src.w_o->value; dst.u_o->value = src.u_o->value; dst.b_o->value = src.b_o->value;
        dst.w_c->value = src.w_c->value; dst.u_c->value = src.u_c->value; dst.b_c->value = src.b_c->value;
    };
    copy_cell(a.bwd_cell, b.fwd_cell);
    copy_cell(a.fwd_cell, b.bwd_cell);

    auto hist = random_history(5, cfg.topics, 17);
    auto reversed = hist;
    std::reverse(reversed.begin(), reversed.end());

    Tape t1, t2;
    auto ya = a.bilstm_long_term(t1, hist);
    auto yb = b.bilstm_long_term(t2, reversed);
    // a's forward pass over hist == b's backward pass over reversed hist, so
    // the two halves of the pooled vector swap
    for (int i = 0; i < cfg.d_long; ++i) {
        CHECK(ya->value[i] == doctest::Approx(yb->value[cfg.d_long + i]).epsilon(1e-12));
        CHECK(ya->value[cfg.d_long + i] == doctest::Approx(yb->value[i]).epsilon(1e-12));
    }
}

TEST_CASE("asvd: singleton history gets weight 1 and returns its hidden vector") {
    TrainConfig cfg = small_cfg();
    ParamStore params;
    auto enc = make_encoder(cfg, params, "pega");
    auto hist = random_history(1, cfg.topics, 19);
    Tape tape;
    TensorPtr attn;
    auto out = enc.asvd_long_term(tape, hist, &attn);
    REQUIRE(attn->size() == 1);
    CHECK(attn->value[0] == doctest::Approx(1.0).epsilon(1e-15));
    // out must equal sigmoid(W_h x + b_h)
    auto h = sigmoid(tape, add(tape, matvec(tape, enc.asvd_w_h, hist[0]), enc.asvd_b_h));
    for (int i = 0; i < cfg.d_long; ++i)
        CHECK(out->value[i] == doctest::Approx(h->value[i]).epsilon(1e-14));
}

TEST_CASE("asvd: identical items get uniform attention; weights always sum to 1") {
    TrainConfig cfg = small_cfg();
    ParamStore params;
    auto enc = make_encoder(cfg, params, "pega");
    auto one = random_history(1, cfg.topics, 23)[0];
    std::vector<TensorPtr> same = {one, one, one, one};
    Tape tape;
    TensorPtr attn;
    auto out = enc.asvd_long_term(tape, same, &attn);
    for (int i = 0; i < 4; ++i) CHECK(attn->value[i] == doctest::Approx(0.25).epsilon(1e-14));

    auto mixed = random_history(6, cfg.topics, 29);
    Tape t2;
    TensorPtr attn2;
    enc.asvd_long_term(t2, mixed, &attn2);
    double s = 0;
    for (int i = 0; i < 6; ++i) {
        CHECK(attn2->value[i] > 0.0);
        s += attn2->value[i];
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    (void)out;
}

TEST_CASE("asvd matches a plain-double transcription of the formula") {
    TrainConfig cfg = small_cfg();
    ParamStore params;
    auto enc = make_encoder(cfg, params, "pega", 31);
    auto hist = random_history(4, cfg.topics, 37);
    Tape tape;
    TensorPtr attn;
    auto out = enc.asvd_long_term(tape, hist, &attn);

    const int n = 4, hd = cfg.d_long, k = cfg.topics;
    std::vector<std::vector<double>> h(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(hd)));
    std::vector<double> score(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t) {
        for (int i = 0; i < hd; ++i) {
            double s = enc.asvd_b_h->value[static_cast<size_t>(i)];
            for (int j = 0; j < k; ++j)
                s += enc.asvd_w_h->value[i * k + j] * hist[static_cast<size_t>(t)]->value[j];
            h[static_cast<size_t>(t)][static_cast<size_t>(i)] = sigmoid_d(s);
        }
        double s = enc.asvd_b_x->value[0];
        for (int j = 0; j < hd; ++j)
            s += enc.asvd_w_x->value[static_cast<size_t>(j)] *
                 h[static_cast<size_t>(t)][static_cast<size_t>(j)];
        score[static_cast<size_t>(t)] = sigmoid_d(s);
    }
    double z = 0;
    std::vector<double> w(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t) z += std::exp(score[static_cast<size_t>(t)]);
    for (int t = 0; t < n; ++t) w[static_cast<size_t>(t)] = std::exp(score[static_cast<size_t>(t)]) / z;
    for (int t = 0; t < n; ++t)
        CHECK(attn->value[t] == doctest::Approx(w[static_cast<size_t>(t)]).epsilon(1e-12));
    for (int i = 0; i < hd; ++i) {
        double e = 0;
        for (int t = 0; t < n; ++t)
            e += w[static_cast<size_t>(t)] * h[static_cast<size_t>(t)][static_cast<size_t>(i)];
        CHECK(out->value[i] == doctest::Approx(e).epsilon(1e-12));
    }
}

TEST_CASE("short-term encoder only sees the last tau items") {
    TrainConfig cfg = small_cfg();  // short_window = 3
    ParamStore params;
    auto enc = make_encoder(cfg, params);
    auto hist = random_history(8, cfg.topics, 41);
    std::vector<TensorPtr> suffix(hist.end() - 3, hist.end());

    Tape t1, t2;
    auto full = enc.lstm_short_term(t1, hist);
    auto tail = enc.lstm_short_term(t2, suffix);
    for (int i = 0; i < cfg.d_short; ++i) CHECK(full->value[i] == tail->value[i]);

    // shorter than the window: all items used
    std::vector<TensorPtr> two(hist.begin(), hist.begin() + 2);
    Tape t3;
    auto short_out = enc.lstm_short_term(t3, two);
    RefState st{std::vector<double>(static_cast<size_t>(cfg.d_short), 0.0),
                std::vector<double>(static_cast<size_t>(cfg.d_short), 0.0)};
    st = ref_step(enc.short_cell, two[0]->value, st);
    st = ref_step(enc.short_cell, two[1]->value, st);
    for (int i = 0; i < cfg.d_short; ++i)
        CHECK(short_out->value[i] == doctest::Approx(st.h[static_cast<size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("fuse: shape checks, zero inputs give the bias projection") {
    TrainConfig cfg = small_cfg();
    ParamStore params;
    auto enc = make_encoder(cfg, params);
    Tape tape;
    auto out = enc.fuse(tape, zeros({2 * cfg.d_long}), zeros({cfg.d_short}));
    REQUIRE(out->size() == cfg.d_gnn);
    for (int i = 0; i < cfg.d_gnn; ++i)
        CHECK(out->value[i] == enc.fuse_b->value[i]);  // W @ 0 + b

    CHECK_THROWS(enc.fuse(tape, zeros({cfg.d_long}), zeros({cfg.d_short})));
    CHECK_THROWS(enc.fuse(tape, zeros({2 * cfg.d_long}), zeros({cfg.d_short + 1})));
}

TEST_CASE("embed honors variant flags") {
    TrainConfig cfg = small_cfg();
    auto hist = random_history(5, cfg.topics, 43);

    // peg-s: short-term zeroed, so output is unchanged when the suffix changes
    {
        ParamStore params;
        auto enc = make_encoder(cfg, params, "peg-s", 51);
        auto altered = hist;
        altered.back() = random_history(1, cfg.topics, 44)[0];
        Tape t1, t2;
        auto a = enc.embed(t1, hist);
        auto b = enc.embed(t2, altered);
        // the last item still feeds the long-term path, so compare against the
        // explicit zero-short construction instead
        auto c = enc.fuse(t1, enc.bilstm_long_term(t1, hist), zeros({cfg.d_short}));
        for (int i = 0; i < cfg.d_gnn; ++i)
            CHECK(a->value[i] == doctest::Approx(c->value[i]).epsilon(1e-14));
        (void)b;
    }
    // peg-l: long-term zeroed
    {
        ParamStore params;
        auto enc = make_encoder(cfg, params, "peg-l", 52);
        Tape tape;
        auto a = enc.embed(tape, hist);
        auto c = enc.fuse(tape, zeros({2 * cfg.d_long}), enc.lstm_short_term(tape, hist));
        for (int i = 0; i < cfg.d_gnn; ++i)
            CHECK(a->value[i] == doctest::Approx(c->value[i]).epsilon(1e-14));
    }
    // peg-d: fallbacks regardless of history
    {
        ParamStore params;
        auto enc = make_encoder(cfg, params, "peg-d", 53);
        Tape t1, t2;
        auto a = enc.embed(t1, hist);
        auto b = enc.embed(t2, {});
        for (int i = 0; i < cfg.d_gnn; ++i) CHECK(a->value[i] == b->value[i]);
    }
    // default: empty history falls back to the shared vectors
    {
        ParamStore params;
        auto enc = make_encoder(cfg, params, "peg", 54);
        Tape t1, t2;
        auto a = enc.embed(t1, {});
        auto b = enc.fuse(t2, enc.fallback_long, enc.fallback_short);
        for (int i = 0; i < cfg.d_gnn; ++i) CHECK(a->value[i] == b->value[i]);
    }
    // pega uses the d_long-wide asvd output
    {
        ParamStore params;
        auto enc = make_encoder(cfg, params, "pega", 55);
        CHECK(enc.long_dim() == cfg.d_long);
        Tape tape;
        auto a = enc.embed(tape, hist);
        REQUIRE(a->size() == cfg.d_gnn);
    }
}

TEST_CASE("preference gradients pass finite differences") {
    TrainConfig cfg = small_cfg();
    for (const char* variant : {"peg", "pega"}) {
        for (int len : {1, 2, 7}) {
            CAPTURE(variant);
            CAPTURE(len);
            ParamStore params;
            auto enc = make_encoder(cfg, params, variant, 60 + len);
            auto hist = random_history(len, cfg.topics, 70 + static_cast<std::uint64_t>(len));
            auto report = finite_difference_check(
                [&](Tape& t) { return sum(t, enc.embed(t, hist)); }, params.entries(), 1e-6,
                1e-4);
            INFO("worst " << report.worst_leaf << "[" << report.worst_coord << "] analytic "
                          << report.analytic << " numeric " << report.numeric);
            CHECK(report.pass);
        }
    }
    // empty history exercises the fallback gradient path
    ParamStore params;
    auto enc = make_encoder(cfg, params, "peg", 80);
    auto report = finite_difference_check(
        [&](Tape& t) { return sum(t, enc.embed(t, {})); }, params.entries(), 1e-6, 1e-4);
    CHECK(report.pass);
}
