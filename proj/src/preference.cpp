#include "peg/preference.hpp"

#include <cmath>
#include <stdexcept>

namespace peg {

using namespace ad;

namespace {

TensorPtr glorot(std::vector<int> shape, std::mt19937_64& rng) {
    const double stddev = std::sqrt(2.0 / (shape.front() + shape.back()));
    return randn_tensor(std::move(shape), rng, stddev);
}

}  // namespace

LstmCell LstmCell::create(const std::string& prefix, int input_dim, int hidden_dim,
                          ParamStore& params, std::mt19937_64& rng) {
    LstmCell cell;
    cell.input_dim = input_dim;
    cell.hidden_dim = hidden_dim;
    auto w = [&](const char* g) {
        return params.add(prefix + ".w_" + g, glorot({hidden_dim, input_dim}, rng));
    };
    auto u = [&](const char* g) {
        return params.add(prefix + ".u_" + g, glorot({hidden_dim, hidden_dim}, rng));
    };
    auto b = [&](const char* g) { return params.add(prefix + ".b_" + g, zeros({hidden_dim})); };
    cell.w_i = w("i"), cell.u_i = u("i"), cell.b_i = b("i");
    cell.w_f = w("f"), cell.u_f = u("f"), cell.b_f = b("f");
    cell.w_o = w("o"), cell.u_o = u("o"), cell.b_o = b("o");
    cell.w_c = w("c"), cell.u_c = u("c"), cell.b_c = b("c");
    return cell;
}

LstmCell::State LstmCell::zero_state() const {
    return {zeros({hidden_dim}), zeros({hidden_dim})};
}

LstmCell::State LstmCell::step(Tape& tape, const TensorPtr& x, const State& prev) const {
    auto gate = [&](const TensorPtr& w, const TensorPtr& u, const TensorPtr& b) {
        return add(tape, add(tape, matvec(tape, w, x), matvec(tape, u, prev.h)), b);
    };
    auto i = sigmoid(tape, gate(w_i, u_i, b_i));
    auto f = sigmoid(tape, gate(w_f, u_f, b_f));
    auto o = sigmoid(tape, gate(w_o, u_o, b_o));
    auto g = tanh_op(tape, gate(w_c, u_c, b_c));
    State next;
    next.c = add(tape, mul(tape, f, prev.c), mul(tape, i, g));
    next.h = mul(tape, o, tanh_op(tape, next.c));
    return next;
}

PreferenceEncoder::PreferenceEncoder(const TrainConfig& cfg, const VariantFlags& variant,
                                     ParamStore& params, std::mt19937_64& rng)
    : variant_(variant),
      topics_(cfg.topics),
      d_long_(cfg.d_long),
      d_short_(cfg.d_short),
      d_gnn_(cfg.d_gnn),
      long_dim_(variant.long_term == LongTermMode::bilstm ? 2 * cfg.d_long : cfg.d_long),
      short_window_(cfg.short_window) {
    fwd_cell = LstmCell::create("pref.fwd", topics_, d_long_, params, rng);
    bwd_cell = LstmCell::create("pref.bwd", topics_, d_long_, params, rng);
    short_cell = LstmCell::create("pref.short", topics_, d_short_, params, rng);
    asvd_w_h = params.add("pref.asvd_w_h", glorot({d_long_, topics_}, rng));
    asvd_b_h = params.add("pref.asvd_b_h", zeros({d_long_}));
    asvd_w_x = params.add("pref.asvd_w_x", glorot({1, d_long_}, rng));
    asvd_b_x = params.add("pref.asvd_b_x", zeros({1}));
    fuse_w = params.add("pref.fuse_w", glorot({d_gnn_, fused_dim()}, rng));
    fuse_b = params.add("pref.fuse_b", zeros({d_gnn_}));
    fallback_long = params.add("pref.fallback_long", randn_tensor({long_dim_}, rng, 0.1));
    fallback_short = params.add("pref.fallback_short", randn_tensor({d_short_}, rng, 0.1));
}

TensorPtr PreferenceEncoder::bilstm_long_term(Tape& tape,
                                              const std::vector<TensorPtr>& history) const {
    const int n = static_cast<int>(history.size());
    if (n < 1) throw std::invalid_argument("bilstm_long_term: empty history");
    std::vector<TensorPtr> fwd_h(static_cast<size_t>(n)), bwd_h(static_cast<size_t>(n));
    auto state = fwd_cell.zero_state();
    for (int i = 0; i < n; ++i) {
        state = fwd_cell.step(tape, history[static_cast<size_t>(i)], state);
        fwd_h[static_cast<size_t>(i)] = state.h;
    }
    state = bwd_cell.zero_state();
    for (int i = n - 1; i >= 0; --i) {
        state = bwd_cell.step(tape, history[static_cast<size_t>(i)], state);
        bwd_h[static_cast<size_t>(i)] = state.h;
    }
    std::vector<TensorPtr> pooled;
    pooled.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        pooled.push_back(
            concat(tape, {fwd_h[static_cast<size_t>(i)], bwd_h[static_cast<size_t>(i)]}));
    auto stacked = concat(tape, pooled);  // n * 2*d_long
    auto mat = reshape(tape, stacked, {n, 2 * d_long_});
    // average pooling over time steps
    auto ones = make_tensor({1, n}, std::vector<double>(static_cast<size_t>(n), 1.0 / n));
    return reshape(tape, matmul(tape, ones, mat), {2 * d_long_});
}

TensorPtr PreferenceEncoder::asvd_long_term(Tape& tape, const std::vector<TensorPtr>& history,
                                            TensorPtr* attention) const {
    const int n = static_cast<int>(history.size());
    if (n < 1) throw std::invalid_argument("asvd_long_term: empty history");
    std::vector<TensorPtr> h(static_cast<size_t>(n));
    std::vector<TensorPtr> scores;
    scores.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        h[static_cast<size_t>(i)] = sigmoid(
            tape, add(tape, matvec(tape, asvd_w_h, history[static_cast<size_t>(i)]), asvd_b_h));
        scores.push_back(sigmoid(
            tape, add(tape, matvec(tape, asvd_w_x, h[static_cast<size_t>(i)]), asvd_b_x)));
    }
    auto weights = softmax(tape, concat(tape, scores));
    if (attention) *attention = weights;
    TensorPtr out;
    for (int i = 0; i < n; ++i) {
        auto term = mul(tape, h[static_cast<size_t>(i)], slice(tape, weights, i, 1));
        out = i == 0 ? term : add(tape, out, term);
    }
    return out;
}

TensorPtr PreferenceEncoder::lstm_short_term(Tape& tape,
                                             const std::vector<TensorPtr>& history) const {
    const int n = static_cast<int>(history.size());
    if (n < 1) throw std::invalid_argument("lstm_short_term: empty history");
    const int start = std::max(0, n - short_window_);
    auto state = short_cell.zero_state();
    for (int i = start; i < n; ++i)
        state = short_cell.step(tape, history[static_cast<size_t>(i)], state);
    return state.h;
}

TensorPtr PreferenceEncoder::fuse(Tape& tape, const TensorPtr& p_long,
                                  const TensorPtr& p_short) const {
    if (p_long->size() != long_dim_ || p_short->size() != d_short_)
        throw std::invalid_argument(
            "fuse: component widths " + std::to_string(p_long->size()) + "+" +
            std::to_string(p_short->size()) + " do not match configured " +
            std::to_string(long_dim_) + "+" + std::to_string(d_short_));
    auto cat = concat(tape, {p_long, p_short});
    return add(tape, matvec(tape, fuse_w, cat), fuse_b);
}

TensorPtr PreferenceEncoder::embed(Tape& tape, const std::vector<TensorPtr>& history) const {
    const bool has_history = !history.empty() && variant_.use_preference;
    TensorPtr p_long, p_short;
    if (!variant_.use_long_term) {
        p_long = zeros({long_dim_});
    } else if (!has_history) {
        p_long = fallback_long;
    } else {
        p_long = variant_.long_term == LongTermMode::bilstm ? bilstm_long_term(tape, history)
                                                            : asvd_long_term(tape, history);
    }
    if (!variant_.use_short_term) {
        p_short = zeros({d_short_});
    } else if (!has_history) {
        p_short = fallback_short;
    } else {
        p_short = lstm_short_term(tape, history);
    }
    return fuse(tape, p_long, p_short);
}

}  // namespace peg
