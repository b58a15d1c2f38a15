#include "peg/topic_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace peg {

using namespace ad;

TopicModel::TopicModel(int vocab_size, int topics, int d_phi, int hidden, double prior_std,
                       ParamStore& params, std::mt19937_64& init_rng)
    : vocab_size_(vocab_size), topics_(topics), hidden_(hidden) {
    if (topics < 2) throw std::invalid_argument("topic model requires K >= 2");
    auto glorot = [&](std::vector<int> shape) {
        const double stddev = std::sqrt(2.0 / (shape.front() + shape.back()));
        return randn_tensor(std::move(shape), init_rng, stddev);
    };
    phi = params.add("topic.phi", randn_tensor({topics, d_phi}, init_rng, prior_std));
    w_alpha = params.add("topic.w_alpha", randn_tensor({d_phi}, init_rng, 0.1));
    b_alpha = params.add("topic.b_alpha", zeros({1}));
    beta = params.add("topic.beta", glorot({topics, vocab_size}));
    enc_w1 = params.add("topic.enc_w1", glorot({hidden, vocab_size}));
    enc_b1 = params.add("topic.enc_b1", zeros({hidden}));
    enc_mu_w = params.add("topic.enc_mu_w", glorot({topics, hidden}));
    enc_mu_b = params.add("topic.enc_mu_b", zeros({topics}));
    enc_lv_w = params.add("topic.enc_lv_w", glorot({topics, hidden}));
    enc_lv_b = params.add("topic.enc_lv_b", zeros({topics}));
}

TopicModel::Posterior TopicModel::encode(Tape& tape, const BagOfWords& doc) const {
    if (doc.empty())
        throw std::invalid_argument("encode: empty document '" + doc.doc_id + "'");
    std::vector<double> x(static_cast<size_t>(vocab_size_), 0.0);
    const double total = doc.total();
    for (const auto& [idx, count] : doc.counts) {
        if (idx < 0 || idx >= vocab_size_)
            throw std::out_of_range("encode: word index " + std::to_string(idx) +
                                    " outside vocabulary of size " + std::to_string(vocab_size_));
        x[static_cast<size_t>(idx)] = count / total;
    }
    auto input = make_tensor({vocab_size_}, std::move(x));
    auto h = tanh_op(tape, add(tape, matvec(tape, enc_w1, input), enc_b1));
    Posterior post;
    post.mu = add(tape, matvec(tape, enc_mu_w, h), enc_mu_b);
    // softplus keeps the variance positive; store its log
    auto var = softplus(tape, add(tape, matvec(tape, enc_lv_w, h), enc_lv_b));
    post.logvar = log_op(tape, var);
    return post;
}

TensorPtr TopicModel::sample_theta(Tape& tape, const Posterior& post,
                                   const std::vector<double>& eps_noise) const {
    if (eps_noise.empty()) return sigmoid(tape, post.mu);
    if (static_cast<int>(eps_noise.size()) != topics_)
        throw std::invalid_argument("sample_theta: noise length must equal K");
    auto eps = make_tensor({topics_}, eps_noise);
    auto std_dev = exp_op(tape, scale(tape, post.logvar, 0.5));
    return sigmoid(tape, add(tape, post.mu, mul(tape, eps, std_dev)));
}

TensorPtr TopicModel::infer_theta(Tape& tape, const BagOfWords& doc, bool* used_fallback) const {
    if (doc.empty()) {
        if (used_fallback) *used_fallback = true;
        return make_tensor({topics_}, std::vector<double>(static_cast<size_t>(topics_), 0.5));
    }
    if (used_fallback) *used_fallback = false;
    return sample_theta(tape, encode(tape, doc), {});
}

TensorPtr TopicModel::alpha(Tape& tape) const {
    std::vector<TensorPtr> scores;
    scores.reserve(static_cast<size_t>(topics_));
    for (int k = 0; k < topics_; ++k)
        scores.push_back(add(tape, dot(tape, row(tape, phi, k), w_alpha), b_alpha));
    return sigmoid(tape, concat(tape, scores));
}

TopicModel::Prior TopicModel::laplace_prior(Tape& tape) const {
    return prior_from_alpha(tape, alpha(tape));
}

TopicModel::Prior TopicModel::prior_from_alpha(Tape& tape, const TensorPtr& alpha_vec) const {
    const double k = alpha_vec->size();
    auto log_a = log_op(tape, alpha_vec);
    Prior prior;
    prior.mu = sub(tape, log_a, mean(tape, log_a));
    auto inv_a = reciprocal(tape, alpha_vec);
    prior.var = add(tape, scale(tape, inv_a, 1.0 - 2.0 / k),
                    scale(tape, sum(tape, inv_a), 1.0 / (k * k)));
    return prior;
}

TensorPtr TopicModel::kl_divergence(Tape& tape, const Posterior& post, const Prior& prior) const {
    auto var = exp_op(tape, post.logvar);
    auto trace = sum(tape, div(tape, var, prior.var));
    auto diff = sub(tape, prior.mu, post.mu);
    auto quad = sum(tape, div(tape, mul(tape, diff, diff), prior.var));
    auto log_det = sub(tape, sum(tape, log_op(tape, prior.var)), sum(tape, post.logvar));
    auto kl = add(tape, add(tape, trace, quad), log_det);
    return scale(tape, add_const(tape, kl, -static_cast<double>(topics_)), 0.5);
}

TensorPtr TopicModel::loss(Tape& tape, const std::vector<BagOfWords>& batch,
                           const std::vector<std::vector<double>>& eps_noise) const {
    if (batch.empty()) throw std::invalid_argument("topic loss: empty batch");
    if (eps_noise.size() != batch.size())
        throw std::invalid_argument("topic loss: need one noise vector per document");

    auto prior = laplace_prior(tape);
    auto word_scores = sigmoid(tape, beta);  // [K, V]

    std::vector<TensorPtr> per_doc;
    per_doc.reserve(batch.size());
    for (size_t d = 0; d < batch.size(); ++d) {
        const auto& doc = batch[d];
        auto post = encode(tape, doc);
        auto theta = sample_theta(tape, post, eps_noise[d]);

        // mixture over words, normalized so the log term is a log-likelihood
        auto mix = matmul(tape, reshape(tape, theta, {1, topics_}), word_scores);
        auto mix_v = reshape(tape, mix, {vocab_size_});
        auto probs = div(tape, mix_v, sum(tape, mix_v));

        std::vector<double> counts(static_cast<size_t>(vocab_size_), 0.0);
        for (const auto& [idx, count] : doc.counts) counts[static_cast<size_t>(idx)] = count;
        auto w = make_tensor({vocab_size_}, std::move(counts));
        auto recon = dot(tape, w, log_op(tape, add_const(tape, probs, 1e-10)));

        auto kl = kl_divergence(tape, post, prior);
        per_doc.push_back(sub(tape, kl, recon));
    }
    return mean(tape, concat(tape, per_doc));
}

void TopicModel::export_top_words(const Vocabulary& vocab, int top_n, const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write topics file: " + path);
    for (int k = 0; k < topics_; ++k) {
        std::vector<int> order(static_cast<size_t>(vocab_size_));
        for (int i = 0; i < vocab_size_; ++i) order[static_cast<size_t>(i)] = i;
        std::partial_sort(order.begin(), order.begin() + std::min(top_n, vocab_size_),
                          order.end(), [&](int a, int b) {
                              return beta->value[k * vocab_size_ + a] >
                                     beta->value[k * vocab_size_ + b];
                          });
        out << k;
        for (int i = 0; i < std::min(top_n, vocab_size_); ++i)
            out << "\t" << vocab.token_at(order[static_cast<size_t>(i)]);
        out << "\n";
    }
}

}  // namespace peg
