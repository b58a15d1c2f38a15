#pragma once

#include <random>
#include <vector>

#include "peg/ops.hpp"
#include "peg/params.hpp"
#include "peg/vocab.hpp"

namespace peg {

// LDA-VAE topic module: amortized encoder over bag-of-words counts, sigmoid
// reparameterized topic vector, and a logistic-normal Laplace prior derived
// from the learned topic state vectors.
class TopicModel {
public:
    struct Posterior {
        ad::TensorPtr mu;      // [K]
        ad::TensorPtr logvar;  // [K], diagonal log-variances
    };
    struct Prior {
        ad::TensorPtr mu;   // [K]
        ad::TensorPtr var;  // [K], positive diagonal
    };

    TopicModel(int vocab_size, int topics, int d_phi, int hidden, double prior_std,
               ad::ParamStore& params, std::mt19937_64& init_rng);

    int topics() const { return topics_; }
    int vocab_size() const { return vocab_size_; }

    // Two-head encoder over the L1-normalized count vector. Rejects empty docs.
    Posterior encode(ad::Tape& tape, const BagOfWords& doc) const;

    // theta = sigmoid(mu + eps_noise * exp(logvar/2)). Empty noise means zeros.
    ad::TensorPtr sample_theta(ad::Tape& tape, const Posterior& post,
                               const std::vector<double>& eps_noise) const;

    // Deterministic theta (noise forced to 0). Empty documents yield the
    // all-0.5 fallback vector; `used_fallback` reports it when non-null.
    ad::TensorPtr infer_theta(ad::Tape& tape, const BagOfWords& doc,
                              bool* used_fallback = nullptr) const;

    // alpha_k = sigmoid(phi_k . w_alpha + b_alpha), then the closed-form
    // logistic-normal surrogate of the Dirichlet prior.
    Prior laplace_prior(ad::Tape& tape) const;
    Prior prior_from_alpha(ad::Tape& tape, const ad::TensorPtr& alpha_vec) const;
    ad::TensorPtr alpha(ad::Tape& tape) const;

    // Mean over the batch of [-reconstruction + KL]. One noise vector of
    // length K per document; pass empty vectors to freeze the noise at zero.
    ad::TensorPtr loss(ad::Tape& tape, const std::vector<BagOfWords>& batch,
                       const std::vector<std::vector<double>>& eps_noise) const;

    // KL(N(mu, diag(exp(logvar))) || N(prior_mu, diag(prior_var))), includes
    // the -K constant so KL == 0 exactly at equality.
    ad::TensorPtr kl_divergence(ad::Tape& tape, const Posterior& post, const Prior& prior) const;

    void export_top_words(const Vocabulary& vocab, int top_n, const std::string& path) const;

    // parameter handles
    ad::TensorPtr phi, w_alpha, b_alpha, beta;
    ad::TensorPtr enc_w1, enc_b1, enc_mu_w, enc_mu_b, enc_lv_w, enc_lv_b;

private:
    int vocab_size_;
    int topics_;
    int hidden_;
};

}  // namespace peg
