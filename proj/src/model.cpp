#include "peg/model.hpp"

#include <cmath>
#include <stdexcept>

namespace peg {

using namespace ad;

PegModel::PegModel(const TrainConfig& cfg, int vocab_size, std::mt19937_64& init_rng)
    : cfg_(cfg), variant_(parse_variant(cfg.variant)) {
    topic_ = std::make_unique<TopicModel>(vocab_size, cfg.topics, cfg.d_phi, cfg.encoder_hidden,
                                          cfg.phi_prior_std, params_, init_rng);
    pref_ = std::make_unique<PreferenceEncoder>(cfg, variant_, params_, init_rng);
    for (int l = 0; l < cfg.gnn_layers; ++l)
        gnn_layers_.push_back(GnnLayerParams::create("gnn.l" + std::to_string(l), cfg.d_gnn,
                                                     cfg.topics, params_, init_rng));
    const double stddev = std::sqrt(2.0 / (cfg.topics + vocab_size));
    text_proj_ = params_.add("pref.text_proj", randn_tensor({cfg.topics, vocab_size}, init_rng,
                                                            stddev));
    text_idf_ = params_.add("pref.text_idf",
                            make_tensor({vocab_size}, std::vector<double>(
                                                          static_cast<size_t>(vocab_size), 1.0)));
}

void PegModel::set_idf_from_corpus(const std::vector<BagOfWords>& corpus) {
    const int v = text_idf_->size();
    std::vector<int> df(static_cast<size_t>(v), 0);
    for (const auto& doc : corpus)
        for (const auto& [idx, _] : doc.counts)
            if (idx >= 0 && idx < v) ++df[static_cast<size_t>(idx)];
    const double n = std::max<size_t>(1, corpus.size());
    for (int i = 0; i < v; ++i)
        text_idf_->value[static_cast<size_t>(i)] =
            std::log(n / (1.0 + df[static_cast<size_t>(i)])) + 1.0;
}

TensorPtr PegModel::text_repr(Tape& tape, const BagOfWords& doc) const {
    if (variant_.use_topic_model) return topic_->infer_theta(tape, doc);
    const int v = text_idf_->size();
    if (doc.empty())
        return make_tensor({cfg_.topics},
                           std::vector<double>(static_cast<size_t>(cfg_.topics), 0.5));
    std::vector<double> x(static_cast<size_t>(v), 0.0);
    const double total = doc.total();
    for (const auto& [idx, count] : doc.counts)
        x[static_cast<size_t>(idx)] =
            (count / total) * text_idf_->value[static_cast<size_t>(idx)];
    auto input = make_tensor({v}, std::move(x));
    return sigmoid(tape, matvec(tape, text_proj_, input));
}

TensorPtr PegModel::user_embedding(Tape& tape, const std::vector<BagOfWords>& history) const {
    std::vector<TensorPtr> thetas;
    if (variant_.use_preference) {
        thetas.reserve(history.size());
        for (const auto& doc : history)
            if (!doc.empty()) thetas.push_back(text_repr(tape, doc));
    }
    return pref_->embed(tape, thetas);
}

TensorPtr PegModel::predict_cascade(Tape& tape, const LocalGraph& graph,
                                    const std::vector<bool>& is_seed,
                                    const std::vector<TensorPtr>& node_embeddings,
                                    const TensorPtr& theta) const {
    auto initial = init_states(node_embeddings, is_seed);
    auto final_state =
        propagate(tape, graph, initial, is_seed, gnn_layers_, theta, cfg_.d_gnn);
    return predict_size(tape, final_state);
}

TensorPtr mrse_loss(Tape& tape, const std::vector<TensorPtr>& predictions,
                    const std::vector<double>& truths) {
    if (predictions.empty() || predictions.size() != truths.size())
        throw std::invalid_argument("mrse_loss: length mismatch or empty batch");
    std::vector<TensorPtr> terms;
    terms.reserve(predictions.size());
    for (size_t i = 0; i < predictions.size(); ++i) {
        if (truths[i] <= 0.0)
            throw std::invalid_argument("mrse_loss: true size must be positive");
        auto rel = scale(tape, add_const(tape, predictions[i], -truths[i]), 1.0 / truths[i]);
        terms.push_back(mul(tape, rel, rel));
    }
    return mean(tape, concat(tape, terms));
}

}  // namespace peg
