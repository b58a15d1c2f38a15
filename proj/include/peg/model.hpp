#pragma once

#include <memory>
#include <random>

#include "peg/config.hpp"
#include "peg/gnn.hpp"
#include "peg/preference.hpp"
#include "peg/topic_model.hpp"

namespace peg {

// Full cascade-size model: text representation, preference embedding, and the
// gated influence GNN, sharing one parameter store.
class PegModel {
public:
    PegModel(const TrainConfig& cfg, int vocab_size, std::mt19937_64& init_rng);

    const TrainConfig& config() const { return cfg_; }
    const VariantFlags& variant() const { return variant_; }
    ad::ParamStore& params() { return params_; }
    const ad::ParamStore& params() const { return params_; }
    TopicModel& topic() { return *topic_; }
    const TopicModel& topic() const { return *topic_; }
    PreferenceEncoder& preference() { return *pref_; }
    const std::vector<GnnLayerParams>& gnn_layers() const { return gnn_layers_; }

    // Document-frequency statistics for the tf-idf text path (peg-t). Stored
    // as a non-learning parameter so checkpoints carry it.
    void set_idf_from_corpus(const std::vector<BagOfWords>& corpus);

    // K-dim text representation: deterministic topic inference, or the
    // sigmoid-squashed tf-idf projection when the topic module is ablated.
    ad::TensorPtr text_repr(ad::Tape& tape, const BagOfWords& doc) const;

    // Preference embedding from the user's history bag-of-words, honoring the
    // variant flags (fallback vectors when history is empty or ablated).
    ad::TensorPtr user_embedding(ad::Tape& tape, const std::vector<BagOfWords>& history) const;

    // Propagate one cascade and return the predicted size tensor.
    ad::TensorPtr predict_cascade(ad::Tape& tape, const LocalGraph& graph,
                                  const std::vector<bool>& is_seed,
                                  const std::vector<ad::TensorPtr>& node_embeddings,
                                  const ad::TensorPtr& theta) const;

private:
    TrainConfig cfg_;
    VariantFlags variant_;
    ad::ParamStore params_;
    std::unique_ptr<TopicModel> topic_;
    std::unique_ptr<PreferenceEncoder> pref_;
    std::vector<GnnLayerParams> gnn_layers_;
    ad::TensorPtr text_proj_;  // [K, V]
    ad::TensorPtr text_idf_;   // [V], values only, never receives gradient
};

// MRSE over prediction tensors against positive ground-truth sizes.
ad::TensorPtr mrse_loss(ad::Tape& tape, const std::vector<ad::TensorPtr>& predictions,
                        const std::vector<double>& truths);

}  // namespace peg
