#pragma once

#include <string>
#include <vector>

#include "peg/metrics.hpp"
#include "peg/model.hpp"
#include "peg/synth.hpp"

namespace peg {

// Bias-corrected Adam over the parameter store, in insertion order.
struct AdamState {
    std::vector<std::vector<double>> m, v;
    long step = 0;

    void init(const ad::ParamStore& params);
};

// One update from the accumulated gradients. Aborts naming the parameter on a
// NaN gradient.
void adam_step(ad::ParamStore& params, AdamState& state, const TrainConfig& cfg);

double global_grad_norm(const ad::ParamStore& params);
void clip_gradients(ad::ParamStore& params, double max_norm);

struct SplitIndices {
    std::vector<int> train, val, test;
};

// Pure function of (cascade id, seed): an FNV-1a hash maps each id into [0,1)
// and the split fractions partition that interval.
SplitIndices split_cascades(const std::vector<CascadeInstance>& cascades,
                            const TrainConfig& cfg);

struct TrainOutput {
    std::vector<double> train_loss;  // per epoch, joint loss
    std::vector<double> val_mrse;    // per epoch
    int best_epoch = -1;
    int epochs_run = 0;
};

// Owns the vocabulary, model, and per-user history bags for one dataset.
class Trainer {
public:
    Trainer(const TrainConfig& cfg, const Dataset& data);

    // Trains with early stopping on validation MRSE and restores the best
    // parameters. Appends "epoch,train_loss,val_mrse" rows to metrics_csv
    // when nonempty.
    TrainOutput run(const std::string& metrics_csv = "");

    // Full-graph predictions for the given cascade indices.
    std::vector<PredictionPair> predict(const std::vector<int>& cascade_indices);
    std::vector<PredictionPair> predict_all();

    PegModel& model() { return *model_; }
    const Vocabulary& vocab() const { return vocab_; }
    const SplitIndices& splits() const { return splits_; }
    const Dataset& data() const { return *data_; }

    // Joint loss on an explicit batch of train-split positions, as used by one
    // training step; exposed for the additivity and gradcheck fixtures.
    ad::TensorPtr batch_loss(ad::Tape& tape, const std::vector<int>& cascade_indices,
                             std::mt19937_64& rng, double lambda_override = -1.0);

private:
    struct PerUserHistory {
        std::vector<BagOfWords> docs;
    };

    double train_epoch(std::mt19937_64& rng, AdamState& adam);
    double validation_mrse();
    std::vector<ad::TensorPtr> embeddings_for(ad::Tape& tape, const std::vector<int>& users);

    TrainConfig cfg_;
    const Dataset* data_;
    Vocabulary vocab_;
    std::vector<PerUserHistory> user_history_;  // by graph index
    std::vector<BagOfWords> cascade_bow_;
    std::vector<std::vector<int>> cascade_seed_ids_;
    SplitIndices splits_;
    std::unique_ptr<PegModel> model_;
};

}  // namespace peg
