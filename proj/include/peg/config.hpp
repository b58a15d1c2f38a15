#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace peg {

enum class LongTermMode { bilstm, asvd };

// Model ablation variants. peg == PEGL (Bi-LSTM long term) is the default.
struct VariantFlags {
    LongTermMode long_term = LongTermMode::bilstm;
    bool use_topic_model = true;   // off: tf-idf counts projected to K dims
    bool use_long_term = true;
    bool use_short_term = true;
    bool use_preference = true;    // off: shared fallback vectors for everyone
};

VariantFlags parse_variant(const std::string& name);  // peg|pega|peg-t|peg-s|peg-l|peg-d
std::string variant_name(const VariantFlags& v);

struct TrainConfig {
    // model dims
    int topics = 4;              // K
    int d_phi = 32;
    int d_long = 32;             // d_L
    int d_short = 32;            // d_S
    int d_gnn = 64;              // d_g, all layers
    int gnn_layers = 2;          // L
    int short_window = 10;       // tau
    int encoder_hidden = 100;
    double phi_prior_std = 1.0;  // epsilon of the topic-state prior

    // optimization
    double lambda = 0.1;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int epochs = 30;
    double grad_clip = 5.0;
    int patience = 10;
    int history_texts_per_user = 4;
    bool lr_grid = false;        // sweep {1e-2, 1e-3, 1e-4} and keep the best val run

    // data handling
    int neighbor_cap = 25;
    std::uint64_t seed = 1;
    double train_frac = 0.70;
    double val_frac = 0.10;
    double test_frac = 0.20;
    int min_count = 1;
    std::int64_t observation_window = 120;  // seconds

    std::string variant = "peg";
};

// key=value file, '#' comments, blank lines ignored. Unknown keys rejected.
TrainConfig load_train_config(const std::string& path);
void save_train_config(const TrainConfig& cfg, const std::string& path);
void apply_config_entry(TrainConfig& cfg, const std::string& key, const std::string& value);

struct SynthConfig {
    int n_users = 200;
    int mean_degree = 6;
    int topics_true = 4;         // planted topics
    int vocab_size = 120;
    int history_min = 6;
    int history_max = 14;
    int tokens_per_text = 10;
    int cascades = 300;
    int seeds_min = 1;
    int seeds_max = 3;
    int max_rounds = 8;
    double p0 = 0.05;            // base adoption probability
    double gamma = 4.0;          // preference boost
    double drift_frac = 0.3;     // tail share of history drawn after the drift point
    double window_frac = 0.25;   // share of rounds flagged as the observed window
    std::uint64_t seed = 1;
};

SynthConfig load_synth_config(const std::string& path);
void apply_synth_entry(SynthConfig& cfg, const std::string& key, const std::string& value);

}  // namespace peg
