#include "peg/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace peg {

VariantFlags parse_variant(const std::string& name) {
    VariantFlags v;
    if (name == "peg" || name == "pegl") {
        // defaults
    } else if (name == "pega") {
        v.long_term = LongTermMode::asvd;
    } else if (name == "peg-t") {
        v.use_topic_model = false;
    } else if (name == "peg-s") {
        v.use_short_term = false;
    } else if (name == "peg-l") {
        v.use_long_term = false;
    } else if (name == "peg-d") {
        v.use_preference = false;
    } else {
        throw std::invalid_argument("unknown variant: " + name +
                                    " (expected peg|pega|peg-t|peg-s|peg-l|peg-d)");
    }
    return v;
}

std::string variant_name(const VariantFlags& v) {
    if (!v.use_preference) return "peg-d";
    if (!v.use_topic_model) return "peg-t";
    if (!v.use_short_term) return "peg-s";
    if (!v.use_long_term) return "peg-l";
    return v.long_term == LongTermMode::asvd ? "pega" : "peg";
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

void parse_kv_file(const std::string& path,
                   const std::function<void(const std::string&, const std::string&)>& apply) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value, got '" + line + "'");
        apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

}  // namespace

void apply_config_entry(TrainConfig& cfg, const std::string& key, const std::string& value) {
    auto as_int = [&] { return std::stoi(value); };
    auto as_double = [&] { return std::stod(value); };
    if (key == "topics") cfg.topics = as_int();
    else if (key == "d_phi") cfg.d_phi = as_int();
    else if (key == "d_long") cfg.d_long = as_int();
    else if (key == "d_short") cfg.d_short = as_int();
    else if (key == "d_gnn") cfg.d_gnn = as_int();
    else if (key == "gnn_layers") cfg.gnn_layers = as_int();
    else if (key == "short_window") cfg.short_window = as_int();
    else if (key == "encoder_hidden") cfg.encoder_hidden = as_int();
    else if (key == "phi_prior_std") cfg.phi_prior_std = as_double();
    else if (key == "lambda") cfg.lambda = as_double();
    else if (key == "batch_size") cfg.batch_size = as_int();
    else if (key == "learning_rate") cfg.learning_rate = as_double();
    else if (key == "adam_beta1") cfg.adam_beta1 = as_double();
    else if (key == "adam_beta2") cfg.adam_beta2 = as_double();
    else if (key == "adam_eps") cfg.adam_eps = as_double();
    else if (key == "epochs") cfg.epochs = as_int();
    else if (key == "grad_clip") cfg.grad_clip = as_double();
    else if (key == "patience") cfg.patience = as_int();
    else if (key == "history_texts_per_user") cfg.history_texts_per_user = as_int();
    else if (key == "lr_grid") cfg.lr_grid = (value == "true" || value == "1");
    else if (key == "neighbor_cap") cfg.neighbor_cap = as_int();
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "train_frac") cfg.train_frac = as_double();
    else if (key == "val_frac") cfg.val_frac = as_double();
    else if (key == "test_frac") cfg.test_frac = as_double();
    else if (key == "min_count") cfg.min_count = as_int();
    else if (key == "observation_window") cfg.observation_window = std::stoll(value);
    else if (key == "variant") cfg.variant = value;
    else throw std::runtime_error("unknown config key: " + key);
}

TrainConfig load_train_config(const std::string& path) {
    TrainConfig cfg;
    parse_kv_file(path, [&](const std::string& k, const std::string& v) {
        apply_config_entry(cfg, k, v);
    });
    const double total = cfg.train_frac + cfg.val_frac + cfg.test_frac;
    if (std::abs(total - 1.0) > 1e-9)
        throw std::runtime_error("split fractions must sum to 1, got " + std::to_string(total));
    parse_variant(cfg.variant);  // validate
    return cfg;
}

void save_train_config(const TrainConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out.precision(17);
    out << "topics=" << cfg.topics << "\n"
        << "d_phi=" << cfg.d_phi << "\n"
        << "d_long=" << cfg.d_long << "\n"
        << "d_short=" << cfg.d_short << "\n"
        << "d_gnn=" << cfg.d_gnn << "\n"
        << "gnn_layers=" << cfg.gnn_layers << "\n"
        << "short_window=" << cfg.short_window << "\n"
        << "encoder_hidden=" << cfg.encoder_hidden << "\n"
        << "phi_prior_std=" << cfg.phi_prior_std << "\n"
        << "lambda=" << cfg.lambda << "\n"
        << "batch_size=" << cfg.batch_size << "\n"
        << "learning_rate=" << cfg.learning_rate << "\n"
        << "adam_beta1=" << cfg.adam_beta1 << "\n"
        << "adam_beta2=" << cfg.adam_beta2 << "\n"
        << "adam_eps=" << cfg.adam_eps << "\n"
        << "epochs=" << cfg.epochs << "\n"
        << "grad_clip=" << cfg.grad_clip << "\n"
        << "patience=" << cfg.patience << "\n"
        << "history_texts_per_user=" << cfg.history_texts_per_user << "\n"
        << "lr_grid=" << (cfg.lr_grid ? "true" : "false") << "\n"
        << "neighbor_cap=" << cfg.neighbor_cap << "\n"
        << "seed=" << cfg.seed << "\n"
        << "train_frac=" << cfg.train_frac << "\n"
        << "val_frac=" << cfg.val_frac << "\n"
        << "test_frac=" << cfg.test_frac << "\n"
        << "min_count=" << cfg.min_count << "\n"
        << "observation_window=" << cfg.observation_window << "\n"
        << "variant=" << cfg.variant << "\n";
}

void apply_synth_entry(SynthConfig& cfg, const std::string& key, const std::string& value) {
    auto as_int = [&] { return std::stoi(value); };
    auto as_double = [&] { return std::stod(value); };
    if (key == "n_users") cfg.n_users = as_int();
    else if (key == "mean_degree") cfg.mean_degree = as_int();
    else if (key == "topics_true") cfg.topics_true = as_int();
    else if (key == "vocab_size") cfg.vocab_size = as_int();
    else if (key == "history_min") cfg.history_min = as_int();
    else if (key == "history_max") cfg.history_max = as_int();
    else if (key == "tokens_per_text") cfg.tokens_per_text = as_int();
    else if (key == "cascades") cfg.cascades = as_int();
    else if (key == "seeds_min") cfg.seeds_min = as_int();
    else if (key == "seeds_max") cfg.seeds_max = as_int();
    else if (key == "max_rounds") cfg.max_rounds = as_int();
    else if (key == "p0") cfg.p0 = as_double();
    else if (key == "gamma") cfg.gamma = as_double();
    else if (key == "drift_frac") cfg.drift_frac = as_double();
    else if (key == "window_frac") cfg.window_frac = as_double();
    else if (key == "seed") cfg.seed = std::stoull(value);
    else throw std::runtime_error("unknown synth config key: " + key);
}

SynthConfig load_synth_config(const std::string& path) {
    SynthConfig cfg;
    parse_kv_file(path, [&](const std::string& k, const std::string& v) {
        apply_synth_entry(cfg, k, v);
    });
    if (cfg.p0 < 0 || cfg.p0 > 1 || cfg.p0 * (1 + cfg.gamma) > 1.0 + 1e-12)
        throw std::runtime_error("p0 and p0*(1+gamma) must lie in [0,1]");
    return cfg;
}

}  // namespace peg
