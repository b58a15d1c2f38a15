#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "peg/checkpoint.hpp"
#include "peg/opchecks.hpp"
#include "peg/train.hpp"

namespace {

using namespace peg;

struct CommonFlags {
    std::string config;
    std::string data_dir;
    std::string variant;
    std::int64_t seed = -1;
    std::int64_t observation_window = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_data = true) {
    cmd->add_option("--config", f.config, "key=value config file");
    if (with_data)
        cmd->add_option("--data-dir", f.data_dir, "dataset directory")->required();
    cmd->add_option("--variant", f.variant, "peg|pega|peg-t|peg-s|peg-l|peg-d");
    cmd->add_option("--seed", f.seed, "random seed override");
    cmd->add_option("--observation-window", f.observation_window,
                    "seed window in seconds from the first adoption");
}

TrainConfig resolve_config(const CommonFlags& f) {
    TrainConfig cfg = f.config.empty() ? TrainConfig{} : load_train_config(f.config);
    if (!f.variant.empty()) {
        parse_variant(f.variant);  // validates the name
        cfg.variant = f.variant;
    }
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    if (f.observation_window >= 0) cfg.observation_window = f.observation_window;
    return cfg;
}

void write_predictions_csv(const std::string& path, const std::vector<std::string>& ids,
                           const std::vector<PredictionPair>& pairs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write predictions: " + path);
    out.precision(12);
    out << "cascade_id,predicted_size,true_size\n";
    for (size_t i = 0; i < pairs.size(); ++i)
        out << ids[i] << "," << pairs[i].predicted << "," << pairs[i].truth << "\n";
}

std::vector<PredictionPair> read_predictions_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open predictions: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("cascade_id,", 0) != 0)
        throw std::runtime_error("predictions file missing header: " + path);
    std::vector<PredictionPair> pairs;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
        pairs.push_back({std::stod(line.substr(c1 + 1, c2 - c1 - 1)),
                         std::stod(line.substr(c2 + 1))});
    }
    return pairs;
}

const std::vector<int>& split_of(const Trainer& trainer, const std::string& name,
                                 std::vector<int>& all_storage) {
    if (name == "train") return trainer.splits().train;
    if (name == "val") return trainer.splits().val;
    if (name == "test") return trainer.splits().test;
    if (name == "all") {
        all_storage.resize(trainer.data().cascades.size());
        for (size_t i = 0; i < all_storage.size(); ++i) all_storage[i] = static_cast<int>(i);
        return all_storage;
    }
    throw std::runtime_error("unknown split: " + name);
}

int cmd_generate(const CommonFlags& f, const std::string& out_dir) {
    SynthConfig cfg = f.config.empty() ? SynthConfig{} : load_synth_config(f.config);
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    auto data = generate(cfg);
    write_dataset(data, out_dir);
    std::cout << "wrote " << out_dir << ": " << data.graph.num_users() << " users, "
              << data.graph.num_edges() << " edges, " << data.cascades.size() << " cascades ("
              << data.degenerate_cascades << " seed-only)\n";
    return 0;
}

int cmd_train(const CommonFlags& f, const std::string& out_path) {
    const TrainConfig cfg = resolve_config(f);
    const Dataset data = load_dataset(f.data_dir);
    Trainer trainer(cfg, data);
    auto result = trainer.run(out_path + ".metrics.csv");
    save_checkpoint(out_path, cfg, trainer.model().params());
    trainer.vocab().save_tsv(out_path + ".vocab.tsv");
    std::cout << "trained " << result.epochs_run << " epochs, best epoch " << result.best_epoch
              << ", val MRSE " << result.val_mrse[static_cast<size_t>(result.best_epoch)]
              << "\nwrote " << out_path << "\n";
    return 0;
}

// Rebuilds the trainer from the checkpoint's config (CLI overrides win) and
// restores the stored parameters.
Trainer restored_trainer(const CommonFlags& f, const std::string& ckpt, const Dataset& data) {
    TrainConfig cfg = peek_checkpoint_config(ckpt);
    if (!f.variant.empty()) {
        parse_variant(f.variant);
        cfg.variant = f.variant;
    }
    if (f.observation_window >= 0) cfg.observation_window = f.observation_window;
    Trainer trainer(cfg, data);
    load_checkpoint(ckpt, trainer.model().params());
    return trainer;
}

int cmd_predict(const CommonFlags& f, const std::string& ckpt, const std::string& out_path,
                const std::string& split) {
    const Dataset data = load_dataset(f.data_dir);
    Trainer trainer = restored_trainer(f, ckpt, data);
    std::vector<int> all;
    const auto& indices = split_of(trainer, split, all);
    auto pairs = trainer.predict(indices);
    std::vector<std::string> ids;
    for (int i : indices) ids.push_back(data.cascades[static_cast<size_t>(i)].id);
    write_predictions_csv(out_path, ids, pairs);
    std::cout << "wrote " << pairs.size() << " predictions to " << out_path << "\n";
    return 0;
}

int cmd_evaluate(const CommonFlags& f, const std::string& ckpt, const std::string& predictions,
                 const std::string& out_path, const std::string& split) {
    std::vector<PredictionPair> pairs;
    if (!predictions.empty()) {
        pairs = read_predictions_csv(predictions);
    } else {
        if (f.data_dir.empty() || ckpt.empty())
            throw std::runtime_error("evaluate needs --predictions, or --data-dir with --checkpoint");
        const Dataset data = load_dataset(f.data_dir);
        Trainer trainer = restored_trainer(f, ckpt, data);
        std::vector<int> all;
        pairs = trainer.predict(split_of(trainer, split, all));
    }
    const auto report = compute_metrics(pairs);
    std::cout << report.to_text();
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write metrics: " + out_path);
        out << report.to_json() << "\n";
    }
    return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
    auto checks = run_primitive_gradchecks(seed);
    auto composite = run_composite_gradchecks(seed);
    checks.insert(checks.end(), composite.begin(), composite.end());
    bool all_pass = true;
    std::cout << std::left << std::setw(20) << "op" << std::setw(8) << "status"
              << "max rel err\n";
    for (const auto& c : checks) {
        all_pass = all_pass && c.report.pass;
        std::cout << std::setw(20) << c.name << std::setw(8)
                  << (c.report.pass ? "pass" : "FAIL") << std::scientific
                  << std::setprecision(3) << c.report.max_rel_err;
        if (!c.report.pass)
            std::cout << "  worst " << c.report.worst_leaf << "[" << c.report.worst_coord
                      << "] analytic " << c.report.analytic << " numeric " << c.report.numeric;
        std::cout << "\n" << std::defaultfloat;
    }
    std::cout << (all_pass ? "all checks passed\n" : "FAILURES detected\n");
    return all_pass ? 0 : 1;
}

int cmd_sweep(const CommonFlags& f, const std::string& out_path) {
    const TrainConfig base = resolve_config(f);
    const Dataset data = load_dataset(f.data_dir);
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write sweep results: " + out_path);
    out.precision(12);
    out << "topics,gnn_layers,short_window,epochs_run,best_epoch,val_mrse,test_mrse\n";
    for (int topics : {2, 4, 8}) {
        for (int layers : {1, 2, 3}) {
            for (int window : {5, 10, 15}) {
                TrainConfig cfg = base;
                cfg.topics = topics;
                cfg.gnn_layers = layers;
                cfg.short_window = window;
                Trainer trainer(cfg, data);
                auto result = trainer.run();
                auto test_pairs = trainer.predict(trainer.splits().test);
                const double test_mrse = compute_metrics(test_pairs).mrse;
                const double val =
                    result.val_mrse[static_cast<size_t>(result.best_epoch)];
                out << topics << "," << layers << "," << window << "," << result.epochs_run
                    << "," << result.best_epoch << "," << val << "," << test_mrse << "\n";
                std::cout << "K=" << topics << " L=" << layers << " tau=" << window
                          << " val=" << val << " test=" << test_mrse << "\n";
            }
        }
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cascade size prediction with preference-aware influence propagation"};
    app.require_subcommand(1);

    CommonFlags gen_f, train_f, pred_f, eval_f, sweep_f;
    std::string gen_out, train_out = "peg.ckpt", pred_ckpt, pred_out, pred_split = "test";
    std::string eval_ckpt, eval_preds, eval_out, eval_split = "test", sweep_out;
    std::int64_t gc_seed = 1;

    auto* generate_cmd = app.add_subcommand("generate", "write a synthetic dataset");
    add_common(generate_cmd, gen_f, false);
    generate_cmd->add_option("--out", gen_out, "output directory")->required();

    auto* train_cmd = app.add_subcommand("train", "train a model and save a checkpoint");
    add_common(train_cmd, train_f);
    train_cmd->add_option("--out", train_out, "checkpoint path");

    auto* predict_cmd = app.add_subcommand("predict", "write a prediction CSV");
    add_common(predict_cmd, pred_f);
    predict_cmd->add_option("--checkpoint", pred_ckpt, "trained checkpoint")->required();
    predict_cmd->add_option("--out", pred_out, "output CSV path")->required();
    predict_cmd->add_option("--split", pred_split, "train|val|test|all");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "compute metrics");
    evaluate_cmd->add_option("--config", eval_f.config, "key=value config file");
    evaluate_cmd->add_option("--data-dir", eval_f.data_dir, "dataset directory");
    evaluate_cmd->add_option("--variant", eval_f.variant, "variant override");
    evaluate_cmd->add_option("--observation-window", eval_f.observation_window,
                             "seed window in seconds");
    evaluate_cmd->add_option("--checkpoint", eval_ckpt, "trained checkpoint");
    evaluate_cmd->add_option("--predictions", eval_preds, "prediction CSV to score");
    evaluate_cmd->add_option("--out", eval_out, "metrics JSON path");
    evaluate_cmd->add_option("--split", eval_split, "train|val|test|all");

    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference check all ops");
    gradcheck_cmd->add_option("--seed", gc_seed, "random seed");

    auto* sweep_cmd = app.add_subcommand("sweep", "train over the K/L/tau grid");
    add_common(sweep_cmd, sweep_f);
    sweep_cmd->add_option("--out", sweep_out, "results CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate_cmd->parsed()) return cmd_generate(gen_f, gen_out);
        if (train_cmd->parsed()) return cmd_train(train_f, train_out);
        if (predict_cmd->parsed()) return cmd_predict(pred_f, pred_ckpt, pred_out, pred_split);
        if (evaluate_cmd->parsed())
            return cmd_evaluate(eval_f, eval_ckpt, eval_preds, eval_out, eval_split);
        if (gradcheck_cmd->parsed())
            return cmd_gradcheck(static_cast<std::uint64_t>(gc_seed));
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_f, sweep_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
