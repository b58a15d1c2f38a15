#include "peg/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace peg {

using namespace ad;

void AdamState::init(const ParamStore& params) {
    m.clear();
    v.clear();
    for (const auto& [_, t] : params.entries()) {
        m.emplace_back(t->value.size(), 0.0);
        v.emplace_back(t->value.size(), 0.0);
    }
    step = 0;
}

void adam_step(ParamStore& params, AdamState& state, const TrainConfig& cfg) {
    const auto& entries = params.entries();
    if (state.m.size() != entries.size()) throw std::logic_error("adam state not initialized");
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.step));
    for (size_t p = 0; p < entries.size(); ++p) {
        const auto& [name, t] = entries[p];
        auto& m = state.m[p];
        auto& v = state.v[p];
        for (size_t i = 0; i < t->value.size(); ++i) {
            const double g = t->grad[i];
            if (std::isnan(g))
                throw std::runtime_error("NaN gradient in parameter " + name);
            m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g;
            v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g * g;
            t->value[i] -=
                cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps);
        }
    }
}

double global_grad_norm(const ParamStore& params) {
    double acc = 0.0;
    for (const auto& [_, t] : params.entries())
        for (double g : t->grad) acc += g * g;
    return std::sqrt(acc);
}

void clip_gradients(ParamStore& params, double max_norm) {
    const double norm = global_grad_norm(params);
    if (norm <= max_norm || norm == 0.0) return;
    const double factor = max_norm / norm;
    for (const auto& [_, t] : params.entries())
        for (double& g : const_cast<std::vector<double>&>(t->grad)) g *= factor;
}

namespace {

std::uint64_t fnv1a(const std::string& s, std::uint64_t seed) {
    std::uint64_t h = 14695981039346656037ull ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    for (int i = 0; i < 8; ++i) {
        h ^= (seed >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

SplitIndices split_cascades(const std::vector<CascadeInstance>& cascades,
                            const TrainConfig& cfg) {
    SplitIndices split;
    for (size_t i = 0; i < cascades.size(); ++i) {
        const double u =
            static_cast<double>(fnv1a(cascades[i].id, cfg.seed)) / 18446744073709551616.0;
        if (u < cfg.train_frac)
            split.train.push_back(static_cast<int>(i));
        else if (u < cfg.train_frac + cfg.val_frac)
            split.val.push_back(static_cast<int>(i));
        else
            split.test.push_back(static_cast<int>(i));
    }
    return split;
}

Trainer::Trainer(const TrainConfig& cfg, const Dataset& data) : cfg_(cfg), data_(&data) {
    std::vector<Document> corpus;
    for (const auto& c : data.cascades) corpus.push_back({c.id, c.tokens});
    for (const auto& h : data.histories)
        for (const auto& item : h.items) corpus.push_back({item.id, item.tokens});
    vocab_ = Vocabulary::build(corpus, cfg.min_count);

    user_history_.resize(static_cast<size_t>(data.graph.num_users()));
    for (const auto& h : data.histories) {
        const int idx = data.graph.index_of(h.user);
        if (idx < 0) throw std::runtime_error("history references unknown user: " + h.user);
        for (const auto& item : h.items) {
            auto bow = vocab_.to_bow({item.id, item.tokens});
            if (!bow.empty()) user_history_[static_cast<size_t>(idx)].docs.push_back(std::move(bow));
        }
    }

    std::vector<BagOfWords> all_bows;
    for (const auto& c : data.cascades) {
        cascade_bow_.push_back(vocab_.to_bow({c.id, c.tokens}));
        all_bows.push_back(cascade_bow_.back());

        std::vector<int> seed_ids;
        for (const auto& name : c.seeds(cfg.observation_window)) {
            const int idx = data.graph.index_of(name);
            if (idx < 0) throw std::runtime_error("cascade '" + c.id +
                                                  "' seed not in graph: " + name);
            seed_ids.push_back(idx);
        }
        if (seed_ids.empty())
            throw std::runtime_error("cascade '" + c.id + "' has no observed adopters");
        cascade_seed_ids_.push_back(std::move(seed_ids));
    }
    for (const auto& u : user_history_)
        for (const auto& bow : u.docs) all_bows.push_back(bow);

    splits_ = split_cascades(data.cascades, cfg);

    std::mt19937_64 init_rng(cfg.seed);
    model_ = std::make_unique<PegModel>(cfg, vocab_.size(), init_rng);
    model_->set_idf_from_corpus(all_bows);
}

std::vector<TensorPtr> Trainer::embeddings_for(Tape& tape, const std::vector<int>& users) {
    std::vector<TensorPtr> out;
    out.reserve(users.size());
    for (int u : users)
        out.push_back(model_->user_embedding(tape, user_history_[static_cast<size_t>(u)].docs));
    return out;
}

TensorPtr Trainer::batch_loss(Tape& tape, const std::vector<int>& cascade_indices,
                              std::mt19937_64& rng, double lambda_override) {
    if (cascade_indices.empty()) throw std::invalid_argument("batch_loss: empty batch");
    const double lambda = lambda_override >= 0.0 ? lambda_override : cfg_.lambda;

    std::vector<Subgraph> subgraphs;
    subgraphs.reserve(cascade_indices.size());
    std::vector<int> involved;
    for (int ci : cascade_indices) {
        subgraphs.push_back(sample_local_subgraph(data_->graph,
                                                  cascade_seed_ids_[static_cast<size_t>(ci)],
                                                  cfg_.gnn_layers, cfg_.neighbor_cap, rng));
        for (int g : subgraphs.back().global_ids) involved.push_back(g);
    }
    std::sort(involved.begin(), involved.end());
    involved.erase(std::unique(involved.begin(), involved.end()), involved.end());

    std::vector<int> pos_of(static_cast<size_t>(data_->graph.num_users()), -1);
    for (size_t i = 0; i < involved.size(); ++i)
        pos_of[static_cast<size_t>(involved[i])] = static_cast<int>(i);
    auto embeddings = embeddings_for(tape, involved);

    std::vector<TensorPtr> predictions;
    std::vector<double> truths;
    for (size_t b = 0; b < cascade_indices.size(); ++b) {
        const int ci = cascade_indices[b];
        const auto& sub = subgraphs[b];
        std::vector<TensorPtr> node_emb;
        node_emb.reserve(sub.global_ids.size());
        for (int g : sub.global_ids)
            node_emb.push_back(embeddings[static_cast<size_t>(pos_of[static_cast<size_t>(g)])]);
        auto theta = model_->text_repr(tape, cascade_bow_[static_cast<size_t>(ci)]);
        predictions.push_back(
            model_->predict_cascade(tape, sub.local, sub.is_seed, node_emb, theta));
        truths.push_back(data_->cascades[static_cast<size_t>(ci)].final_size);
    }
    auto loss = mrse_loss(tape, predictions, truths);

    if (model_->variant().use_topic_model && lambda > 0.0) {
        std::vector<BagOfWords> topic_batch;
        for (int ci : cascade_indices)
            if (!cascade_bow_[static_cast<size_t>(ci)].empty())
                topic_batch.push_back(cascade_bow_[static_cast<size_t>(ci)]);
        for (int u : involved) {
            const auto& docs = user_history_[static_cast<size_t>(u)].docs;
            if (docs.empty()) continue;
            std::vector<int> order(docs.size());
            for (size_t i = 0; i < docs.size(); ++i) order[i] = static_cast<int>(i);
            std::shuffle(order.begin(), order.end(), rng);
            const int take = std::min<int>(cfg_.history_texts_per_user,
                                           static_cast<int>(docs.size()));
            for (int i = 0; i < take; ++i)
                topic_batch.push_back(docs[static_cast<size_t>(order[static_cast<size_t>(i)])]);
        }
        if (!topic_batch.empty()) {
            std::normal_distribution<double> noise(0.0, 1.0);
            std::vector<std::vector<double>> eps(topic_batch.size());
            for (auto& e : eps) {
                e.resize(static_cast<size_t>(cfg_.topics));
                for (auto& x : e) x = noise(rng);
            }
            loss = add(tape, loss, scale(tape, model_->topic().loss(tape, topic_batch, eps),
                                         lambda));
        }
    }
    return loss;
}

double Trainer::train_epoch(std::mt19937_64& rng, AdamState& adam) {
    std::vector<int> order = splits_.train;
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int count = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg_.batch_size)) {
        const size_t end = std::min(order.size(), start + static_cast<size_t>(cfg_.batch_size));
        std::vector<int> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                               order.begin() + static_cast<std::ptrdiff_t>(end));
        model_->params().zero_grad();
        Tape tape;
        auto loss = batch_loss(tape, batch, rng);
        tape.backward(loss);
        clip_gradients(model_->params(), cfg_.grad_clip);
        adam_step(model_->params(), adam, cfg_);
        loss_sum += loss->value[0] * static_cast<double>(batch.size());
        count += static_cast<int>(batch.size());
    }
    return loss_sum / count;
}

std::vector<PredictionPair> Trainer::predict(const std::vector<int>& cascade_indices) {
    Tape tape;
    std::vector<int> all_users(static_cast<size_t>(data_->graph.num_users()));
    for (int i = 0; i < data_->graph.num_users(); ++i) all_users[static_cast<size_t>(i)] = i;
    auto embeddings = embeddings_for(tape, all_users);
    const auto graph = full_local_graph(data_->graph);

    std::vector<PredictionPair> pairs;
    pairs.reserve(cascade_indices.size());
    for (int ci : cascade_indices) {
        std::vector<bool> is_seed(static_cast<size_t>(data_->graph.num_users()), false);
        for (int s : cascade_seed_ids_[static_cast<size_t>(ci)])
            is_seed[static_cast<size_t>(s)] = true;
        auto theta = model_->text_repr(tape, cascade_bow_[static_cast<size_t>(ci)]);
        auto pred = model_->predict_cascade(tape, graph, is_seed, embeddings, theta);
        pairs.push_back({pred->value[0],
                         static_cast<double>(data_->cascades[static_cast<size_t>(ci)].final_size)});
    }
    return pairs;
}

std::vector<PredictionPair> Trainer::predict_all() {
    std::vector<int> all(data_->cascades.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return predict(all);
}

double Trainer::validation_mrse() {
    const auto pairs = predict(splits_.val);
    std::vector<double> p, t;
    for (const auto& pr : pairs) {
        p.push_back(pr.predicted);
        t.push_back(pr.truth);
    }
    return mrse(p, t);
}

TrainOutput Trainer::run(const std::string& metrics_csv) {
    if (splits_.train.empty()) throw std::runtime_error("train split is empty");
    if (splits_.val.empty()) throw std::runtime_error("validation split is empty");

    std::ofstream csv;
    if (!metrics_csv.empty()) {
        csv.open(metrics_csv);
        if (!csv) throw std::runtime_error("cannot write metrics log: " + metrics_csv);
        csv << "epoch,train_loss,val_mrse\n";
        csv.precision(12);
    }

    auto snapshot = [&] {
        std::vector<std::vector<double>> snap;
        for (const auto& [_, t] : model_->params().entries()) snap.push_back(t->value);
        return snap;
    };
    auto restore = [&](const std::vector<std::vector<double>>& snap) {
        size_t i = 0;
        for (const auto& [_, t] : model_->params().entries()) t->value = snap[i++];
    };

    std::vector<double> lrs = {cfg_.learning_rate};
    if (cfg_.lr_grid) lrs = {1e-2, 1e-3, 1e-4};
    const auto initial = snapshot();

    TrainOutput best_output;
    std::vector<std::vector<double>> best_params = initial;
    double best_overall_val = std::numeric_limits<double>::infinity();

    const double configured_lr = cfg_.learning_rate;
    for (double lr : lrs) {
        cfg_.learning_rate = lr;
        restore(initial);
        AdamState adam;
        adam.init(model_->params());
        std::mt19937_64 rng(cfg_.seed * 0x9e3779b97f4a7c15ull + 1);

        TrainOutput output;
        std::vector<std::vector<double>> run_best = snapshot();
        double run_best_val = std::numeric_limits<double>::infinity();
        int since_best = 0;
        for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
            const double loss = train_epoch(rng, adam);
            const double val = validation_mrse();
            output.train_loss.push_back(loss);
            output.val_mrse.push_back(val);
            output.epochs_run = epoch + 1;
            if (csv.is_open()) csv << epoch << "," << loss << "," << val << "\n";
            if (val < run_best_val) {
                run_best_val = val;
                run_best = snapshot();
                output.best_epoch = epoch;
                since_best = 0;
            } else if (++since_best >= cfg_.patience) {
                break;
            }
        }
        if (run_best_val < best_overall_val ||
            (cfg_.epochs == 0 && best_output.train_loss.empty())) {
            best_overall_val = run_best_val;
            best_params = run_best;
            best_output = output;
        }
    }
    cfg_.learning_rate = configured_lr;
    restore(best_params);
    return best_output;
}

}  // namespace peg
