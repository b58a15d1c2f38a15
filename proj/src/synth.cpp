#include "peg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <stdexcept>

namespace peg {

namespace {

std::string user_name(int i) { return "u" + std::to_string(i); }
std::string word_name(int i) { return "w" + std::to_string(i); }

struct PlantedUser {
    std::vector<double> base_mixture;
    std::vector<double> current_mixture;  // after the drift point, if any
    bool drifted = false;
};

std::vector<double> mixture_for(int primary, int topics) {
    std::vector<double> m(static_cast<size_t>(topics), topics > 1 ? 0.3 / (topics - 1) : 0.0);
    m[static_cast<size_t>(primary)] = topics > 1 ? 0.7 : 1.0;
    return m;
}

int sample_cat(const std::vector<double>& probs, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double r = unif(rng);
    for (size_t i = 0; i < probs.size(); ++i) {
        r -= probs[i];
        if (r <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

}  // namespace

SynthOutput generate(const SynthConfig& cfg) {
    if (cfg.n_users < 3 || cfg.topics_true < 2 || cfg.vocab_size < cfg.topics_true)
        throw std::invalid_argument("generate: degenerate synth config");
    if (cfg.p0 < 0.0 || cfg.p0 > 1.0 || cfg.p0 * (1.0 + cfg.gamma) > 1.0 + 1e-12)
        throw std::invalid_argument("generate: p0 and p0*(1+gamma) must lie in [0,1]");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    SynthOutput out;

    // preferential-attachment follower graph: each new node follows
    // mean_degree/2 existing users picked proportionally to degree
    const int epn = std::max(1, cfg.mean_degree / 2);
    const int core = std::max(2, epn + 1);
    for (int i = 0; i < cfg.n_users; ++i) out.graph.add_user(user_name(i));
    std::vector<int> degree_bag;  // one entry per incident edge end
    for (int i = 0; i < core; ++i)
        for (int j = 0; j < core; ++j)
            if (i != j && out.graph.add_edge(user_name(i), user_name(j))) {
                degree_bag.push_back(i);
                degree_bag.push_back(j);
            }
    for (int i = core; i < cfg.n_users; ++i) {
        std::vector<int> targets;
        int guard = 0;
        while (static_cast<int>(targets.size()) < std::min(epn, i) && guard++ < 1000) {
            const int pick =
                degree_bag[static_cast<size_t>(rng() % degree_bag.size())];
            if (pick != i &&
                std::find(targets.begin(), targets.end(), pick) == targets.end())
                targets.push_back(pick);
        }
        for (int t : targets)
            if (out.graph.add_edge(user_name(i), user_name(t))) {
                degree_bag.push_back(i);
                degree_bag.push_back(t);
            }
    }

    // planted topic-word distributions: each topic concentrates on its own
    // vocabulary block
    std::vector<std::vector<double>> topic_word(static_cast<size_t>(cfg.topics_true));
    const int block = cfg.vocab_size / cfg.topics_true;
    for (int k = 0; k < cfg.topics_true; ++k) {
        auto& dist = topic_word[static_cast<size_t>(k)];
        dist.assign(static_cast<size_t>(cfg.vocab_size), 0.1 / cfg.vocab_size);
        const int lo = k * block;
        const int hi = (k == cfg.topics_true - 1) ? cfg.vocab_size : lo + block;
        for (int w = lo; w < hi; ++w) dist[static_cast<size_t>(w)] = 0.9 / (hi - lo);
        double z = 0.0;
        for (double p : dist) z += p;
        for (double& p : dist) p /= z;
    }

    // planted user mixtures with an occasional short-term drift
    std::vector<PlantedUser> users(static_cast<size_t>(cfg.n_users));
    for (auto& u : users) {
        const int primary = static_cast<int>(rng() % cfg.topics_true);
        u.base_mixture = mixture_for(primary, cfg.topics_true);
        u.drifted = unif(rng) < 0.5;
        if (u.drifted) {
            int shifted = static_cast<int>(rng() % cfg.topics_true);
            if (shifted == primary) shifted = (shifted + 1) % cfg.topics_true;
            u.current_mixture = mixture_for(shifted, cfg.topics_true);
        } else {
            u.current_mixture = u.base_mixture;
        }
    }

    // histories: tokens drawn from the planted distributions; the tail after
    // the drift point follows the current mixture
    int item_counter = 0;
    for (int i = 0; i < cfg.n_users; ++i) {
        RepostHistory h;
        h.user = user_name(i);
        const int len = cfg.history_min +
                        static_cast<int>(rng() % static_cast<unsigned>(
                                             cfg.history_max - cfg.history_min + 1));
        const int drift_start = static_cast<int>(std::ceil(len * (1.0 - cfg.drift_frac)));
        for (int j = 0; j < len; ++j) {
            const auto& mix = (users[static_cast<size_t>(i)].drifted && j >= drift_start)
                                  ? users[static_cast<size_t>(i)].current_mixture
                                  : users[static_cast<size_t>(i)].base_mixture;
            const int topic = sample_cat(mix, rng);
            HistoryItem item;
            item.id = "h" + std::to_string(item_counter++);
            item.ts = static_cast<std::int64_t>(j) * 3600;
            for (int t = 0; t < cfg.tokens_per_text; ++t)
                item.tokens.push_back(
                    word_name(sample_cat(topic_word[static_cast<size_t>(topic)], rng)));
            h.items.push_back(std::move(item));
        }
        out.histories.push_back(std::move(h));
    }

    // independent-cascade diffusion over the follower graph
    for (int c = 0; c < cfg.cascades; ++c) {
        CascadeInstance cascade;
        cascade.id = "c" + std::to_string(c);
        const int topic = static_cast<int>(rng() % cfg.topics_true);
        out.content_topic.push_back(topic);
        for (int t = 0; t < cfg.tokens_per_text; ++t)
            cascade.tokens.push_back(
                word_name(sample_cat(topic_word[static_cast<size_t>(topic)], rng)));

        const int n_seeds = cfg.seeds_min +
                            static_cast<int>(rng() % static_cast<unsigned>(
                                                 cfg.seeds_max - cfg.seeds_min + 1));
        std::vector<char> active(static_cast<size_t>(cfg.n_users), 0);
        std::vector<int> frontier;
        while (static_cast<int>(frontier.size()) < n_seeds) {
            const int s = static_cast<int>(rng() % static_cast<unsigned>(cfg.n_users));
            if (!active[static_cast<size_t>(s)]) {
                active[static_cast<size_t>(s)] = 1;
                frontier.push_back(s);
                cascade.adopters.push_back({user_name(s), 0});
            }
        }

        // seed-neighborhood majority preference, for the planted-signal check
        auto primary_of = [&](int user) {
            const auto& mix = users[static_cast<size_t>(user)].current_mixture;
            return static_cast<int>(std::max_element(mix.begin(), mix.end()) - mix.begin());
        };
        std::map<int, int> votes;
        for (int s : frontier)
            for (int f : out.graph.followers(s)) ++votes[primary_of(f)];
        if (votes.empty())
            for (int s : frontier) ++votes[primary_of(s)];
        int majority = 0, best = -1;
        for (const auto& [k, v] : votes)
            if (v > best) best = v, majority = k;
        out.seed_majority_topic.push_back(majority);

        for (int round = 1; round <= cfg.max_rounds && !frontier.empty(); ++round) {
            std::vector<int> next;
            for (int u : frontier) {
                for (int f : out.graph.followers(u)) {
                    if (active[static_cast<size_t>(f)]) continue;
                    ++out.exposures;
                    const double affinity =
                        users[static_cast<size_t>(f)].current_mixture[static_cast<size_t>(topic)];
                    const double p = cfg.p0 * (1.0 + cfg.gamma * affinity);
                    if (unif(rng) < p) {
                        ++out.adoptions;
                        active[static_cast<size_t>(f)] = 1;
                        next.push_back(f);
                        cascade.adopters.push_back(
                            {user_name(f), static_cast<std::int64_t>(round) * 60});
                    }
                }
            }
            frontier = std::move(next);
        }
        cascade.final_size = static_cast<int>(cascade.adopters.size());
        cascade.degenerate = cascade.final_size == n_seeds;
        if (cascade.degenerate) ++out.degenerate_cascades;
        out.cascades.push_back(std::move(cascade));
    }
    return out;
}

void write_dataset(const SynthOutput& data, const std::string& dir) {
    std::filesystem::create_directories(dir);
    data.graph.save_tsv(dir + "/network.tsv");
    save_histories_jsonl(data.histories, dir + "/histories.jsonl");
    save_cascades_jsonl(data.cascades, dir + "/cascades.jsonl");
}

Dataset load_dataset(const std::string& dir) {
    Dataset d;
    d.graph = SocialGraph::load_tsv(dir + "/network.tsv");
    d.cascades = load_cascades_jsonl(dir + "/cascades.jsonl", d.graph);
    if (std::filesystem::exists(dir + "/histories.jsonl"))
        d.histories = load_histories_jsonl(dir + "/histories.jsonl");
    return d;
}

}  // namespace peg
