#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "peg/vocab.hpp"

namespace peg {

// Directed follower network. An edge (follower, followee) means influence
// flows followee -> follower, so N(v) = the users v follows.
class SocialGraph {
public:
    int add_user(const std::string& name);
    int index_of(const std::string& name) const;  // -1 when unknown
    const std::string& name_of(int idx) const { return names_[static_cast<size_t>(idx)]; }
    int num_users() const { return static_cast<int>(names_.size()); }

    // returns false for duplicates and self-loops (both dropped)
    bool add_edge(const std::string& follower, const std::string& followee);

    const std::vector<int>& influencers(int v) const {
        return in_neighbors_[static_cast<size_t>(v)];
    }
    // users influenced by u (u's followers)
    const std::vector<int>& followers(int u) const {
        return out_influence_[static_cast<size_t>(u)];
    }

    int num_edges() const { return num_edges_; }
    int duplicate_edges() const { return dup_edges_; }
    int self_loops() const { return self_loops_; }

    void save_tsv(const std::string& path) const;
    static SocialGraph load_tsv(const std::string& path);

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::vector<int>> in_neighbors_;   // N(v): influence sources
    std::vector<std::vector<int>> out_influence_;  // reverse adjacency
    int num_edges_ = 0;
    int dup_edges_ = 0;
    int self_loops_ = 0;
};

struct Adopter {
    std::string user;
    std::int64_t ts = 0;
};

struct CascadeInstance {
    std::string id;
    std::vector<std::string> tokens;
    std::vector<Adopter> adopters;  // sorted by ts
    int final_size = 0;
    bool degenerate = false;  // flagged by the generator: nobody beyond the seeds

    // adopters within the observation window (ts <= window from first adoption)
    std::vector<std::string> seeds(std::int64_t window) const;
};

struct HistoryItem {
    std::string id;
    std::vector<std::string> tokens;
    std::int64_t ts = 0;
};

struct RepostHistory {
    std::string user;
    std::vector<HistoryItem> items;  // chronological
};

std::vector<CascadeInstance> load_cascades_jsonl(const std::string& path,
                                                 const SocialGraph& graph);
void save_cascades_jsonl(const std::vector<CascadeInstance>& cascades, const std::string& path);

std::vector<RepostHistory> load_histories_jsonl(const std::string& path);
void save_histories_jsonl(const std::vector<RepostHistory>& histories, const std::string& path);

}  // namespace peg
