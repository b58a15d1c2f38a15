#include "peg/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace peg {

int SocialGraph::add_user(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    const int idx = static_cast<int>(names_.size());
    index_[name] = idx;
    names_.push_back(name);
    in_neighbors_.emplace_back();
    out_influence_.emplace_back();
    return idx;
}

int SocialGraph::index_of(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

bool SocialGraph::add_edge(const std::string& follower, const std::string& followee) {
    if (follower == followee) {
        ++self_loops_;
        return false;
    }
    const int f = add_user(follower);
    const int g = add_user(followee);
    auto& nbrs = in_neighbors_[static_cast<size_t>(f)];
    if (std::find(nbrs.begin(), nbrs.end(), g) != nbrs.end()) {
        ++dup_edges_;
        return false;
    }
    nbrs.push_back(g);
    out_influence_[static_cast<size_t>(g)].push_back(f);
    ++num_edges_;
    return true;
}

void SocialGraph::save_tsv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write network file: " + path);
    for (int v = 0; v < num_users(); ++v)
        for (int u : in_neighbors_[static_cast<size_t>(v)])
            out << names_[static_cast<size_t>(v)] << "\t" << names_[static_cast<size_t>(u)]
                << "\n";
}

SocialGraph SocialGraph::load_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open network file: " + path);
    SocialGraph g;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected follower<TAB>followee");
        g.add_edge(line.substr(0, tab), line.substr(tab + 1));
    }
    return g;
}

std::vector<std::string> CascadeInstance::seeds(std::int64_t window) const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    if (adopters.empty()) return out;
    const std::int64_t start = adopters.front().ts;
    for (const auto& a : adopters)
        if (a.ts - start <= window && seen.insert(a.user).second) out.push_back(a.user);
    return out;
}

std::vector<CascadeInstance> load_cascades_jsonl(const std::string& path,
                                                 const SocialGraph& graph) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cascades file: " + path);
    std::vector<CascadeInstance> cascades;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        CascadeInstance c;
        c.id = j.at("id").get<std::string>();
        c.tokens = j.at("tokens").get<std::vector<std::string>>();
        for (const auto& a : j.at("adopters")) {
            Adopter ad;
            ad.user = a.at("user").get<std::string>();
            ad.ts = a.at("ts").get<std::int64_t>();
            if (graph.index_of(ad.user) < 0)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": cascade '" + c.id + "' references unknown user '" +
                                         ad.user + "'");
            c.adopters.push_back(std::move(ad));
        }
        c.final_size = j.at("final_size").get<int>();
        if (j.contains("degenerate")) c.degenerate = j.at("degenerate").get<bool>();
        std::stable_sort(c.adopters.begin(), c.adopters.end(),
                         [](const Adopter& a, const Adopter& b) { return a.ts < b.ts; });
        cascades.push_back(std::move(c));
    }
    return cascades;
}

void save_cascades_jsonl(const std::vector<CascadeInstance>& cascades, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write cascades file: " + path);
    for (const auto& c : cascades) {
        nlohmann::json j;
        j["id"] = c.id;
        j["tokens"] = c.tokens;
        j["adopters"] = nlohmann::json::array();
        for (const auto& a : c.adopters) j["adopters"].push_back({{"user", a.user}, {"ts", a.ts}});
        j["final_size"] = c.final_size;
        if (c.degenerate) j["degenerate"] = true;
        out << j.dump() << "\n";
    }
}

std::vector<RepostHistory> load_histories_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open histories file: " + path);
    std::vector<RepostHistory> histories;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        RepostHistory h;
        h.user = j.at("user").get<std::string>();
        for (const auto& it : j.at("history")) {
            HistoryItem item;
            item.id = it.at("id").get<std::string>();
            item.tokens = it.at("tokens").get<std::vector<std::string>>();
            item.ts = it.at("ts").get<std::int64_t>();
            h.items.push_back(std::move(item));
        }
        std::stable_sort(h.items.begin(), h.items.end(),
                         [](const HistoryItem& a, const HistoryItem& b) { return a.ts < b.ts; });
        histories.push_back(std::move(h));
    }
    return histories;
}

void save_histories_jsonl(const std::vector<RepostHistory>& histories, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write histories file: " + path);
    for (const auto& h : histories) {
        nlohmann::json j;
        j["user"] = h.user;
        j["history"] = nlohmann::json::array();
        for (const auto& it : h.items)
            j["history"].push_back({{"id", it.id}, {"tokens", it.tokens}, {"ts", it.ts}});
        out << j.dump() << "\n";
    }
}

}  // namespace peg
