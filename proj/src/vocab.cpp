#include "peg/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace peg {

Vocabulary Vocabulary::build(const std::vector<Document>& corpus, int min_count,
                             const std::set<std::string>& stoplist) {
    if (corpus.empty()) throw std::invalid_argument("build_vocabulary: empty corpus");
    std::map<std::string, int> freq;
    for (const auto& doc : corpus)
        for (const auto& tok : doc.tokens) ++freq[tok];

    std::vector<std::pair<std::string, int>> kept;
    for (const auto& [tok, count] : freq)
        if (count >= min_count && !stoplist.count(tok)) kept.emplace_back(tok, count);
    if (kept.empty())
        throw std::runtime_error("build_vocabulary: no token survives min_count=" +
                                 std::to_string(min_count));
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    for (const auto& [tok, count] : kept) {
        v.index_[tok] = static_cast<int>(v.tokens_.size());
        v.tokens_.push_back(tok);
        v.counts_.push_back(count);
    }
    return v;
}

int Vocabulary::index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : it->second;
}

BagOfWords Vocabulary::to_bow(const Document& doc) const {
    BagOfWords bow;
    bow.doc_id = doc.id;
    for (const auto& tok : doc.tokens) {
        const int idx = index_of(tok);
        if (idx >= 0) ++bow.counts[idx];
    }
    return bow;
}

void Vocabulary::save_tsv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
    for (int i = 0; i < size(); ++i)
        out << tokens_[i] << "\t" << i << "\t" << counts_[i] << "\n";
}

Vocabulary Vocabulary::load_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
    Vocabulary v;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed line");
        const std::string tok = line.substr(0, t1);
        const int idx = std::stoi(line.substr(t1 + 1, t2 - t1 - 1));
        const int count = std::stoi(line.substr(t2 + 1));
        if (idx != static_cast<int>(v.tokens_.size()))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": indices must be dense and in order");
        v.index_[tok] = idx;
        v.tokens_.push_back(tok);
        v.counts_.push_back(count);
    }
    return v;
}

std::vector<Document> load_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus: " + path);
    std::vector<Document> docs;
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
        Document d;
        d.id = j.at("id").get<std::string>();
        d.tokens = j.at("tokens").get<std::vector<std::string>>();
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace peg
