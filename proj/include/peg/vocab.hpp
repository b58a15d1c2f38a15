#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace peg {

struct Document {
    std::string id;
    std::vector<std::string> tokens;
};

// token -> count over vocabulary indices (sparse, ordered for determinism)
struct BagOfWords {
    std::string doc_id;
    std::map<int, int> counts;

    int total() const {
        int n = 0;
        for (const auto& [_, c] : counts) n += c;
        return n;
    }
    bool empty() const { return counts.empty(); }
};

class Vocabulary {
public:
    // Tokens with frequency >= min_count and not in the stoplist, indexed in
    // descending frequency then lexicographic order.
    static Vocabulary build(const std::vector<Document>& corpus, int min_count,
                            const std::set<std::string>& stoplist = {});

    int size() const { return static_cast<int>(tokens_.size()); }
    int index_of(const std::string& token) const;  // -1 when out of vocabulary
    const std::string& token_at(int index) const { return tokens_[index]; }
    int count_at(int index) const { return counts_[index]; }

    BagOfWords to_bow(const Document& doc) const;

    void save_tsv(const std::string& path) const;  // token<TAB>index<TAB>count
    static Vocabulary load_tsv(const std::string& path);

private:
    std::vector<std::string> tokens_;
    std::vector<int> counts_;
    std::unordered_map<std::string, int> index_;
};

std::vector<Document> load_corpus_jsonl(const std::string& path);

}  // namespace peg
