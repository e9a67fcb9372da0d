#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "colligo/types.hpp"

namespace colligo {

struct Bm25Doc {
    std::string doc_id;
    std::string text;
    std::string category;
};

// Okapi BM25 inverted index over space-tokenized, lowercased documents.
// Scores use the smoothed nonnegative IDF ln(1 + (N - n + 0.5)/(n + 0.5)).
class Bm25Index {
public:
    static Bm25Index build(const std::vector<Bm25Doc>& docs, double k1 = 1.2, double b = 0.75);

    double score(const std::vector<std::string>& query_terms, const std::string& doc_id) const;

    // Top-k by score descending, ties by doc_id ascending. Stopwords are
    // removed from the query; drop_date strips the trailing "[SEP] Month Day"
    // segment of a rendered query. Zero-score documents are never returned.
    std::vector<std::pair<std::string, double>> search(
        const std::string& query, std::size_t k,
        const std::unordered_set<std::string>& stopwords = {}, bool drop_date = false) const;

    // Top BM25 hits minus positives; any shortfall is filled by seeded uniform
    // sampling over the rest of the index.
    std::vector<std::string> sample_hard_negatives(const std::string& query,
                                                   const std::unordered_set<std::string>& positives,
                                                   std::size_t n, std::uint64_t seed) const;

    std::size_t n_docs() const { return doc_ids_.size(); }
    double avg_doc_len() const { return avg_doc_len_; }
    double k1() const { return k1_; }
    double b() const { return b_; }
    std::size_t n_terms() const { return postings_.size(); }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    const std::string& category_of(const std::string& doc_id) const;
    bool has_doc(const std::string& doc_id) const { return doc_pos_.count(doc_id) > 0; }

    void save(const std::string& path) const;
    static Bm25Index load(const std::string& path);

    // Lowercased whitespace tokens; the literal [SEP]/[UNK] markers are
    // structural and dropped.
    static std::vector<std::string> space_tokenize(const std::string& text);

private:
    double idf(std::size_t df) const;
    double score_at(const std::vector<std::string>& query_terms, std::size_t pos) const;

    std::vector<std::string> doc_ids_;  // sorted ascending
    std::vector<std::string> doc_category_;
    std::vector<std::int64_t> doc_len_;
    std::unordered_map<std::string, std::size_t> doc_pos_;
    // term -> (doc position, term frequency), positions ascending
    std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings_;
    double avg_doc_len_ = 0.0;
    double k1_ = 1.2;
    double b_ = 0.75;
};

}  // namespace colligo
