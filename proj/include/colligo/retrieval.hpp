#pragma once

#include <optional>
#include <string>
#include <vector>

#include "colligo/encoder.hpp"

namespace colligo {

// Precomputed product embeddings, one L2-normalized row per product, exact
// full-scan cosine search. In memory rows are float64 with unit norm; the
// on-disk matrix is float32 and rows are renormalized on load.
struct EmbeddingIndex {
    std::vector<std::string> product_ids;
    RowMat unit_vectors;  // n x d
    std::vector<std::string> category;  // leaf category per row
    std::vector<std::string> zero_replaced;  // ids whose embedding was zero
    std::uint64_t corpus_hash = 0;
    int d = 0;

    std::size_t size() const { return product_ids.size(); }
};

EmbeddingIndex build_embedding_index(const EncoderParams& params, const Vocabulary& vocab,
                                     const std::vector<Product>& products,
                                     std::uint64_t corpus_hash = 0);

// Pre-tokenized variant for callers that rebuild the index every eval interval.
EmbeddingIndex build_embedding_index_from_seqs(const EncoderParams& params,
                                               const std::vector<std::string>& product_ids,
                                               const std::vector<std::vector<int>>& token_ids,
                                               const std::vector<std::string>& categories,
                                               std::uint64_t corpus_hash = 0);

// Exact top-k by cosine descending, ties by product_id ascending. The query is
// normalized internally, so any positive scaling of it returns the same
// ranking; a zero query scores every product 0. category_filter restricts the
// candidate set before ranking. Optional Euclidean mode ranks by ascending
// distance instead (diagnostic, same tie rule).
std::vector<std::pair<std::string, double>> retrieve_topk(
    const EmbeddingIndex& index, const Vec& query_vec, std::size_t k,
    const std::optional<std::string>& category_filter = std::nullopt, bool euclidean = false);

void save_embedding_index(const EmbeddingIndex& index, const std::string& path);
EmbeddingIndex load_embedding_index(const std::string& path);

}  // namespace colligo
