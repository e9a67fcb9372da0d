#include "colligo/retrieval.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace colligo {

namespace {

constexpr char kIndexMagic[8] = {'C', 'L', 'G', 'I', 'D', 'X', '0', '1'};

void write_string(std::ofstream& out, const std::string& s) {
    const std::uint32_t len = static_cast<std::uint32_t>(s.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    return s;
}

}  // namespace

EmbeddingIndex build_embedding_index_from_seqs(const EncoderParams& params,
                                               const std::vector<std::string>& product_ids,
                                               const std::vector<std::vector<int>>& token_ids,
                                               const std::vector<std::string>& categories,
                                               std::uint64_t corpus_hash) {
    if (product_ids.empty()) throw ConfigError("cannot index zero products");
    EmbeddingIndex index;
    index.product_ids = product_ids;
    index.category = categories;
    index.corpus_hash = corpus_hash;
    index.d = params.d;
    index.unit_vectors.resize(static_cast<Eigen::Index>(product_ids.size()), params.d);
    for (std::size_t i = 0; i < product_ids.size(); ++i) {
        TokenSequence seq;
        seq.ids = token_ids[i];
        Vec v = embed(params, seq);
        const double norm = v.norm();
        if (norm < 1e-300) {
            v = Vec::Zero(params.d);
            v[0] = 1.0;
            index.zero_replaced.push_back(product_ids[i]);
        } else {
            v /= norm;
        }
        index.unit_vectors.row(static_cast<Eigen::Index>(i)) = v.transpose();
    }
    return index;
}

EmbeddingIndex build_embedding_index(const EncoderParams& params, const Vocabulary& vocab,
                                     const std::vector<Product>& products,
                                     std::uint64_t corpus_hash) {
    std::vector<std::string> ids;
    std::vector<std::vector<int>> seqs;
    std::vector<std::string> cats;
    ids.reserve(products.size());
    for (const Product& p : products) {
        ids.push_back(p.product_id);
        seqs.push_back(tokenize(render_product(p), vocab).ids);
        cats.push_back(p.leaf_category());
    }
    return build_embedding_index_from_seqs(params, ids, seqs, cats, corpus_hash);
}

std::vector<std::pair<std::string, double>> retrieve_topk(
    const EmbeddingIndex& index, const Vec& query_vec, std::size_t k,
    const std::optional<std::string>& category_filter, bool euclidean) {
    if (k < 1) throw ConfigError("k must be >= 1");
    if (query_vec.size() != index.d) {
        throw LookupError("query dimension " + std::to_string(query_vec.size()) +
                          " does not match index dimension " + std::to_string(index.d));
    }
    Vec q = query_vec;
    const double norm = q.norm();
    if (norm > 0.0 && !euclidean) q /= norm;

    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (category_filter && index.category[i] != *category_filter) continue;
        const auto row = index.unit_vectors.row(static_cast<Eigen::Index>(i));
        const double score = euclidean ? -(row.transpose() - query_vec).norm() : row.dot(q);
        scored.emplace_back(index.product_ids[i], score);
    }
    const auto better = [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    };
    if (scored.size() > k) {
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                          scored.end(), better);
        scored.resize(k);
    } else {
        std::sort(scored.begin(), scored.end(), better);
    }
    return scored;
}

void save_embedding_index(const EmbeddingIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out.write(kIndexMagic, sizeof(kIndexMagic));
    const std::uint32_t n = static_cast<std::uint32_t>(index.size());
    const std::uint32_t d = static_cast<std::uint32_t>(index.d);
    out.write(reinterpret_cast<const char*>(&index.corpus_hash), sizeof(index.corpus_hash));
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(&d), sizeof(d));
    for (const std::string& id : index.product_ids) write_string(out, id);
    for (const std::string& cat : index.category) write_string(out, cat);
    const std::uint32_t n_zero = static_cast<std::uint32_t>(index.zero_replaced.size());
    out.write(reinterpret_cast<const char*>(&n_zero), sizeof(n_zero));
    for (const std::string& id : index.zero_replaced) write_string(out, id);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < d; ++j) {
            const float x = static_cast<float>(index.unit_vectors(i, j));
            out.write(reinterpret_cast<const char*>(&x), sizeof(x));
        }
    }
    if (!out) throw ParseError("short write to '" + path + "'");
}

EmbeddingIndex load_embedding_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kIndexMagic, sizeof(magic)) != 0) {
        throw ParseError(path + ": not a colligo embedding index");
    }
    EmbeddingIndex index;
    std::uint32_t n = 0, d = 0;
    in.read(reinterpret_cast<char*>(&index.corpus_hash), sizeof(index.corpus_hash));
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    in.read(reinterpret_cast<char*>(&d), sizeof(d));
    if (!in || n == 0 || d < 2) throw ParseError(path + ": corrupt index header");
    index.d = static_cast<int>(d);
    for (std::uint32_t i = 0; i < n; ++i) index.product_ids.push_back(read_string(in));
    for (std::uint32_t i = 0; i < n; ++i) index.category.push_back(read_string(in));
    std::uint32_t n_zero = 0;
    in.read(reinterpret_cast<char*>(&n_zero), sizeof(n_zero));
    for (std::uint32_t i = 0; i < n_zero; ++i) index.zero_replaced.push_back(read_string(in));
    index.unit_vectors.resize(n, d);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < d; ++j) {
            float x = 0.0f;
            in.read(reinterpret_cast<char*>(&x), sizeof(x));
            index.unit_vectors(i, j) = static_cast<double>(x);
        }
        // float32 storage costs ~1e-7 of norm; restore the unit invariant
        const double norm = index.unit_vectors.row(i).norm();
        if (norm > 0.0) index.unit_vectors.row(i) /= norm;
    }
    if (!in) throw ParseError(path + ": truncated index matrix");
    return index;
}

}  // namespace colligo
