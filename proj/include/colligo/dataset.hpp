#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "colligo/bm25.hpp"
#include "colligo/corpus.hpp"

namespace colligo {

struct NegSamplingConfig {
    int n_random_same_category = 10;
    int n_bm25 = 15;
    std::uint64_t seed = 0;
};

enum class NegativeSource { RandomCategory, Bm25 };

const char* negative_source_name(NegativeSource source);
NegativeSource negative_source_from(const std::string& name);

struct TripletExample {
    std::string query_text;
    std::string positive_text;
    std::string negative_text;
    NegativeSource negative_source = NegativeSource::RandomCategory;
    std::string collection_id;
    std::string positive_product_id;
    std::string negative_product_id;
};

struct DatasetProvenance {
    double aug_ratio = 0.0;
    NegSamplingConfig neg;
    std::uint64_t corpus_hash = 0;
    // Set when some same-category pool was too small and negatives fell back
    // to any-category sampling.
    bool category_fallback_used = false;
};

struct TripletDataset {
    std::vector<TripletExample> examples;
    DatasetProvenance provenance;
};

struct PositivePair {
    std::string query_text;
    std::string positive_product_id;
    std::string collection_id;
};

// Splits a seeded floor(ratio*n) subset of collections into single-category
// collections whose one section is named by the category; the rest pass
// through unchanged. Output order: pass-throughs, then augmented.
std::vector<Collection> augment_category_wise(const std::vector<Collection>& collections,
                                              const CorpusBundle& bundle, double ratio,
                                              std::uint64_t seed);

// One (query, product) pair per accessible product of each section, capped at
// 100 pairs per collection by seeded subsampling.
std::vector<PositivePair> decompose_positive_pairs(const CorpusBundle& bundle,
                                                   const std::unordered_set<std::string>& accessible,
                                                   std::uint64_t seed);

// Attaches negatives to every positive pair: seeded uniform same-leaf-category
// draws plus BM25 hard negatives, both excluding the source collection's
// members. Small category pools fall back to any-category draws.
TripletDataset build_triplets(const std::vector<PositivePair>& pairs, const CorpusBundle& bundle,
                              const Bm25Index& index, const NegSamplingConfig& cfg,
                              double aug_ratio = 0.0);

struct DatasetStats {
    std::int64_t n_positive_pairs = 0;
    std::int64_t n_distinct_negative_products = 0;
    std::int64_t n_triplets = 0;
    double aug_ratio = 0.0;
};

DatasetStats dataset_stats(const TripletDataset& ds);

// Line-delimited records, provenance header line first.
void save_triplets(const TripletDataset& ds, const std::string& path);
TripletDataset load_triplets(const std::string& path);

}  // namespace colligo
