#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "colligo/types.hpp"

namespace colligo {

struct Date {
    int year = 2021;
    int month = 1;
    int day = 1;

    static Date parse(const std::string& iso);  // "YYYY-MM-DD"
    std::string iso() const;
    // "June 15" form used when a date is rendered into a query.
    std::string month_day() const;

    auto operator<=>(const Date&) const = default;
};

struct Product {
    std::string product_id;
    std::string title;
    std::vector<std::string> category_path;  // root first, leaf last, depth 1-4
    std::int64_t price = 0;                  // minor currency units
    std::string brand;                       // may be empty
    std::vector<std::string> tags;
    std::vector<std::pair<std::string, std::string>> extra_attrs;
    std::int64_t review_count = 0;
    double popularity = 0.0;

    const std::string& leaf_category() const { return category_path.back(); }
};

struct Section {
    std::string name;
    std::vector<std::string> product_ids;
};

struct Collection {
    std::string collection_id;
    std::string title;
    Date start_date;
    std::vector<Section> sections;
    // Leaf category when this collection was emitted by category-wise
    // augmentation; empty otherwise. Drives C_gt at evaluation time.
    std::string aug_category;
    // collection_id of the collection this one was split from; empty for
    // curated collections.
    std::string aug_source_id;

    std::vector<std::string> member_ids() const;  // section order, deduplicated
};

struct PlantedTruth {
    std::vector<std::string> intent_tokens;  // product-surface forms, sorted
    std::vector<std::string> product_ids;
};

struct CorpusBundle {
    std::vector<Product> products;
    std::vector<Collection> collections;
    // Distinct category paths over all products, sorted.
    std::vector<std::vector<std::string>> taxonomy;
    // collection_id -> latent intent + ground-truth members; nonempty iff synthetic.
    std::map<std::string, PlantedTruth> planted_truth;
    std::vector<std::string> load_warnings;

    bool synthetic() const { return !planted_truth.empty(); }
    bool has_product(const std::string& id) const { return index_.count(id) > 0; }
    const Product& product(const std::string& id) const;
    std::size_t product_pos(const std::string& id) const;

    // Rebuilds the id index and taxonomy and checks referential integrity.
    void finalize();

private:
    std::unordered_map<std::string, std::size_t> index_;
};

struct SyntheticConfig {
    std::uint64_t seed = 0;
    std::int64_t n_products = 2000;
    std::int64_t n_categories = 40;
    std::int64_t n_collections = 100;
    double semantic_gap = 0.7;
};

// Deterministic corpus with planted intent ground truth. Every member product
// carries at least one of its collection's intent tokens, so the planted truth
// is recoverable by token overlap regardless of the gap setting; the gap
// controls how often collection titles and section names use query-only
// paraphrase vocabulary instead of the tokens products actually contain.
CorpusBundle generate_synthetic_corpus(const SyntheticConfig& config);

struct CorpusStats {
    std::int64_t n_collections = 0;
    std::int64_t n_sections = 0;
    std::int64_t n_products_in_collections = 0;  // with multiplicity
    double avg_products_per_collection = 0.0;
    double avg_products_per_section = 0.0;
    std::int64_t n_categories = 0;  // distinct leaf categories over products
};

CorpusStats corpus_stats(const CorpusBundle& bundle);

CorpusBundle load_corpus(const std::string& products_path, const std::string& collections_path);
std::vector<Product> load_products(const std::string& path);
void load_planted_truth(CorpusBundle& bundle, const std::string& truth_path);

void save_products(const CorpusBundle& bundle, const std::string& path);
void save_collections(const CorpusBundle& bundle, const std::string& path);
void save_planted_truth(const CorpusBundle& bundle, const std::string& path);

std::string serialize_products(const CorpusBundle& bundle);
std::string serialize_collections(const CorpusBundle& bundle);

// FNV-1a over the serialized products and collections; pins dataset and index
// provenance to the exact corpus bytes.
std::uint64_t bundle_hash(const CorpusBundle& bundle);

}  // namespace colligo
