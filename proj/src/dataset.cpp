#include "colligo/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "colligo/hash.hpp"
#include "colligo/rng.hpp"
#include "colligo/text.hpp"

namespace colligo {

using json = nlohmann::ordered_json;

const char* negative_source_name(NegativeSource source) {
    return source == NegativeSource::RandomCategory ? "random_category" : "bm25";
}

NegativeSource negative_source_from(const std::string& name) {
    if (name == "random_category") return NegativeSource::RandomCategory;
    if (name == "bm25") return NegativeSource::Bm25;
    throw ParseError("unknown negative_source '" + name + "'");
}

std::vector<Collection> augment_category_wise(const std::vector<Collection>& collections,
                                              const CorpusBundle& bundle, double ratio,
                                              std::uint64_t seed) {
    if (ratio < 0.0 || ratio > 1.0) throw ConfigError("augmentation ratio must be in [0,1]");
    const std::size_t n = collections.size();
    const std::size_t n_selected = static_cast<std::size_t>(ratio * static_cast<double>(n));

    Rng rng(seed);
    const auto picked = rng.sample_indices(n, n_selected);
    std::vector<bool> selected(n, false);
    for (const std::size_t i : picked) selected[i] = true;

    std::vector<Collection> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!selected[i]) out.push_back(collections[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!selected[i]) continue;
        const Collection& coll = collections[i];
        // Group members by leaf category, in first-occurrence order.
        std::vector<std::string> cat_order;
        std::unordered_map<std::string, std::vector<std::string>> groups;
        for (const std::string& id : coll.member_ids()) {
            const std::string& leaf = bundle.product(id).leaf_category();
            auto& group = groups[leaf];
            if (group.empty()) cat_order.push_back(leaf);
            group.push_back(id);
        }
        for (const std::string& leaf : cat_order) {
            Collection split;
            split.collection_id = coll.collection_id + "#" + leaf;
            split.title = coll.title;
            split.start_date = coll.start_date;
            split.aug_category = leaf;
            split.aug_source_id = coll.collection_id;
            split.sections.push_back(Section{leaf, groups[leaf]});
            out.push_back(std::move(split));
        }
    }
    return out;
}

std::vector<PositivePair> decompose_positive_pairs(const CorpusBundle& bundle,
                                                   const std::unordered_set<std::string>& accessible,
                                                   std::uint64_t seed) {
    constexpr std::size_t kMaxPairsPerCollection = 100;
    std::vector<PositivePair> pairs;
    for (std::size_t ci = 0; ci < bundle.collections.size(); ++ci) {
        const Collection& coll = bundle.collections[ci];
        std::vector<PositivePair> local;
        for (const Section& sec : coll.sections) {
            const std::string query = render_query(coll.title, sec.name, coll.start_date);
            for (const std::string& id : sec.product_ids) {
                if (!accessible.count(id)) continue;
                local.push_back(PositivePair{query, id, coll.collection_id});
            }
        }
        if (local.size() > kMaxPairsPerCollection) {
            Rng rng(mix_seed(seed, ci));
            auto keep = rng.sample_indices(local.size(), kMaxPairsPerCollection);
            std::sort(keep.begin(), keep.end());
            std::vector<PositivePair> capped;
            capped.reserve(kMaxPairsPerCollection);
            for (const std::size_t k : keep) capped.push_back(std::move(local[k]));
            local = std::move(capped);
        }
        pairs.insert(pairs.end(), std::make_move_iterator(local.begin()),
                     std::make_move_iterator(local.end()));
    }
    return pairs;
}

TripletDataset build_triplets(const std::vector<PositivePair>& pairs, const CorpusBundle& bundle,
                              const Bm25Index& index, const NegSamplingConfig& cfg,
                              double aug_ratio) {
    if (cfg.n_random_same_category < 0 || cfg.n_bm25 < 0) {
        throw ConfigError("negative counts must be >= 0");
    }
    if (cfg.n_random_same_category + cfg.n_bm25 < 1) {
        throw ConfigError("at least one negative per pair is required");
    }

    // Universe of candidate negatives = the documents of the index.
    std::unordered_map<std::string, std::vector<std::string>> by_category;
    for (const std::string& id : index.doc_ids()) {
        by_category[index.category_of(id)].push_back(id);
    }

    // Collection member sets, resolved once.
    std::unordered_map<std::string, std::unordered_set<std::string>> members_of;
    for (const Collection& coll : bundle.collections) {
        auto& set = members_of[coll.collection_id];
        for (const std::string& id : coll.member_ids()) set.insert(id);
    }

    std::unordered_map<std::string, std::string> product_text;
    const auto text_of = [&](const std::string& id) -> const std::string& {
        auto it = product_text.find(id);
        if (it == product_text.end()) {
            it = product_text.emplace(id, render_product(bundle.product(id))).first;
        }
        return it->second;
    };

    TripletDataset ds;
    ds.provenance.aug_ratio = aug_ratio;
    ds.provenance.neg = cfg;
    ds.provenance.corpus_hash = bundle_hash(bundle);

    // BM25 negatives are identical for every pair sharing a query, so cache
    // per (collection, query).
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> bm25_cache;

    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        const PositivePair& pair = pairs[pi];
        const auto mem_it = members_of.find(pair.collection_id);
        if (mem_it == members_of.end()) {
            throw LookupError("pair references unknown collection '" + pair.collection_id + "'");
        }
        const auto& members = mem_it->second;
        const Product& positive = bundle.product(pair.positive_product_id);

        const auto emit = [&](const std::string& neg_id, NegativeSource source) {
            TripletExample ex;
            ex.query_text = pair.query_text;
            ex.positive_text = text_of(pair.positive_product_id);
            ex.negative_text = text_of(neg_id);
            ex.negative_source = source;
            ex.collection_id = pair.collection_id;
            ex.positive_product_id = pair.positive_product_id;
            ex.negative_product_id = neg_id;
            ds.examples.push_back(std::move(ex));
        };

        if (cfg.n_random_same_category > 0) {
            Rng rng(mix_seed(cfg.seed, pi));
            const std::size_t want = static_cast<std::size_t>(cfg.n_random_same_category);
            std::vector<std::string> pool;
            const auto cat_it = by_category.find(positive.leaf_category());
            if (cat_it != by_category.end()) {
                for (const std::string& id : cat_it->second) {
                    if (!members.count(id)) pool.push_back(id);
                }
            }
            std::vector<std::string> drawn;
            for (const std::size_t k : rng.sample_indices(pool.size(), want)) {
                drawn.push_back(pool[k]);
            }
            if (drawn.size() < want) {
                // Same-category pool exhausted; fall back to any category.
                ds.provenance.category_fallback_used = true;
                std::unordered_set<std::string> have(drawn.begin(), drawn.end());
                std::vector<std::string> rest;
                for (const std::string& id : index.doc_ids()) {
                    if (!members.count(id) && !have.count(id)) rest.push_back(id);
                }
                for (const std::size_t k : rng.sample_indices(rest.size(), want - drawn.size())) {
                    drawn.push_back(rest[k]);
                }
            }
            for (const std::string& id : drawn) emit(id, NegativeSource::RandomCategory);
        }

        if (cfg.n_bm25 > 0) {
            const auto key = std::make_pair(pair.collection_id, pair.query_text);
            auto it = bm25_cache.find(key);
            if (it == bm25_cache.end()) {
                const auto negs = index.sample_hard_negatives(
                    pair.query_text, members, static_cast<std::size_t>(cfg.n_bm25),
                    mix_seed(cfg.seed, fnv1a64(pair.query_text)));
                it = bm25_cache.emplace(key, negs).first;
            }
            for (const std::string& id : it->second) emit(id, NegativeSource::Bm25);
        }
    }
    return ds;
}

DatasetStats dataset_stats(const TripletDataset& ds) {
    DatasetStats s;
    s.n_triplets = static_cast<std::int64_t>(ds.examples.size());
    s.aug_ratio = ds.provenance.aug_ratio;
    std::set<std::pair<std::string, std::string>> pairs;
    std::set<std::string> negatives;
    for (const TripletExample& ex : ds.examples) {
        pairs.emplace(ex.query_text, ex.positive_product_id);
        negatives.insert(ex.negative_product_id);
    }
    s.n_positive_pairs = static_cast<std::int64_t>(pairs.size());
    s.n_distinct_negative_products = static_cast<std::int64_t>(negatives.size());
    return s;
}

void save_triplets(const TripletDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << json{{"format", "colligo-triplets-v1"},
                {"aug_ratio", ds.provenance.aug_ratio},
                {"n_random_same_category", ds.provenance.neg.n_random_same_category},
                {"n_bm25", ds.provenance.neg.n_bm25},
                {"seed", ds.provenance.neg.seed},
                {"corpus_hash", hash_hex(ds.provenance.corpus_hash)},
                {"category_fallback_used", ds.provenance.category_fallback_used}}
               .dump()
        << '\n';
    for (const TripletExample& ex : ds.examples) {
        out << json{{"query_text", ex.query_text},
                    {"positive_text", ex.positive_text},
                    {"negative_text", ex.negative_text},
                    {"negative_source", negative_source_name(ex.negative_source)},
                    {"collection_id", ex.collection_id},
                    {"positive_product_id", ex.positive_product_id},
                    {"negative_product_id", ex.negative_product_id}}
                   .dump()
            << '\n';
    }
}

TripletDataset load_triplets(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": missing provenance header");
    TripletDataset ds;
    try {
        json header = json::parse(line);
        if (header.value("format", "") != "colligo-triplets-v1") {
            throw ParseError("not a colligo triplet file");
        }
        ds.provenance.aug_ratio = header.at("aug_ratio").get<double>();
        ds.provenance.neg.n_random_same_category = header.at("n_random_same_category").get<int>();
        ds.provenance.neg.n_bm25 = header.at("n_bm25").get<int>();
        ds.provenance.neg.seed = header.at("seed").get<std::uint64_t>();
        ds.provenance.corpus_hash =
            std::stoull(header.at("corpus_hash").get<std::string>(), nullptr, 16);
        ds.provenance.category_fallback_used = header.at("category_fallback_used").get<bool>();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(path + ":1: " + e.what());
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            TripletExample ex;
            ex.query_text = j.at("query_text").get<std::string>();
            ex.positive_text = j.at("positive_text").get<std::string>();
            ex.negative_text = j.at("negative_text").get<std::string>();
            ex.negative_source = negative_source_from(j.at("negative_source").get<std::string>());
            ex.collection_id = j.at("collection_id").get<std::string>();
            ex.positive_product_id = j.at("positive_product_id").get<std::string>();
            ex.negative_product_id = j.at("negative_product_id").get<std::string>();
            ds.examples.push_back(std::move(ex));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return ds;
}

}  // namespace colligo
