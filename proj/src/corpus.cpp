#include "colligo/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "colligo/hash.hpp"
#include "colligo/rng.hpp"

namespace colligo {

using json = nlohmann::ordered_json;

namespace {

const char* kMonthNames[12] = {"January", "February", "March",     "April",   "May",      "June",
                               "July",    "August",   "September", "October", "November", "December"};

int days_in_month(int year, int month) {
    static const int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return month == 2 && leap ? 29 : kDays[month - 1];
}

}  // namespace

Date Date::parse(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(iso.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3 || iso.size() != 10) {
        throw ParseError("bad date '" + iso + "': expected YYYY-MM-DD");
    }
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) {
        throw ParseError("bad date '" + iso + "': out of range");
    }
    return Date{y, m, d};
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::string Date::month_day() const {
    return std::string(kMonthNames[month - 1]) + " " + std::to_string(day);
}

std::vector<std::string> Collection::member_ids() const {
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (const Section& sec : sections) {
        for (const std::string& id : sec.product_ids) {
            if (seen.insert(id).second) ids.push_back(id);
        }
    }
    return ids;
}

const Product& CorpusBundle::product(const std::string& id) const {
    return products[product_pos(id)];
}

std::size_t CorpusBundle::product_pos(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw LookupError("unknown product_id '" + id + "'");
    return it->second;
}

void CorpusBundle::finalize() {
    index_.clear();
    index_.reserve(products.size());
    for (std::size_t i = 0; i < products.size(); ++i) {
        const Product& p = products[i];
        if (!index_.emplace(p.product_id, i).second) {
            throw ParseError("duplicate product_id '" + p.product_id + "'");
        }
        if (p.title.empty()) throw ParseError("product '" + p.product_id + "' has empty title");
        if (p.category_path.empty() || p.category_path.size() > 4) {
            throw ParseError("product '" + p.product_id + "' category_path depth must be 1-4");
        }
        if (p.price < 0 || p.review_count < 0 || p.popularity < 0.0) {
            throw ParseError("product '" + p.product_id + "' has negative numeric field");
        }
    }

    std::set<std::vector<std::string>> paths;
    for (const Product& p : products) paths.insert(p.category_path);
    taxonomy.assign(paths.begin(), paths.end());

    std::vector<std::string> dangling;
    for (const Collection& c : collections) {
        if (c.sections.empty()) throw ParseError("collection '" + c.collection_id + "' has no sections");
        for (const Section& sec : c.sections) {
            if (sec.product_ids.empty()) {
                throw ParseError("collection '" + c.collection_id + "' has an empty section");
            }
            for (const std::string& id : sec.product_ids) {
                if (!index_.count(id)) dangling.push_back(c.collection_id + " -> " + id);
            }
        }
    }
    if (!dangling.empty()) {
        std::string msg = "dangling product references:";
        for (const std::string& d : dangling) msg += " [" + d + "]";
        throw ParseError(msg);
    }
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kCategoryNames = {
    "skirts",       "pants",      "jackets",    "coats",        "sneakers",   "boots",
    "sandals",      "loafers",    "backpacks",  "totes",        "clutches",   "wallets",
    "scarves",      "beanies",    "caps",       "belts",        "sunglasses", "watches",
    "earrings",     "necklaces",  "bracelets",  "rings",        "blouses",    "cardigans",
    "hoodies",      "sweaters",   "shirts",     "tees",         "dresses",    "jeans",
    "leggings",     "shorts",     "swimsuits",  "pajamas",      "socks",      "tights",
    "gloves",       "mittens",    "parkas",     "vests",        "blazers",    "jumpsuits",
    "overalls",     "raincoats",  "slippers",   "heels",        "flats",      "mules",
    "duffels",      "satchels",   "briefcases", "headbands",    "brooches",   "anklets",
    "ties",         "bowties",    "camisoles",  "tunics",       "ponchos",    "kimonos",
    "bodysuits",    "culottes",   "capris",     "joggers",      "trenchcoats", "peacoats",
    "windbreakers", "espadrilles"};

const std::vector<std::string> kRootCategories = {"apparel", "accessories", "footwear", "bags"};
const std::vector<std::string> kMidCategories = {"womens", "mens", "kids", "unisex"};

const std::vector<std::string> kAdjectives = {
    "cozy",    "bright", "classic", "daily", "simple", "premium", "urban",   "casual", "vintage", "modern",
    "light",   "soft",   "bold",    "breezy", "sleek",  "warm",    "crisp",   "pastel", "minimal", "sporty"};

const std::vector<std::string> kMaterials = {"cotton", "linen",  "wool",   "denim", "leather", "suede",
                                             "silk",   "velvet", "fleece", "canvas", "mesh",    "satin",
                                             "corduroy", "knit", "jersey", "nylon"};

const std::vector<std::string> kColors = {"navy",     "ivory", "olive", "charcoal", "blush",    "teal",
                                          "mustard",  "sage",  "coral", "slate",    "cream",    "khaki",
                                          "lavender", "rust",  "stone", "burgundy"};

const std::vector<std::string> kSeasons = {"spring", "summer", "autumn", "winter"};
const std::vector<std::string> kTitleTails = {"picks", "edit", "collection", "essentials", "favorites"};

const std::vector<std::string> kOnsets = {"b",  "br", "d",  "dr", "f", "fl", "g",  "gr", "k",  "kl",
                                          "l",  "m",  "n",  "p",  "pl", "r",  "s",  "st", "t",  "tr",
                                          "v",  "z",  "th", "sh", "qu"};
const std::vector<std::string> kNuclei = {"a", "e", "i", "o", "u", "ai", "ea", "io", "ou", "ar", "el", "in", "or", "un"};

// Pronounceable synthetic word, unique within the corpus vocabulary pools.
std::string fresh_word(Rng& rng, std::unordered_set<std::string>& used, int syllables) {
    static const std::string kTails = "nslxm";
    for (;;) {
        std::string w;
        for (int s = 0; s < syllables; ++s) {
            w += rng.pick(kOnsets);
            w += rng.pick(kNuclei);
        }
        if (rng.chance(0.4)) w += kTails[rng.index(kTails.size())];
        if (w.size() >= 4 && used.insert(w).second) return w;
    }
}

struct ConceptPool {
    std::vector<std::string> product_tokens;  // s_i: may appear in product text
    std::vector<std::string> query_tokens;    // q_i: paraphrases, query-only
};

void append_unique(std::vector<std::string>& items, const std::string& value) {
    if (std::find(items.begin(), items.end(), value) == items.end()) items.push_back(value);
}

// Weighted pick over category indices by remaining pool size.
std::size_t weighted_category(Rng& rng, const std::vector<std::vector<std::size_t>>& by_cat,
                              const std::vector<bool>& taken, std::size_t min_size) {
    double total = 0.0;
    for (std::size_t c = 0; c < by_cat.size(); ++c) {
        if (!taken[c] && by_cat[c].size() >= min_size) total += static_cast<double>(by_cat[c].size());
    }
    if (total == 0.0) {
        for (std::size_t c = 0; c < by_cat.size(); ++c) {
            if (!taken[c] && !by_cat[c].empty()) return c;
        }
        return static_cast<std::size_t>(-1);
    }
    double x = rng.unit() * total;
    for (std::size_t c = 0; c < by_cat.size(); ++c) {
        if (taken[c] || by_cat[c].size() < min_size) continue;
        x -= static_cast<double>(by_cat[c].size());
        if (x <= 0.0) return c;
    }
    return by_cat.size() - 1;
}

}  // namespace

CorpusBundle generate_synthetic_corpus(const SyntheticConfig& config) {
    if (config.n_categories < 2) throw ConfigError("n_categories must be >= 2");
    if (config.n_products < config.n_categories) throw ConfigError("n_products must be >= n_categories");
    if (config.n_collections < 1) throw ConfigError("n_collections must be >= 1");
    if (config.semantic_gap < 0.0 || config.semantic_gap > 1.0) {
        throw ConfigError("semantic_gap must be in [0,1]");
    }

    const double gap = config.semantic_gap;
    const std::size_t n_cats = static_cast<std::size_t>(config.n_categories);
    const std::size_t n_prods = static_cast<std::size_t>(config.n_products);
    const std::size_t n_colls = static_cast<std::size_t>(config.n_collections);

    Rng pool_rng(mix_seed(config.seed, 1));
    std::unordered_set<std::string> used_words(kCategoryNames.begin(), kCategoryNames.end());
    for (const auto* list : {&kAdjectives, &kMaterials, &kColors, &kSeasons, &kTitleTails,
                             &kRootCategories, &kMidCategories}) {
        used_words.insert(list->begin(), list->end());
    }

    // Category names, paths and query-side paraphrases.
    std::vector<std::string> cat_names;
    for (std::size_t c = 0; c < n_cats; ++c) {
        if (c < kCategoryNames.size()) {
            cat_names.push_back(kCategoryNames[c]);
        } else {
            cat_names.push_back(fresh_word(pool_rng, used_words, 2) + "s");
        }
    }
    std::vector<std::vector<std::string>> cat_paths(n_cats);
    std::vector<std::string> cat_paraphrase(n_cats);
    std::vector<std::vector<std::string>> cat_nouns(n_cats);
    for (std::size_t c = 0; c < n_cats; ++c) {
        std::vector<std::string> path{kRootCategories[pool_rng.index(kRootCategories.size())]};
        if (pool_rng.chance(0.6)) path.push_back(kMidCategories[pool_rng.index(kMidCategories.size())]);
        path.push_back(cat_names[c]);
        cat_paths[c] = std::move(path);
        cat_paraphrase[c] = fresh_word(pool_rng, used_words, 2);
        for (int k = 0; k < 4; ++k) cat_nouns[c].push_back(fresh_word(pool_rng, used_words, 2));
    }

    // Intent concepts: product-surface token s_i and its query-only paraphrase
    // q_i. Each concept lives in a few home categories, the way real intents
    // correlate with product kinds.
    const std::size_t n_concepts = std::max<std::size_t>(6, n_colls / 4);
    ConceptPool concepts;
    std::vector<std::vector<std::size_t>> concept_home(n_concepts);
    for (std::size_t i = 0; i < n_concepts; ++i) {
        concepts.product_tokens.push_back(fresh_word(pool_rng, used_words, 2));
        concepts.query_tokens.push_back(fresh_word(pool_rng, used_words, 3));
        concept_home[i] = pool_rng.sample_indices(n_cats, std::min<std::size_t>(4, n_cats));
    }

    std::vector<std::string> brands;
    for (int i = 0; i < 24; ++i) brands.push_back(fresh_word(pool_rng, used_words, 2));

    // Products with a geometric long tail over a shuffled category order.
    Rng prod_rng(mix_seed(config.seed, 2));
    std::vector<std::size_t> cat_order(n_cats);
    for (std::size_t c = 0; c < n_cats; ++c) cat_order[c] = c;
    prod_rng.shuffle(cat_order);
    const double rho = std::min(0.15, 4.0 / static_cast<double>(n_cats));

    CorpusBundle bundle;
    bundle.products.reserve(n_prods);
    std::vector<std::vector<std::size_t>> products_by_cat(n_cats);
    for (std::size_t i = 0; i < n_prods; ++i) {
        std::size_t rank;
        do {
            rank = static_cast<std::size_t>(std::log(1.0 - prod_rng.unit()) / std::log(1.0 - rho));
        } while (rank >= n_cats);
        const std::size_t cat = cat_order[rank];

        Product p;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "P%06zu", i);
        p.product_id = idbuf;
        p.category_path = cat_paths[cat];

        std::string title;
        if (prod_rng.chance(0.35)) title += brands[prod_rng.index(brands.size())] + " ";
        title += kAdjectives[prod_rng.index(kAdjectives.size())] + " ";
        title += cat_nouns[cat][prod_rng.index(cat_nouns[cat].size())];
        if (prod_rng.chance(0.4)) title += " " + cat_nouns[cat][prod_rng.index(cat_nouns[cat].size())];
        if (prod_rng.chance(0.3)) title += " " + kMaterials[prod_rng.index(kMaterials.size())];
        title += " " + cat_names[cat];
        p.title = title;

        p.price = std::max<std::int64_t>(100, static_cast<std::int64_t>(std::llround(
                      std::exp(prod_rng.gauss() * 0.9 + std::log(25000.0)) / 100.0)) * 100);
        p.brand = prod_rng.chance(0.8) ? brands[prod_rng.index(brands.size())] : "";
        p.tags.push_back(kAdjectives[prod_rng.index(kAdjectives.size())]);
        p.tags.push_back(cat_nouns[cat][prod_rng.index(cat_nouns[cat].size())]);
        if (prod_rng.chance(0.6)) append_unique(p.tags, kColors[prod_rng.index(kColors.size())]);
        p.extra_attrs.emplace_back("material", kMaterials[prod_rng.index(kMaterials.size())]);
        p.extra_attrs.emplace_back("color", kColors[prod_rng.index(kColors.size())]);
        if (prod_rng.chance(0.5)) p.extra_attrs.emplace_back("season", kSeasons[prod_rng.index(kSeasons.size())]);

        p.review_count = prod_rng.chance(0.15)
                             ? 0
                             : 1 + static_cast<std::int64_t>(std::exp(prod_rng.gauss() * 1.1 + 1.2));
        p.popularity = std::round(std::pow(static_cast<double>(p.review_count) + 1.0, 0.7) *
                                  prod_rng.uniform(0.5, 1.5) * 1e4) /
                       1e4;

        products_by_cat[cat].push_back(i);
        bundle.products.push_back(std::move(p));
    }

    // Collections: pick categories weighted by size, sample members, plant intent.
    Rng coll_rng(mix_seed(config.seed, 3));
    const double mean_target =
        std::clamp(4.5 * static_cast<double>(n_prods) / static_cast<double>(n_colls), 8.0, 99.46);
    for (std::size_t j = 0; j < n_colls; ++j) {
        Collection coll;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "C%04zu", j);
        coll.collection_id = idbuf;

        const double r = coll_rng.unit();
        const std::size_t want_cats = r < 0.15 ? 1 : (r < 0.60 ? 2 : 3);
        std::vector<bool> taken(n_cats, false);
        std::vector<std::size_t> cats;
        for (std::size_t t = 0; t < want_cats && t < n_cats; ++t) {
            const std::size_t c = weighted_category(coll_rng, products_by_cat, taken, 6);
            if (c == static_cast<std::size_t>(-1)) break;
            taken[c] = true;
            cats.push_back(c);
        }

        const double sigma = 0.45;
        std::size_t size = static_cast<std::size_t>(std::llround(
            std::exp(std::log(mean_target) - 0.5 * sigma * sigma + sigma * coll_rng.gauss())));
        std::size_t pool_total = 0;
        for (const std::size_t c : cats) pool_total += products_by_cat[c].size();
        const std::size_t upper = std::min<std::size_t>(200, pool_total);
        size = std::clamp<std::size_t>(size, std::min<std::size_t>(5, upper), upper);

        // Split the target size across the chosen categories by pool size.
        std::vector<std::vector<std::size_t>> picked_per_cat(cats.size());
        std::size_t picked_total = 0;
        for (std::size_t t = 0; t < cats.size(); ++t) {
            const std::size_t c = cats[t];
            std::size_t share = t + 1 == cats.size()
                                    ? size - picked_total
                                    : std::max<std::size_t>(
                                          2, size * products_by_cat[c].size() / pool_total);
            share = std::min(share, products_by_cat[c].size());
            if (picked_total + share > size) share = size - picked_total;
            const auto chosen = coll_rng.sample_indices(products_by_cat[c].size(), share);
            for (const std::size_t k : chosen) picked_per_cat[t].push_back(products_by_cat[c][k]);
            picked_total += share;
        }
        // Interleave categories round-robin: curators mix complementary
        // categories through a collection, so a section's products regularly
        // disagree with the category its name suggests.
        std::vector<std::size_t> member_rows;
        std::vector<std::size_t> member_cat;
        std::vector<std::size_t> offsets(cats.size(), 0);
        while (member_rows.size() < picked_total) {
            for (std::size_t t = 0; t < cats.size(); ++t) {
                if (offsets[t] < picked_per_cat[t].size()) {
                    member_rows.push_back(picked_per_cat[t][offsets[t]++]);
                    member_cat.push_back(cats[t]);
                }
            }
        }

        // Latent intent: 2-3 concepts drawn from the ones at home in the
        // collection's categories. The paraphrase draw is shared by the whole
        // collection, so each intent token is paraphrased with probability gap
        // but collections split into fully-lexical and fully-paraphrased ones;
        // the latter are invisible to term matching.
        const std::size_t want_concepts = coll_rng.chance(0.5) ? 2 : 3;
        std::vector<std::size_t> compatible;
        for (std::size_t ci = 0; ci < n_concepts; ++ci) {
            for (const std::size_t c : cats) {
                if (std::find(concept_home[ci].begin(), concept_home[ci].end(), c) !=
                    concept_home[ci].end()) {
                    compatible.push_back(ci);
                    break;
                }
            }
        }
        if (compatible.size() < want_concepts) {
            compatible.resize(n_concepts);
            for (std::size_t ci = 0; ci < n_concepts; ++ci) compatible[ci] = ci;
        }
        std::vector<std::size_t> concept_ids;
        for (const std::size_t k : coll_rng.sample_indices(compatible.size(), want_concepts)) {
            concept_ids.push_back(compatible[k]);
        }
        const bool paraphrased = coll_rng.chance(gap);

        std::string title;
        if (coll_rng.chance(0.6)) title += kAdjectives[coll_rng.index(kAdjectives.size())] + " ";
        for (const std::size_t ci : concept_ids) {
            title += (paraphrased ? concepts.query_tokens[ci] : concepts.product_tokens[ci]) + " ";
        }
        if (coll_rng.chance(0.4)) title += kSeasons[coll_rng.index(kSeasons.size())] + " ";
        if (coll_rng.chance(0.7)) {
            title += kTitleTails[coll_rng.index(kTitleTails.size())];
        } else {
            title.pop_back();
        }
        coll.title = title;

        coll.start_date.year = coll_rng.chance(0.4) ? 2020 : 2021;
        coll.start_date.month = static_cast<int>(coll_rng.uniform_int(1, 12));
        coll.start_date.day = static_cast<int>(coll_rng.uniform_int(1, 28));

        // Sections: contiguous slices of the category-grouped member list.
        const double sr = coll_rng.unit();
        std::size_t n_sections = sr < 0.50 ? 1 : (sr < 0.92 ? 2 : 3);
        n_sections = std::min(n_sections, member_rows.size());
        const std::size_t per = member_rows.size() / n_sections;
        std::size_t cursor = 0;
        for (std::size_t s = 0; s < n_sections; ++s) {
            Section sec;
            const std::size_t end = s + 1 == n_sections ? member_rows.size() : cursor + per;
            for (std::size_t k = cursor; k < end; ++k) {
                sec.product_ids.push_back(bundle.products[member_rows[k]].product_id);
            }
            const std::size_t dom_cat = member_cat[cursor];
            std::string name;
            if (coll_rng.chance(0.4)) name += kAdjectives[coll_rng.index(kAdjectives.size())] + " ";
            if (coll_rng.chance(0.7)) {
                const std::size_t ci = concept_ids[coll_rng.index(concept_ids.size())];
                name += (paraphrased ? concepts.query_tokens[ci] : concepts.product_tokens[ci]) + " ";
            }
            name += paraphrased ? cat_paraphrase[dom_cat] : cat_names[dom_cat];
            sec.name = name;
            coll.sections.push_back(std::move(sec));
            cursor = end;
        }

        // Plant intent tokens into member products: one forced token each, the
        // rest with probability (1 - gap).
        PlantedTruth truth;
        for (const std::size_t ci : concept_ids) truth.intent_tokens.push_back(concepts.product_tokens[ci]);
        std::sort(truth.intent_tokens.begin(), truth.intent_tokens.end());
        for (const std::size_t row : member_rows) {
            Product& p = bundle.products[row];
            const std::size_t forced = concept_ids[coll_rng.index(concept_ids.size())];
            append_unique(p.tags, concepts.product_tokens[forced]);
            for (const std::size_t ci : concept_ids) {
                if (ci != forced && coll_rng.chance(1.0 - gap)) {
                    append_unique(p.tags, concepts.product_tokens[ci]);
                }
            }
            truth.product_ids.push_back(p.product_id);
        }
        bundle.planted_truth[coll.collection_id] = std::move(truth);
        bundle.collections.push_back(std::move(coll));
    }

    bundle.finalize();
    return bundle;
}

// ---------------------------------------------------------------------------
// Stats
// ---------------------------------------------------------------------------

CorpusStats corpus_stats(const CorpusBundle& bundle) {
    CorpusStats s;
    s.n_collections = static_cast<std::int64_t>(bundle.collections.size());
    for (const Collection& c : bundle.collections) {
        s.n_sections += static_cast<std::int64_t>(c.sections.size());
        for (const Section& sec : c.sections) {
            s.n_products_in_collections += static_cast<std::int64_t>(sec.product_ids.size());
        }
    }
    std::set<std::string> leaves;
    for (const Product& p : bundle.products) leaves.insert(p.leaf_category());
    s.n_categories = static_cast<std::int64_t>(leaves.size());
    s.avg_products_per_collection =
        s.n_collections == 0 ? 0.0
                             : static_cast<double>(s.n_products_in_collections) /
                                   static_cast<double>(s.n_collections);
    s.avg_products_per_section =
        s.n_sections == 0 ? 0.0
                          : static_cast<double>(s.n_products_in_collections) /
                                static_cast<double>(s.n_sections);
    return s;
}

// ---------------------------------------------------------------------------
// Line-delimited JSON IO
// ---------------------------------------------------------------------------

namespace {

json product_to_json(const Product& p) {
    json j;
    j["product_id"] = p.product_id;
    j["title"] = p.title;
    j["category_path"] = p.category_path;
    j["price"] = p.price;
    j["brand"] = p.brand;
    j["tags"] = p.tags;
    json extras = json::array();
    for (const auto& [k, v] : p.extra_attrs) extras.push_back(json::array({k, v}));
    j["extra_attrs"] = std::move(extras);
    j["review_count"] = p.review_count;
    j["popularity"] = p.popularity;
    return j;
}

json collection_to_json(const Collection& c) {
    json j;
    j["collection_id"] = c.collection_id;
    j["title"] = c.title;
    j["start_date"] = c.start_date.iso();
    json sections = json::array();
    for (const Section& sec : c.sections) {
        sections.push_back(json{{"name", sec.name}, {"product_ids", sec.product_ids}});
    }
    j["sections"] = std::move(sections);
    if (!c.aug_category.empty()) j["aug_category"] = c.aug_category;
    if (!c.aug_source_id.empty()) j["aug_source_id"] = c.aug_source_id;
    return j;
}

template <typename Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        fn(line_no, j);
    }
}

}  // namespace

std::string serialize_products(const CorpusBundle& bundle) {
    std::string out;
    for (const Product& p : bundle.products) {
        out += product_to_json(p).dump();
        out += '\n';
    }
    return out;
}

std::string serialize_collections(const CorpusBundle& bundle) {
    std::string out;
    for (const Collection& c : bundle.collections) {
        out += collection_to_json(c).dump();
        out += '\n';
    }
    return out;
}

void save_products(const CorpusBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << serialize_products(bundle);
}

void save_collections(const CorpusBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << serialize_collections(bundle);
}

void save_planted_truth(const CorpusBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    for (const auto& [cid, truth] : bundle.planted_truth) {
        json j;
        j["collection_id"] = cid;
        j["intent_tokens"] = truth.intent_tokens;
        j["product_ids"] = truth.product_ids;
        out << j.dump() << '\n';
    }
}

std::vector<Product> load_products(const std::string& path) {
    std::vector<Product> products;
    for_each_jsonl(path, [&](std::size_t line_no, const json& j) {
        try {
            Product p;
            p.product_id = j.at("product_id").get<std::string>();
            p.title = j.at("title").get<std::string>();
            p.category_path = j.at("category_path").get<std::vector<std::string>>();
            p.price = j.at("price").get<std::int64_t>();
            p.brand = j.value("brand", std::string{});
            p.tags = j.value("tags", std::vector<std::string>{});
            if (j.contains("extra_attrs")) {
                for (const auto& kv : j.at("extra_attrs")) {
                    p.extra_attrs.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
                }
            }
            p.review_count = j.value("review_count", std::int64_t{0});
            p.popularity = j.value("popularity", 0.0);
            products.push_back(std::move(p));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    });
    return products;
}

CorpusBundle load_corpus(const std::string& products_path, const std::string& collections_path) {
    CorpusBundle bundle;
    bundle.products = load_products(products_path);
    for_each_jsonl(collections_path, [&](std::size_t line_no, const json& j) {
        try {
            Collection c;
            c.collection_id = j.at("collection_id").get<std::string>();
            c.title = j.at("title").get<std::string>();
            c.start_date = Date::parse(j.at("start_date").get<std::string>());
            for (const auto& sj : j.at("sections")) {
                Section sec;
                sec.name = sj.at("name").get<std::string>();
                sec.product_ids = sj.at("product_ids").get<std::vector<std::string>>();
                c.sections.push_back(std::move(sec));
            }
            c.aug_category = j.value("aug_category", std::string{});
            c.aug_source_id = j.value("aug_source_id", std::string{});
            bundle.collections.push_back(std::move(c));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(collections_path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    });
    bundle.finalize();
    if (bundle.collections.empty()) {
        bundle.load_warnings.push_back("corpus has zero collections");
    }
    return bundle;
}

void load_planted_truth(CorpusBundle& bundle, const std::string& truth_path) {
    for_each_jsonl(truth_path, [&](std::size_t line_no, const json& j) {
        try {
            PlantedTruth truth;
            const std::string cid = j.at("collection_id").get<std::string>();
            truth.intent_tokens = j.at("intent_tokens").get<std::vector<std::string>>();
            truth.product_ids = j.at("product_ids").get<std::vector<std::string>>();
            bundle.planted_truth[cid] = std::move(truth);
        } catch (const std::exception& e) {
            throw ParseError(truth_path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    });
}

std::uint64_t bundle_hash(const CorpusBundle& bundle) {
    return fnv1a64(serialize_collections(bundle), fnv1a64(serialize_products(bundle)));
}

}  // namespace colligo
