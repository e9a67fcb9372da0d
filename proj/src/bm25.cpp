#include "colligo/bm25.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "colligo/rng.hpp"

namespace colligo {

using json = nlohmann::ordered_json;

std::vector<std::string> Bm25Index::space_tokenize(const std::string& text) {
    std::vector<std::string> terms;
    std::string current;
    const auto flush = [&] {
        if (!current.empty() && current != "[sep]" && current != "[unk]") {
            terms.push_back(current);
        }
        current.clear();
    };
    for (const char raw : text) {
        const unsigned char c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            flush();
        } else {
            current += static_cast<char>(std::tolower(c));
        }
    }
    flush();
    return terms;
}

Bm25Index Bm25Index::build(const std::vector<Bm25Doc>& docs, double k1, double b) {
    if (docs.empty()) throw ConfigError("empty corpus");
    if (k1 <= 0.0) throw ConfigError("k1 must be > 0");
    if (b < 0.0 || b > 1.0) throw ConfigError("b must be in [0,1]");

    Bm25Index index;
    index.k1_ = k1;
    index.b_ = b;

    std::vector<std::size_t> order(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t c) { return docs[a].doc_id < docs[c].doc_id; });

    std::int64_t total_len = 0;
    for (const std::size_t i : order) {
        const Bm25Doc& doc = docs[i];
        const std::size_t pos = index.doc_ids_.size();
        if (!index.doc_pos_.emplace(doc.doc_id, pos).second) {
            throw ConfigError("duplicate doc_id '" + doc.doc_id + "'");
        }
        index.doc_ids_.push_back(doc.doc_id);
        index.doc_category_.push_back(doc.category);

        std::map<std::string, std::uint32_t> tf;
        const auto terms = space_tokenize(doc.text);
        for (const std::string& t : terms) ++tf[t];
        index.doc_len_.push_back(static_cast<std::int64_t>(terms.size()));
        total_len += static_cast<std::int64_t>(terms.size());
        for (const auto& [term, freq] : tf) {
            index.postings_[term].emplace_back(static_cast<std::uint32_t>(pos), freq);
        }
    }
    index.avg_doc_len_ = static_cast<double>(total_len) / static_cast<double>(docs.size());
    return index;
}

double Bm25Index::idf(std::size_t df) const {
    const double n = static_cast<double>(n_docs());
    const double nq = static_cast<double>(df);
    return std::log(1.0 + (n - nq + 0.5) / (nq + 0.5));
}

double Bm25Index::score_at(const std::vector<std::string>& query_terms, std::size_t pos) const {
    const double len = static_cast<double>(doc_len_[pos]);
    const double norm = 1.0 - b_ + b_ * len / avg_doc_len_;
    double total = 0.0;
    for (const std::string& term : query_terms) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& list = it->second;
        const auto hit = std::lower_bound(
            list.begin(), list.end(), pos,
            [](const auto& entry, std::size_t p) { return entry.first < p; });
        if (hit == list.end() || hit->first != pos) continue;
        const double tf = static_cast<double>(hit->second);
        total += idf(list.size()) * tf * (k1_ + 1.0) / (tf + k1_ * norm);
    }
    return total;
}

double Bm25Index::score(const std::vector<std::string>& query_terms, const std::string& doc_id) const {
    const auto it = doc_pos_.find(doc_id);
    if (it == doc_pos_.end()) throw LookupError("unknown doc_id '" + doc_id + "'");
    return score_at(query_terms, it->second);
}

const std::string& Bm25Index::category_of(const std::string& doc_id) const {
    const auto it = doc_pos_.find(doc_id);
    if (it == doc_pos_.end()) throw LookupError("unknown doc_id '" + doc_id + "'");
    return doc_category_[it->second];
}

std::vector<std::pair<std::string, double>> Bm25Index::search(
    const std::string& query, std::size_t k, const std::unordered_set<std::string>& stopwords,
    bool drop_date) const {
    if (k < 1) throw ConfigError("k must be >= 1");
    std::string q = query;
    if (drop_date) {
        const std::size_t at = q.rfind("[SEP]");
        if (at != std::string::npos) q.resize(at);
    }
    std::vector<std::string> terms;
    for (std::string& t : space_tokenize(q)) {
        if (!stopwords.count(t)) terms.push_back(std::move(t));
    }

    // Accumulate scores doc-wise over the postings of each query term (bag
    // semantics: a repeated term contributes once per occurrence).
    std::vector<double> scores(n_docs(), 0.0);
    std::vector<std::uint32_t> touched;
    for (const std::string& term : terms) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double term_idf = idf(it->second.size());
        for (const auto& [pos, tf] : it->second) {
            if (scores[pos] == 0.0) touched.push_back(pos);
            const double len = static_cast<double>(doc_len_[pos]);
            const double norm = 1.0 - b_ + b_ * len / avg_doc_len_;
            scores[pos] += term_idf * static_cast<double>(tf) * (k1_ + 1.0) /
                           (static_cast<double>(tf) + k1_ * norm);
        }
    }

    std::sort(touched.begin(), touched.end());
    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(touched.size());
    for (const std::uint32_t pos : touched) {
        if (scores[pos] > 0.0) ranked.emplace_back(doc_ids_[pos], scores[pos]);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

std::vector<std::string> Bm25Index::sample_hard_negatives(
    const std::string& query, const std::unordered_set<std::string>& positives, std::size_t n,
    std::uint64_t seed) const {
    if (n == 0) return {};
    const std::size_t pool_k = n + positives.size() + 50;
    std::vector<std::string> negatives;
    std::unordered_set<std::string> chosen;
    for (const auto& [doc_id, score] : search(query, pool_k)) {
        if (negatives.size() == n) break;
        if (positives.count(doc_id)) continue;
        negatives.push_back(doc_id);
        chosen.insert(doc_id);
    }
    if (negatives.size() < n) {
        std::vector<std::string> rest;
        for (const std::string& id : doc_ids_) {
            if (!positives.count(id) && !chosen.count(id)) rest.push_back(id);
        }
        Rng rng(seed);
        const auto extra = rng.sample_indices(rest.size(), n - negatives.size());
        for (const std::size_t i : extra) negatives.push_back(rest[i]);
    }
    return negatives;
}

void Bm25Index::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << json{{"format", "colligo-bm25-v1"},
                {"n_docs", n_docs()},
                {"k1", k1_},
                {"b", b_}}
               .dump()
        << '\n';
    for (std::size_t pos = 0; pos < doc_ids_.size(); ++pos) {
        out << json{{"doc_id", doc_ids_[pos]},
                    {"len", doc_len_[pos]},
                    {"category", doc_category_[pos]}}
                   .dump()
            << '\n';
    }
    std::vector<std::string> terms;
    terms.reserve(postings_.size());
    for (const auto& [term, list] : postings_) terms.push_back(term);
    std::sort(terms.begin(), terms.end());
    for (const std::string& term : terms) {
        json entries = json::array();
        for (const auto& [pos, tf] : postings_.at(term)) entries.push_back(json::array({pos, tf}));
        out << json{{"term", term}, {"postings", std::move(entries)}}.dump() << '\n';
    }
}

Bm25Index Bm25Index::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty index file");
    json header = json::parse(line);
    if (header.value("format", "") != "colligo-bm25-v1") {
        throw ParseError(path + ": not a colligo bm25 index");
    }
    Bm25Index index;
    index.k1_ = header.at("k1").get<double>();
    index.b_ = header.at("b").get<double>();
    const std::size_t n = header.at("n_docs").get<std::size_t>();

    std::int64_t total_len = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw ParseError(path + ": truncated doc table");
        json j = json::parse(line);
        index.doc_ids_.push_back(j.at("doc_id").get<std::string>());
        index.doc_len_.push_back(j.at("len").get<std::int64_t>());
        index.doc_category_.push_back(j.at("category").get<std::string>());
        index.doc_pos_[index.doc_ids_.back()] = i;
        total_len += index.doc_len_.back();
    }
    index.avg_doc_len_ = static_cast<double>(total_len) / static_cast<double>(n);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        auto& list = index.postings_[j.at("term").get<std::string>()];
        for (const auto& entry : j.at("postings")) {
            list.emplace_back(entry.at(0).get<std::uint32_t>(), entry.at(1).get<std::uint32_t>());
        }
    }
    return index;
}

}  // namespace colligo
