#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "colligo/bm25.hpp"
#include "colligo/corpus.hpp"
#include "colligo/retrieval.hpp"

namespace colligo {

struct EvalTask {
    std::string query_text;
    std::vector<std::string> p_gt;  // ground-truth product ids, ascending
    std::optional<std::string> c_gt;  // present only for category-augmented queries
    std::string collection_id;
};

struct EvalTaskSet {
    std::vector<Product> eval_products;  // review_count >= min_review_count
    std::vector<EvalTask> tasks;
};

// One task per (collection, section) query whose collection has at least
// min_gt evaluation products. C_gt is attached for augmentation-derived
// collections.
EvalTaskSet build_eval_tasks(const CorpusBundle& bundle, std::int64_t min_review_count,
                             std::size_t min_gt);

double recall_at_k(const std::vector<std::string>& retrieved, const EvalTask& task);

double precision_at_k(const std::vector<std::string>& retrieved,
                      const std::function<std::string(const std::string&)>& category_of,
                      const EvalTask& task);

// A retrieval mode under evaluation: query -> ranked ids, plus the category
// lookup used for precision and per-category aggregation.
struct Retriever {
    std::function<std::vector<std::pair<std::string, double>>(const std::string& query, std::size_t k)>
        retrieve;
    std::function<std::string(const std::string& product_id)> category_of;
};

Retriever encoder_retriever(const EmbeddingIndex& index, const EncoderParams& params,
                            const Vocabulary& vocab);
Retriever bm25_retriever(const Bm25Index& index, std::unordered_set<std::string> stopwords,
                         bool drop_date = true);

struct CategoryMetrics {
    std::string category;
    double recall = 0.0;
    int n_recall_tasks = 0;
    double precision = 0.0;
    int n_precision_tasks = 0;
};

struct EvalReport {
    std::string model_tag;
    std::int64_t step = 0;
    std::size_t k = 100;
    std::vector<CategoryMetrics> per_category;  // category ascending
    // Macro means: per-category task means, then the mean over categories.
    double avg_recall = 0.0;
    double avg_precision = 0.0;
    int n_tasks = 0;
    int n_precision_tasks = 0;
    // Tasks with |P_gt| > K, whose maximum attainable recall is K/|P_gt|.
    int n_overflow_tasks = 0;
};

// Pure function of (retriever, tasks, k); n_threads only shards the per-task
// retrievals and does not change the result.
EvalReport run_offline_eval(const Retriever& retriever, const std::vector<EvalTask>& tasks,
                            std::size_t k, const std::string& model_tag, std::int64_t step = 0,
                            unsigned n_threads = 1);

void save_report_csv(const EvalReport& report, const std::string& path);
void save_report_table(const EvalReport& report, const std::string& path);
std::string format_report_table(const EvalReport& report);

// --- Online metric calculators ---------------------------------------------

struct InteractionLog {
    std::string collection_id;
    std::int64_t views = 0;
    std::int64_t clicks = 0;
    std::int64_t purchases = 0;
    std::vector<std::string> purchased_product_ids;  // distinct
    std::int64_t n_products = 0;
};

struct OnlineMetrics {
    double ctr = 0.0;
    double cvr = 0.0;
    double order_diversity = 0.0;
};

void validate_log(const InteractionLog& log);
OnlineMetrics compute_online_metrics(const InteractionLog& log);

// mean(model) / mean(expert).
double relative_score(const std::vector<double>& model_scores,
                      const std::vector<double>& expert_scores);

void save_logs(const std::vector<InteractionLog>& logs, const std::string& path);
std::vector<InteractionLog> load_logs(const std::string& path);

// Seeded stand-in for live traffic: click/purchase propensities grow with the
// collection's mean retrieval score, so better-matched collections log better.
InteractionLog simulate_interaction_log(const std::string& collection_id,
                                        const std::vector<std::pair<std::string, double>>& ranked,
                                        std::int64_t views, std::uint64_t seed,
                                        double base_ctr = 0.05, double base_cvr = 0.25);

// --- Linear-regression reorderer --------------------------------------------

struct ReorderCandidate {
    std::string product_id;
    double popularity = 0.0;
    double review_count = 0.0;
};

struct ReorderTrainingPair {
    double popularity = 0.0;
    double review_count = 0.0;
    double label = 0.0;
};

struct ReorderResult {
    std::vector<std::string> ordered_ids;
    bool used_fallback = false;  // singular fit -> popularity order
    Eigen::Vector3d coefficients = Eigen::Vector3d::Zero();  // intercept, popularity, reviews
};

// OLS with intercept on (popularity, review_count) -> label; candidates sorted
// by fitted score descending, stable on ties. A singular design matrix falls
// back to popularity-descending order.
ReorderResult reorder_products(const std::vector<ReorderCandidate>& candidates,
                               const std::vector<ReorderTrainingPair>& training_pairs);

}  // namespace colligo
