#include "colligo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "colligo/rng.hpp"
#include "colligo/text.hpp"

namespace colligo {

using json = nlohmann::ordered_json;

EvalTaskSet build_eval_tasks(const CorpusBundle& bundle, std::int64_t min_review_count,
                             std::size_t min_gt) {
    if (min_gt < 1) throw ConfigError("min_gt must be >= 1");
    EvalTaskSet out;
    std::unordered_set<std::string> eval_ids;
    for (const Product& p : bundle.products) {
        if (p.review_count >= min_review_count) {
            out.eval_products.push_back(p);
            eval_ids.insert(p.product_id);
        }
    }
    for (const Collection& coll : bundle.collections) {
        std::vector<std::string> gt;
        for (const std::string& id : coll.member_ids()) {
            if (eval_ids.count(id)) gt.push_back(id);
        }
        if (gt.size() < min_gt) continue;
        std::sort(gt.begin(), gt.end());
        for (const Section& sec : coll.sections) {
            EvalTask task;
            task.query_text = render_query(coll.title, sec.name, coll.start_date);
            task.p_gt = gt;
            if (!coll.aug_category.empty()) task.c_gt = coll.aug_category;
            task.collection_id = coll.collection_id;
            out.tasks.push_back(std::move(task));
        }
    }
    return out;
}

double recall_at_k(const std::vector<std::string>& retrieved, const EvalTask& task) {
    if (task.p_gt.empty()) throw LookupError("recall_at_k: task has empty P_gt");
    const std::unordered_set<std::string> gt(task.p_gt.begin(), task.p_gt.end());
    std::size_t hits = 0;
    for (const std::string& id : retrieved) hits += gt.count(id);
    return static_cast<double>(hits) / static_cast<double>(gt.size());
}

double precision_at_k(const std::vector<std::string>& retrieved,
                      const std::function<std::string(const std::string&)>& category_of,
                      const EvalTask& task) {
    if (!task.c_gt) throw LookupError("precision_at_k: task has no C_gt");
    if (retrieved.empty()) return 0.0;
    std::size_t hits = 0;
    for (const std::string& id : retrieved) hits += category_of(id) == *task.c_gt ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(retrieved.size());
}

Retriever encoder_retriever(const EmbeddingIndex& index, const EncoderParams& params,
                            const Vocabulary& vocab) {
    Retriever r;
    std::map<std::string, std::string> categories;
    for (std::size_t i = 0; i < index.size(); ++i) categories[index.product_ids[i]] = index.category[i];
    r.retrieve = [&index, &params, &vocab](const std::string& query, std::size_t k) {
        return retrieve_topk(index, embed(params, tokenize(query, vocab)), k);
    };
    r.category_of = [categories = std::move(categories)](const std::string& id) {
        const auto it = categories.find(id);
        if (it == categories.end()) throw LookupError("unknown product_id '" + id + "'");
        return it->second;
    };
    return r;
}

Retriever bm25_retriever(const Bm25Index& index, std::unordered_set<std::string> stopwords,
                         bool drop_date) {
    Retriever r;
    r.retrieve = [&index, stopwords = std::move(stopwords), drop_date](const std::string& query,
                                                                       std::size_t k) {
        return index.search(query, k, stopwords, drop_date);
    };
    r.category_of = [&index](const std::string& id) { return index.category_of(id); };
    return r;
}

namespace {

// Category a task aggregates under: C_gt when present, else the majority leaf
// category of its ground truth (ties to the lexicographically smallest).
std::string task_category(const EvalTask& task,
                          const std::function<std::string(const std::string&)>& category_of) {
    if (task.c_gt) return *task.c_gt;
    std::map<std::string, int> counts;
    for (const std::string& id : task.p_gt) ++counts[category_of(id)];
    std::string best;
    int best_n = -1;
    for (const auto& [cat, n] : counts) {
        if (n > best_n) {
            best = cat;
            best_n = n;
        }
    }
    return best;
}

}  // namespace

EvalReport run_offline_eval(const Retriever& retriever, const std::vector<EvalTask>& tasks,
                            std::size_t k, const std::string& model_tag, std::int64_t step,
                            unsigned n_threads) {
    EvalReport report;
    report.model_tag = model_tag;
    report.step = step;
    report.k = k;
    report.n_tasks = static_cast<int>(tasks.size());
    if (tasks.empty()) return report;  // empty report with zero tasks

    struct TaskResult {
        std::string category;
        double recall = 0.0;
        std::optional<double> precision;
        bool overflow = false;
    };
    std::vector<TaskResult> results(tasks.size());

    const auto eval_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const EvalTask& task = tasks[i];
            const auto ranked = retriever.retrieve(task.query_text, k);
            std::vector<std::string> ids;
            ids.reserve(ranked.size());
            for (const auto& [id, score] : ranked) ids.push_back(id);
            TaskResult& res = results[i];
            res.recall = recall_at_k(ids, task);
            if (task.c_gt) res.precision = precision_at_k(ids, retriever.category_of, task);
            res.category = task_category(task, retriever.category_of);
            res.overflow = task.p_gt.size() > k;
        }
    };

    if (n_threads <= 1) {
        eval_range(0, tasks.size());
    } else {
        std::vector<std::thread> workers;
        const std::size_t chunk = (tasks.size() + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            const std::size_t begin = std::min<std::size_t>(t * chunk, tasks.size());
            const std::size_t end = std::min<std::size_t>(begin + chunk, tasks.size());
            if (begin < end) workers.emplace_back(eval_range, begin, end);
        }
        for (std::thread& w : workers) w.join();
    }

    std::map<std::string, CategoryMetrics> by_cat;
    for (const TaskResult& res : results) {
        CategoryMetrics& m = by_cat[res.category];
        m.category = res.category;
        m.recall += res.recall;
        ++m.n_recall_tasks;
        if (res.precision) {
            m.precision += *res.precision;
            ++m.n_precision_tasks;
            ++report.n_precision_tasks;
        }
        if (res.overflow) ++report.n_overflow_tasks;
    }

    double recall_sum = 0.0, precision_sum = 0.0;
    int n_prec_cats = 0;
    for (auto& [cat, m] : by_cat) {
        m.recall /= static_cast<double>(m.n_recall_tasks);
        recall_sum += m.recall;
        if (m.n_precision_tasks > 0) {
            m.precision /= static_cast<double>(m.n_precision_tasks);
            precision_sum += m.precision;
            ++n_prec_cats;
        }
        report.per_category.push_back(m);
    }
    report.avg_recall = recall_sum / static_cast<double>(by_cat.size());
    report.avg_precision = n_prec_cats == 0 ? 0.0 : precision_sum / static_cast<double>(n_prec_cats);
    return report;
}

void save_report_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << "category,recall_at_k,n_recall_tasks,precision_at_k,n_precision_tasks\n";
    char buf[256];
    for (const CategoryMetrics& m : report.per_category) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%d,%.6f,%d\n", m.category.c_str(), m.recall,
                      m.n_recall_tasks, m.precision, m.n_precision_tasks);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "Avg.,%.6f,%d,%.6f,%d\n", report.avg_recall, report.n_tasks,
                  report.avg_precision, report.n_precision_tasks);
    out << buf;
}

std::string format_report_table(const EvalReport& report) {
    std::ostringstream out;
    out << "Recall@" << report.k << " / Precision@" << report.k << " - " << report.model_tag;
    if (report.step > 0) out << " (step " << report.step << ")";
    out << "\n";
    std::size_t width = 8;
    for (const CategoryMetrics& m : report.per_category) width = std::max(width, m.category.size());
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-*s  %8s %6s  %8s %6s\n", static_cast<int>(width), "category",
                  "recall", "tasks", "prec.", "tasks");
    out << buf;
    for (const CategoryMetrics& m : report.per_category) {
        std::snprintf(buf, sizeof(buf), "%-*s  %8.4f %6d  %8.4f %6d\n", static_cast<int>(width),
                      m.category.c_str(), m.recall, m.n_recall_tasks, m.precision,
                      m.n_precision_tasks);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%-*s  %8.4f %6d  %8.4f %6d\n", static_cast<int>(width), "Avg.",
                  report.avg_recall, report.n_tasks, report.avg_precision, report.n_precision_tasks);
    out << buf;
    if (report.n_overflow_tasks > 0) {
        out << "note: " << report.n_overflow_tasks << " task(s) have |P_gt| > K; their max recall is K/|P_gt|\n";
    }
    return out.str();
}

void save_report_table(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << format_report_table(report);
}

// --- Online metrics ---------------------------------------------------------

void validate_log(const InteractionLog& log) {
    if (log.views < 0 || log.clicks < 0 || log.purchases < 0 || log.n_products < 0) {
        throw ParseError("interaction log '" + log.collection_id + "' has negative counts");
    }
    const std::int64_t bound = log.views * log.n_products;
    if (log.clicks > bound || log.purchases > bound) {
        throw ParseError("interaction log '" + log.collection_id + "' exceeds views*n_products bound");
    }
    if (static_cast<std::int64_t>(log.purchased_product_ids.size()) > log.n_products) {
        throw ParseError("interaction log '" + log.collection_id +
                         "' lists more purchased products than the collection holds");
    }
}

OnlineMetrics compute_online_metrics(const InteractionLog& log) {
    if (log.views <= 0) throw LookupError("compute_online_metrics: views must be > 0");
    if (log.n_products <= 0) throw LookupError("compute_online_metrics: n_products must be > 0");
    OnlineMetrics m;
    m.ctr = static_cast<double>(log.clicks) / static_cast<double>(log.views);
    m.cvr = static_cast<double>(log.purchases) / static_cast<double>(log.views);
    m.order_diversity = static_cast<double>(log.purchased_product_ids.size()) /
                        static_cast<double>(log.n_products);
    return m;
}

double relative_score(const std::vector<double>& model_scores,
                      const std::vector<double>& expert_scores) {
    if (model_scores.empty() || expert_scores.empty()) {
        throw ConfigError("relative_score: both score lists must be nonempty");
    }
    const double model_mean = std::accumulate(model_scores.begin(), model_scores.end(), 0.0) /
                              static_cast<double>(model_scores.size());
    const double expert_mean = std::accumulate(expert_scores.begin(), expert_scores.end(), 0.0) /
                               static_cast<double>(expert_scores.size());
    if (expert_mean == 0.0) throw ConfigError("relative_score: expert mean is zero");
    return model_mean / expert_mean;
}

void save_logs(const std::vector<InteractionLog>& logs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    for (const InteractionLog& log : logs) {
        out << json{{"collection_id", log.collection_id},
                    {"views", log.views},
                    {"clicks", log.clicks},
                    {"purchases", log.purchases},
                    {"purchased_product_ids", log.purchased_product_ids},
                    {"n_products", log.n_products}}
                   .dump()
            << '\n';
    }
}

std::vector<InteractionLog> load_logs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::vector<InteractionLog> logs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            InteractionLog log;
            log.collection_id = j.at("collection_id").get<std::string>();
            log.views = j.at("views").get<std::int64_t>();
            log.clicks = j.at("clicks").get<std::int64_t>();
            log.purchases = j.at("purchases").get<std::int64_t>();
            log.purchased_product_ids = j.at("purchased_product_ids").get<std::vector<std::string>>();
            log.n_products = j.at("n_products").get<std::int64_t>();
            validate_log(log);
            logs.push_back(std::move(log));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return logs;
}

InteractionLog simulate_interaction_log(const std::string& collection_id,
                                        const std::vector<std::pair<std::string, double>>& ranked,
                                        std::int64_t views, std::uint64_t seed, double base_ctr,
                                        double base_cvr) {
    if (ranked.empty()) throw ConfigError("simulate_interaction_log: empty product list");
    if (views <= 0) throw ConfigError("simulate_interaction_log: views must be > 0");
    InteractionLog log;
    log.collection_id = collection_id;
    log.views = views;
    log.n_products = static_cast<std::int64_t>(ranked.size());

    double mean_score = 0.0;
    for (const auto& [id, score] : ranked) mean_score += std::clamp(score, 0.0, 1.0);
    mean_score /= static_cast<double>(ranked.size());

    Rng rng(seed);
    const double click_p = std::clamp(base_ctr * (0.5 + mean_score), 0.0, 1.0);
    for (std::int64_t v = 0; v < views; ++v) {
        if (!rng.chance(click_p)) continue;
        ++log.clicks;
        if (rng.chance(std::clamp(base_cvr * (0.5 + mean_score), 0.0, 1.0))) {
            ++log.purchases;
            // Geometric preference toward the top of the ranking.
            std::size_t slot = 0;
            while (slot + 1 < ranked.size() && rng.chance(0.7)) ++slot;
            const std::string& pid = ranked[slot].first;
            if (std::find(log.purchased_product_ids.begin(), log.purchased_product_ids.end(), pid) ==
                log.purchased_product_ids.end()) {
                log.purchased_product_ids.push_back(pid);
            }
        }
    }
    validate_log(log);
    return log;
}

// --- Reorderer ---------------------------------------------------------------

ReorderResult reorder_products(const std::vector<ReorderCandidate>& candidates,
                               const std::vector<ReorderTrainingPair>& training_pairs) {
    if (training_pairs.size() < 2) throw ConfigError("reorder_products: need >= 2 training pairs");
    for (const ReorderTrainingPair& pair : training_pairs) {
        if (!std::isfinite(pair.popularity) || !std::isfinite(pair.review_count) ||
            !std::isfinite(pair.label)) {
            throw ConfigError("reorder_products: non-finite training pair");
        }
    }

    const Eigen::Index n = static_cast<Eigen::Index>(training_pairs.size());
    Eigen::MatrixXd design(n, 3);
    Vec labels(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const ReorderTrainingPair& pair = training_pairs[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        design(i, 1) = pair.popularity;
        design(i, 2) = pair.review_count;
        labels(i) = pair.label;
    }

    ReorderResult result;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) {
        result.used_fallback = true;
    } else {
        result.coefficients = qr.solve(labels);
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto score = [&](const ReorderCandidate& c) {
        return result.used_fallback
                   ? c.popularity
                   : result.coefficients[0] + result.coefficients[1] * c.popularity +
                         result.coefficients[2] * c.review_count;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return score(candidates[a]) > score(candidates[b]);
    });
    for (const std::size_t i : order) result.ordered_ids.push_back(candidates[i].product_id);
    return result;
}

}  // namespace colligo
