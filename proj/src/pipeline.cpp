#include "colligo/pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "colligo/hash.hpp"
#include "colligo/rng.hpp"
#include "colligo/text.hpp"

namespace colligo {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::map<std::string, PresetSpec>& presets() {
    static const std::map<std::string, PresetSpec> kPresets = {
        {"easy0", {25, 0, 0.0}},  {"hard0", {10, 15, 0.0}},  {"hard15", {10, 15, 0.15}},
        {"hard40", {10, 15, 0.40}}, {"hard55", {10, 15, 0.55}},
    };
    return kPresets;
}

RunConfig default_run_config() { return RunConfig{}; }

void apply_preset(RunConfig& cfg, const std::string& name) {
    const auto it = presets().find(name);
    if (it == presets().end()) {
        std::string known;
        for (const auto& [k, v] : presets()) known += (known.empty() ? "" : ", ") + k;
        throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
    }
    cfg.preset = name;
    cfg.neg.n_random_same_category = it->second.n_random_same_category;
    cfg.neg.n_bm25 = it->second.n_bm25;
    cfg.aug_ratio = it->second.aug_ratio;
}

void apply_key_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto as_i64 = [&](const std::string& v) { return std::stoll(v); };
    const auto as_u64 = [&](const std::string& v) { return std::stoull(v); };
    const auto as_f = [&](const std::string& v) { return std::stod(v); };
    try {
        if (key == "preset") {
            apply_preset(cfg, value);
        } else if (key == "seed") {
            cfg.seed = as_u64(value);
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "corpus.n_products") {
            cfg.corpus.n_products = as_i64(value);
        } else if (key == "corpus.n_categories") {
            cfg.corpus.n_categories = as_i64(value);
        } else if (key == "corpus.n_collections") {
            cfg.corpus.n_collections = as_i64(value);
        } else if (key == "corpus.semantic_gap") {
            cfg.corpus.semantic_gap = as_f(value);
        } else if (key == "corpus.products_path") {
            cfg.products_path = value;
        } else if (key == "corpus.collections_path") {
            cfg.collections_path = value;
        } else if (key == "corpus.truth_path") {
            cfg.truth_path = value;
        } else if (key == "aug_ratio") {
            cfg.aug_ratio = as_f(value);
        } else if (key == "neg.n_random_same_category") {
            cfg.neg.n_random_same_category = static_cast<int>(as_i64(value));
        } else if (key == "neg.n_bm25") {
            cfg.neg.n_bm25 = static_cast<int>(as_i64(value));
        } else if (key == "train.margin") {
            cfg.train.margin = as_f(value);
        } else if (key == "train.batch_size") {
            cfg.train.batch_size = static_cast<int>(as_i64(value));
        } else if (key == "train.max_steps") {
            cfg.train.max_steps = as_i64(value);
        } else if (key == "train.eval_interval") {
            cfg.train.eval_interval = as_i64(value);
        } else if (key == "train.learning_rate") {
            cfg.train.learning_rate = as_f(value);
        } else if (key == "train.optimizer") {
            if (value == "sgd") {
                cfg.train.optimizer = Optimizer::Sgd;
            } else if (value == "adam") {
                cfg.train.optimizer = Optimizer::Adam;
            } else {
                throw ConfigError("train.optimizer must be 'sgd' or 'adam'");
            }
        } else if (key == "train.embedding_dim") {
            cfg.train.embedding_dim = static_cast<int>(as_i64(value));
        } else if (key == "eval.min_review_count") {
            cfg.eval.min_review_count = as_i64(value);
        } else if (key == "eval.min_gt") {
            cfg.eval.min_gt = static_cast<std::size_t>(as_i64(value));
        } else if (key == "eval.k") {
            cfg.eval.k = static_cast<std::size_t>(as_i64(value));
        } else if (key == "vocab.min_freq") {
            cfg.vocab_min_freq = static_cast<int>(as_i64(value));
        } else if (key == "stopwords_path") {
            cfg.stopwords_path = value;
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("bad value for config key '" + key + "': '" + value + "'");
    }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto strip = [](std::string s) {
            const auto begin = s.find_first_not_of(" \t\r");
            if (begin == std::string::npos) return std::string{};
            const auto end = s.find_last_not_of(" \t\r");
            return s.substr(begin, end - begin + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        apply_key_value(cfg, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    }
}

std::string resolved_config_text(const RunConfig& cfg) {
    std::ostringstream out;
    char buf[128];
    out << "preset=" << cfg.preset << "\n";
    out << "seed=" << cfg.seed << "\n";
    out << "corpus.n_products=" << cfg.corpus.n_products << "\n";
    out << "corpus.n_categories=" << cfg.corpus.n_categories << "\n";
    out << "corpus.n_collections=" << cfg.corpus.n_collections << "\n";
    std::snprintf(buf, sizeof(buf), "corpus.semantic_gap=%.6g\n", cfg.corpus.semantic_gap);
    out << buf;
    if (!cfg.products_path.empty()) out << "corpus.products_path=" << cfg.products_path << "\n";
    if (!cfg.collections_path.empty()) out << "corpus.collections_path=" << cfg.collections_path << "\n";
    if (!cfg.truth_path.empty()) out << "corpus.truth_path=" << cfg.truth_path << "\n";
    std::snprintf(buf, sizeof(buf), "aug_ratio=%.6g\n", cfg.aug_ratio);
    out << buf;
    out << "neg.n_random_same_category=" << cfg.neg.n_random_same_category << "\n";
    out << "neg.n_bm25=" << cfg.neg.n_bm25 << "\n";
    std::snprintf(buf, sizeof(buf), "train.margin=%.6g\n", cfg.train.margin);
    out << buf;
    out << "train.batch_size=" << cfg.train.batch_size << "\n";
    out << "train.max_steps=" << cfg.train.max_steps << "\n";
    out << "train.eval_interval=" << cfg.train.eval_interval << "\n";
    std::snprintf(buf, sizeof(buf), "train.learning_rate=%.6g\n", cfg.train.learning_rate);
    out << buf;
    out << "train.optimizer=" << (cfg.train.optimizer == Optimizer::Sgd ? "sgd" : "adam") << "\n";
    out << "train.embedding_dim=" << cfg.train.embedding_dim << "\n";
    out << "eval.min_review_count=" << cfg.eval.min_review_count << "\n";
    out << "eval.min_gt=" << cfg.eval.min_gt << "\n";
    out << "eval.k=" << cfg.eval.k << "\n";
    out << "vocab.min_freq=" << cfg.vocab_min_freq << "\n";
    if (!cfg.stopwords_path.empty()) out << "stopwords_path=" << cfg.stopwords_path << "\n";
    return out.str();
}

std::unordered_set<std::string> default_stopwords() {
    return {"collection", "collections", "picks", "edit", "essentials", "favorites", "and", "for",
            "the", "with"};
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open stopword file '" + path + "'");
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) words.insert(line);
    }
    return words;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "' for hashing");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    }
    return h;
}

EvalTaskSet build_restoration_eval_tasks(const CorpusBundle& base, const CorpusBundle& train_bundle,
                                         std::int64_t min_review_count, std::size_t min_gt) {
    EvalTaskSet out = build_eval_tasks(train_bundle, min_review_count, min_gt);
    std::unordered_set<std::string> eval_ids;
    for (const Product& p : out.eval_products) eval_ids.insert(p.product_id);
    std::unordered_map<std::string, std::vector<std::string>> source_gt;
    for (const Collection& coll : base.collections) {
        std::vector<std::string> gt;
        for (const std::string& id : coll.member_ids()) {
            if (eval_ids.count(id)) gt.push_back(id);
        }
        std::sort(gt.begin(), gt.end());
        source_gt[coll.collection_id] = std::move(gt);
    }
    std::unordered_map<std::string, std::string> source_of;
    for (const Collection& coll : train_bundle.collections) {
        if (!coll.aug_source_id.empty()) source_of[coll.collection_id] = coll.aug_source_id;
    }
    std::vector<EvalTask> kept;
    kept.reserve(out.tasks.size());
    for (EvalTask& task : out.tasks) {
        const auto src = source_of.find(task.collection_id);
        if (src != source_of.end()) {
            const auto gt = source_gt.find(src->second);
            if (gt == source_gt.end()) {
                throw LookupError("augmented collection '" + task.collection_id +
                                  "' references unknown source '" + src->second + "'");
            }
            task.p_gt = gt->second;
        }
        if (task.p_gt.size() >= min_gt) kept.push_back(std::move(task));
    }
    out.tasks = std::move(kept);
    return out;
}

namespace {

struct StageSeeds {
    std::uint64_t augment;
    std::uint64_t decompose;
    std::uint64_t negatives;
    std::uint64_t train;
    std::uint64_t simulate;
};

StageSeeds stage_seeds(std::uint64_t master) {
    return {mix_seed(master, 11), mix_seed(master, 12), mix_seed(master, 13), mix_seed(master, 14),
            mix_seed(master, 15)};
}

struct PreparedRun {
    CorpusBundle base;
    CorpusBundle train_bundle;  // augmented collections, shared products
    Vocabulary vocab;
    EvalTaskSet task_set;
    TripletDataset dataset;
    Bm25Index bm25_train;  // over all accessible products (negative mining)
    Bm25Index bm25_eval;   // over eval products only (baseline protocol)
    // Pre-tokenized eval products for cheap per-interval index rebuilds.
    std::vector<std::string> eval_ids;
    std::vector<std::vector<int>> eval_seqs;
    std::vector<std::string> eval_cats;
    std::uint64_t corpus_hash = 0;
};

PreparedRun prepare_run(const RunConfig& cfg) {
    const StageSeeds seeds = stage_seeds(cfg.seed);
    PreparedRun run;
    if (!cfg.products_path.empty() || !cfg.collections_path.empty()) {
        if (cfg.products_path.empty() || cfg.collections_path.empty()) {
            throw ConfigError("corpus.products_path and corpus.collections_path must both be set");
        }
        run.base = load_corpus(cfg.products_path, cfg.collections_path);
        if (!cfg.truth_path.empty()) load_planted_truth(run.base, cfg.truth_path);
    } else {
        SyntheticConfig corpus_cfg = cfg.corpus;
        corpus_cfg.seed = cfg.seed;
        run.base = generate_synthetic_corpus(corpus_cfg);
    }
    run.corpus_hash = bundle_hash(run.base);

    run.train_bundle = run.base;
    run.train_bundle.collections =
        augment_category_wise(run.base.collections, run.base, cfg.aug_ratio, seeds.augment);
    run.train_bundle.finalize();

    run.vocab = build_vocab(run.train_bundle, cfg.vocab_min_freq);
    run.task_set = build_restoration_eval_tasks(run.base, run.train_bundle,
                                                cfg.eval.min_review_count, cfg.eval.min_gt);

    std::unordered_set<std::string> accessible;
    std::vector<Bm25Doc> all_docs;
    for (const Product& p : run.train_bundle.products) {
        accessible.insert(p.product_id);
        all_docs.push_back(Bm25Doc{p.product_id, render_product(p), p.leaf_category()});
    }
    run.bm25_train = Bm25Index::build(all_docs);

    const auto pairs = decompose_positive_pairs(run.train_bundle, accessible, seeds.decompose);
    NegSamplingConfig neg = cfg.neg;
    neg.seed = seeds.negatives;
    run.dataset = build_triplets(pairs, run.train_bundle, run.bm25_train, neg, cfg.aug_ratio);

    std::vector<Bm25Doc> eval_docs;
    for (const Product& p : run.task_set.eval_products) {
        const std::string text = render_product(p);
        eval_docs.push_back(Bm25Doc{p.product_id, text, p.leaf_category()});
        run.eval_ids.push_back(p.product_id);
        run.eval_cats.push_back(p.leaf_category());
    }
    if (eval_docs.empty()) throw ConfigError("no evaluation products survive the review filter");
    run.bm25_eval = Bm25Index::build(eval_docs);
    return run;
}

// Eval products are tokenized against the run vocabulary once.
void tokenize_eval_products(PreparedRun& run) {
    run.eval_seqs.clear();
    for (const Product& p : run.task_set.eval_products) {
        run.eval_seqs.push_back(tokenize(render_product(p), run.vocab).ids);
    }
}

EvalReport eval_encoder(const PreparedRun& run, const EncoderParams& params, std::size_t k,
                        const std::string& tag, std::int64_t step) {
    const EmbeddingIndex index = build_embedding_index_from_seqs(
        params, run.eval_ids, run.eval_seqs, run.eval_cats, run.corpus_hash);
    const Retriever retriever = encoder_retriever(index, params, run.vocab);
    return run_offline_eval(retriever, run.task_set.tasks, k, tag, step);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << content;
}

void write_metrics_csv(const std::vector<StepMetrics>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << "step,avg_recall,avg_precision\n";
    char buf[96];
    for (const StepMetrics& m : rows) {
        std::snprintf(buf, sizeof(buf), "%" PRId64 ",%.6f,%.6f\n", m.step, m.avg_recall,
                      m.avg_precision);
        out << buf;
    }
}

PipelineResult run_impl(const RunConfig& cfg, bool write_files) {
    const StageSeeds seeds = stage_seeds(cfg.seed);
    PreparedRun run = prepare_run(cfg);
    tokenize_eval_products(run);

    const std::string tag = "PR_" + cfg.preset;
    PipelineResult result;
    result.out_dir = cfg.out_dir;
    result.data_stats = dataset_stats(run.dataset);

    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = seeds.train;

    const EvalHook hook = [&](std::int64_t step, const EncoderParams& params) {
        const EvalReport report = eval_encoder(run, params, cfg.eval.k, tag, step);
        result.metrics_by_step.push_back(StepMetrics{step, report.avg_recall, report.avg_precision});
    };
    const TrainResult trained = train(run.dataset, run.vocab, train_cfg, hook);

    result.encoder_report = eval_encoder(run, trained.params, cfg.eval.k, tag, train_cfg.max_steps);
    const Retriever baseline = bm25_retriever(
        run.bm25_eval,
        cfg.stopwords_path.empty() ? default_stopwords() : load_stopwords(cfg.stopwords_path));
    result.bm25_report =
        run_offline_eval(baseline, run.task_set.tasks, cfg.eval.k, "BM25 Search");

    if (!write_files) return result;

    fs::create_directories(cfg.out_dir);
    fs::create_directories(cfg.out_dir + "/checkpoints");
    const auto path = [&](const std::string& name) { return cfg.out_dir + "/" + name; };

    save_products(run.base, path("products.jsonl"));
    save_collections(run.base, path("collections.jsonl"));
    if (run.base.synthetic()) save_planted_truth(run.base, path("truth.jsonl"));
    save_collections(run.train_bundle, path("collections_train.jsonl"));
    run.vocab.save(path("vocab.txt"));
    save_triplets(run.dataset, path("triplets.jsonl"));
    save_loss_curve(trained.loss_curve, path("loss_curve.csv"));
    write_metrics_csv(result.metrics_by_step, path("metrics_by_step.csv"));

    for (const Checkpoint& ck : trained.checkpoints) {
        char name[64];
        std::snprintf(name, sizeof(name), "checkpoints/step_%08" PRId64 ".ckpt", ck.step);
        save_checkpoint(ck.params, ck.step, run.vocab.hash(), path(name));
    }
    save_checkpoint(trained.params, train_cfg.max_steps, run.vocab.hash(), path("final.ckpt"));

    const EmbeddingIndex index = build_embedding_index_from_seqs(
        trained.params, run.eval_ids, run.eval_seqs, run.eval_cats, run.corpus_hash);
    save_embedding_index(index, path("index.bin"));

    save_report_csv(result.encoder_report, path("report_encoder.csv"));
    save_report_table(result.encoder_report, path("report_encoder.txt"));
    save_report_csv(result.bm25_report, path("report_bm25.csv"));
    save_report_table(result.bm25_report, path("report_bm25.txt"));

    json manifest;
    manifest["tool"] = "colligo";
    manifest["config"] = resolved_config_text(cfg);
    manifest["config_hash"] = hash_hex(fnv1a64(resolved_config_text(cfg)));
    manifest["seeds"] = json{{"master", cfg.seed},
                             {"corpus", cfg.seed},
                             {"augment", seeds.augment},
                             {"decompose", seeds.decompose},
                             {"negatives", seeds.negatives},
                             {"train", seeds.train},
                             {"simulate", seeds.simulate}};
    manifest["input_hashes"] = json{{"corpus", hash_hex(run.corpus_hash)},
                                    {"vocab", hash_hex(run.vocab.hash())},
                                    {"triplets", hash_hex(hash_file(path("triplets.jsonl")))}};
    json artifacts = json::array();
    for (const char* name :
         {"products.jsonl", "collections.jsonl", "collections_train.jsonl", "vocab.txt",
          "triplets.jsonl", "loss_curve.csv", "metrics_by_step.csv", "final.ckpt", "index.bin",
          "report_encoder.csv", "report_encoder.txt", "report_bm25.csv", "report_bm25.txt"}) {
        artifacts.push_back(name);
    }
    if (run.base.synthetic()) artifacts.push_back("truth.jsonl");
    manifest["artifacts"] = std::move(artifacts);
    write_text_file(path("manifest.json"), manifest.dump(2) + "\n");
    return result;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg) { return run_impl(cfg, true); }

PipelineResult run_pipeline_in_memory(const RunConfig& cfg) { return run_impl(cfg, false); }

// ---------------------------------------------------------------------------
// Run report: Table-III-style dataset statistics, metric-vs-step curves and a
// simulated online comparison against the curated collections.
// ---------------------------------------------------------------------------

namespace {

std::string svg_curves(const std::vector<StepMetrics>& rows) {
    const int width = 640, height = 360, pad = 48;
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    if (!rows.empty()) {
        const double max_step = static_cast<double>(rows.back().step);
        const auto x_of = [&](std::int64_t step) {
            return pad + (width - 2 * pad) * (max_step == 0 ? 0.0 : static_cast<double>(step) / max_step);
        };
        const auto y_of = [&](double value) { return height - pad - (height - 2 * pad) * value; };
        const auto polyline = [&](const char* color, auto getter) {
            std::ostringstream pts;
            for (const StepMetrics& m : rows) pts << x_of(m.step) << "," << y_of(getter(m)) << " ";
            svg << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='"
                << pts.str() << "'/>\n";
        };
        polyline("#1f77b4", [](const StepMetrics& m) { return m.avg_recall; });
        polyline("#d62728", [](const StepMetrics& m) { return m.avg_precision; });
    }
    svg << "<line x1='" << pad << "' y1='" << height - pad << "' x2='" << width - pad << "' y2='"
        << height - pad << "' stroke='black'/>\n";
    svg << "<line x1='" << pad << "' y1='" << pad << "' x2='" << pad << "' y2='" << height - pad
        << "' stroke='black'/>\n";
    svg << "<text x='" << pad << "' y='20' font-size='13'>avg recall@K (blue) / avg precision@K "
           "(red) vs training step</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::vector<StepMetrics> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::vector<StepMetrics> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        StepMetrics m;
        if (std::sscanf(line.c_str(), "%" SCNd64 ",%lf,%lf", &m.step, &m.avg_recall,
                        &m.avg_precision) != 3) {
            throw ParseError(path + ": bad metrics row '" + line + "'");
        }
        rows.push_back(m);
    }
    return rows;
}

}  // namespace

void render_run_report(const std::string& run_dir) {
    const auto path = [&](const std::string& name) { return run_dir + "/" + name; };
    if (!fs::exists(path("manifest.json"))) {
        throw ParseError("missing artifact '" + path("manifest.json") + "' (run `colligo run` first)");
    }
    CorpusBundle bundle = load_corpus(path("products.jsonl"), path("collections.jsonl"));
    const TripletDataset ds = load_triplets(path("triplets.jsonl"));
    const DatasetStats stats = dataset_stats(ds);
    const auto metrics = read_metrics_csv(path("metrics_by_step.csv"));
    const LoadedCheckpoint ck = load_checkpoint(path("final.ckpt"));
    const Vocabulary vocab = Vocabulary::load(path("vocab.txt"));
    const EmbeddingIndex index = load_embedding_index(path("index.bin"));

    // Simulated online comparison: model picks top products per query, experts
    // are the curated members; click/purchase propensities follow the mean
    // retrieval score.
    std::unordered_map<std::string, Eigen::Index> row_of;
    for (std::size_t i = 0; i < index.size(); ++i) {
        row_of[index.product_ids[i]] = static_cast<Eigen::Index>(i);
    }
    const std::uint64_t sim_seed = mix_seed(bundle_hash(bundle), 15);
    std::vector<double> model_ctr, model_cvr, model_div, expert_ctr, expert_cvr, expert_div;
    std::vector<InteractionLog> model_logs, expert_logs;
    const std::size_t n_sim = std::min<std::size_t>(bundle.collections.size(), 50);
    for (std::size_t c = 0; c < n_sim; ++c) {
        const Collection& coll = bundle.collections[c];
        const std::string query =
            render_query(coll.title, coll.sections.front().name, coll.start_date);
        Vec q = embed(ck.params, tokenize(query, vocab));
        const double qn = q.norm();
        if (qn > 0) q /= qn;

        const auto model_ranked = retrieve_topk(index, q, 20);
        std::vector<std::pair<std::string, double>> expert_ranked;
        for (const std::string& id : coll.member_ids()) {
            const auto it = row_of.find(id);
            if (it == row_of.end()) continue;
            expert_ranked.emplace_back(id, index.unit_vectors.row(it->second).dot(q));
            if (expert_ranked.size() == 20) break;
        }
        if (model_ranked.empty() || expert_ranked.empty()) continue;

        const InteractionLog model_log = simulate_interaction_log(
            coll.collection_id, model_ranked, 1000, mix_seed(sim_seed, 2 * c));
        const InteractionLog expert_log = simulate_interaction_log(
            coll.collection_id, expert_ranked, 1000, mix_seed(sim_seed, 2 * c + 1));
        const OnlineMetrics mm = compute_online_metrics(model_log);
        const OnlineMetrics em = compute_online_metrics(expert_log);
        model_ctr.push_back(mm.ctr);
        model_cvr.push_back(mm.cvr);
        model_div.push_back(mm.order_diversity);
        expert_ctr.push_back(em.ctr);
        expert_cvr.push_back(em.cvr);
        expert_div.push_back(em.order_diversity);
        model_logs.push_back(model_log);
        expert_logs.push_back(expert_log);
    }

    std::ostringstream report;
    report << "colligo run report\n==================\n\n";
    report << "dataset (" << ds.provenance.neg.n_random_same_category << " random + "
           << ds.provenance.neg.n_bm25 << " bm25 negatives, aug ratio " << stats.aug_ratio << ")\n";
    report << "  positive pairs:            " << stats.n_positive_pairs << "\n";
    report << "  distinct negative products: " << stats.n_distinct_negative_products << "\n";
    report << "  triplet instances:          " << stats.n_triplets << "\n\n";
    {
        std::ifstream enc(path("report_encoder.txt"));
        std::ifstream bm(path("report_bm25.txt"));
        report << enc.rdbuf() << "\n" << bm.rdbuf() << "\n";
    }
    if (!model_ctr.empty()) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "simulated online relative scores (model / expert, %zu collections):\n",
                      model_ctr.size());
        report << buf;
        std::snprintf(buf, sizeof(buf), "  relative CTR:             %.4f\n",
                      relative_score(model_ctr, expert_ctr));
        report << buf;
        std::snprintf(buf, sizeof(buf), "  relative CVR:             %.4f\n",
                      relative_score(model_cvr, expert_cvr));
        report << buf;
        std::snprintf(buf, sizeof(buf), "  relative order-diversity: %.4f\n",
                      relative_score(model_div, expert_div));
        report << buf;
    }
    report << "\nmetric-vs-step points: " << metrics.size() << " (see curves.svg)\n";

    write_text_file(path("report.txt"), report.str());
    write_text_file(path("curves.svg"), svg_curves(metrics));
    save_logs(model_logs, path("online_logs_model.jsonl"));
    save_logs(expert_logs, path("online_logs_expert.jsonl"));
}

}  // namespace colligo
