#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "colligo/hash.hpp"
#include "colligo/pipeline.hpp"
#include "colligo/rng.hpp"
#include "colligo/service.hpp"
#include "colligo/text.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace colligo;

namespace {

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) {
        throw ParseError("missing " + what + " '" + path + "'");
    }
}

// Each command leaves a manifest next to its outputs: resolved arguments,
// seeds, and input-file hashes, so identical manifests imply identical bytes.
void write_command_manifest(const std::string& path, const std::string& command,
                            const std::vector<std::pair<std::string, std::string>>& args,
                            const std::vector<std::string>& input_files) {
    json m;
    m["tool"] = "colligo";
    m["command"] = command;
    json a;
    std::string arg_text;
    for (const auto& [k, v] : args) {
        a[k] = v;
        arg_text += k + "=" + v + "\n";
    }
    m["args"] = std::move(a);
    m["config_hash"] = hash_hex(fnv1a64(arg_text));
    json hashes;
    for (const std::string& f : input_files) hashes[f] = hash_hex(hash_file(f));
    m["input_hashes"] = std::move(hashes);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << m.dump(2) << "\n";
}

EncoderParams load_params_for(const std::string& checkpoint_path, const Vocabulary& vocab,
                              std::int64_t* step_out = nullptr) {
    require_file(checkpoint_path, "checkpoint");
    LoadedCheckpoint ck = load_checkpoint(checkpoint_path);
    if (ck.vocab_hash != vocab.hash()) {
        throw ConfigError("checkpoint '" + checkpoint_path + "' was trained with a different vocabulary");
    }
    if (step_out) *step_out = ck.step;
    return std::move(ck.params);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"colligo: intent-based product collection engine"};
    app.require_subcommand(1);

    // --- gen-corpus ---------------------------------------------------------
    auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus with planted truth");
    std::string gen_out = "corpus";
    SyntheticConfig gen_cfg;
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--seed", gen_cfg.seed, "corpus seed");
    gen->add_option("--products", gen_cfg.n_products, "number of products");
    gen->add_option("--categories", gen_cfg.n_categories, "number of leaf categories");
    gen->add_option("--collections", gen_cfg.n_collections, "number of collections");
    gen->add_option("--gap", gen_cfg.semantic_gap, "semantic gap in [0,1]");
    gen->callback([&] {
        const CorpusBundle bundle = generate_synthetic_corpus(gen_cfg);
        fs::create_directories(gen_out);
        save_products(bundle, gen_out + "/products.jsonl");
        save_collections(bundle, gen_out + "/collections.jsonl");
        save_planted_truth(bundle, gen_out + "/truth.jsonl");
        write_command_manifest(gen_out + "/manifest.json", "gen-corpus",
                               {{"seed", std::to_string(gen_cfg.seed)},
                                {"products", std::to_string(gen_cfg.n_products)},
                                {"categories", std::to_string(gen_cfg.n_categories)},
                                {"collections", std::to_string(gen_cfg.n_collections)},
                                {"gap", std::to_string(gen_cfg.semantic_gap)}},
                               {});
        const CorpusStats stats = corpus_stats(bundle);
        std::printf("wrote %s: %zu products, %" PRId64 " collections, %" PRId64
                    " sections, %.2f products/collection, %.2f/section, %" PRId64 " categories\n",
                    gen_out.c_str(), bundle.products.size(), stats.n_collections, stats.n_sections,
                    stats.avg_products_per_collection, stats.avg_products_per_section,
                    stats.n_categories);
    });

    // --- build-dataset ------------------------------------------------------
    auto* bd = app.add_subcommand("build-dataset", "construct triplet training data");
    std::string bd_products, bd_collections, bd_truth, bd_out = "dataset", bd_preset = "hard15";
    std::uint64_t bd_seed = 7;
    double bd_aug = -1.0;
    int bd_min_freq = 2;
    bd->add_option("--products", bd_products, "products.jsonl")->required();
    bd->add_option("--collections", bd_collections, "collections.jsonl")->required();
    bd->add_option("--truth", bd_truth, "planted truth file (optional)");
    bd->add_option("--preset", bd_preset, "easy0|hard0|hard15|hard40|hard55");
    bd->add_option("--seed", bd_seed, "master seed");
    bd->add_option("--aug", bd_aug, "override augmentation ratio");
    bd->add_option("--min-freq", bd_min_freq, "vocabulary min frequency");
    bd->add_option("--out", bd_out, "output directory");
    bd->callback([&] {
        require_file(bd_products, "products file");
        require_file(bd_collections, "collections file");
        RunConfig cfg = default_run_config();
        apply_preset(cfg, bd_preset);
        if (bd_aug >= 0.0) cfg.aug_ratio = bd_aug;
        cfg.seed = bd_seed;

        CorpusBundle bundle = load_corpus(bd_products, bd_collections);
        if (!bd_truth.empty()) load_planted_truth(bundle, bd_truth);
        CorpusBundle train_bundle = bundle;
        train_bundle.collections =
            augment_category_wise(bundle.collections, bundle, cfg.aug_ratio, mix_seed(bd_seed, 11));
        train_bundle.finalize();

        const Vocabulary vocab = build_vocab(train_bundle, bd_min_freq);
        std::unordered_set<std::string> accessible;
        std::vector<Bm25Doc> docs;
        for (const Product& p : train_bundle.products) {
            accessible.insert(p.product_id);
            docs.push_back(Bm25Doc{p.product_id, render_product(p), p.leaf_category()});
        }
        const Bm25Index index = Bm25Index::build(docs);
        const auto pairs = decompose_positive_pairs(train_bundle, accessible, mix_seed(bd_seed, 12));
        NegSamplingConfig neg = cfg.neg;
        neg.seed = mix_seed(bd_seed, 13);
        const TripletDataset ds = build_triplets(pairs, train_bundle, index, neg, cfg.aug_ratio);

        fs::create_directories(bd_out);
        vocab.save(bd_out + "/vocab.txt");
        save_collections(train_bundle, bd_out + "/collections_train.jsonl");
        save_triplets(ds, bd_out + "/triplets.jsonl");
        write_command_manifest(bd_out + "/manifest.json", "build-dataset",
                               {{"preset", bd_preset},
                                {"seed", std::to_string(bd_seed)},
                                {"aug_ratio", std::to_string(cfg.aug_ratio)},
                                {"min_freq", std::to_string(bd_min_freq)}},
                               {bd_products, bd_collections});
        const DatasetStats stats = dataset_stats(ds);
        std::printf("wrote %s: %" PRId64 " positive pairs, %" PRId64 " triplets, %" PRId64
                    " distinct negatives\n",
                    bd_out.c_str(), stats.n_positive_pairs, stats.n_triplets,
                    stats.n_distinct_negative_products);
    });

    // --- train ---------------------------------------------------------------
    auto* tr = app.add_subcommand("train", "train the triplet encoder");
    std::string tr_triplets, tr_vocab, tr_out = "model";
    TrainConfig tr_cfg;
    std::string tr_opt = "adam";
    tr->add_option("--triplets", tr_triplets, "triplets.jsonl")->required();
    tr->add_option("--vocab", tr_vocab, "vocab.txt")->required();
    tr->add_option("--out", tr_out, "output directory");
    tr->add_option("--steps", tr_cfg.max_steps, "max training steps");
    tr->add_option("--eval-interval", tr_cfg.eval_interval, "checkpoint interval");
    tr->add_option("--batch", tr_cfg.batch_size, "batch size");
    tr->add_option("--lr", tr_cfg.learning_rate, "learning rate");
    tr->add_option("--margin", tr_cfg.margin, "triplet margin");
    tr->add_option("--dim", tr_cfg.embedding_dim, "embedding dimension");
    tr->add_option("--optimizer", tr_opt, "sgd|adam");
    tr->add_option("--seed", tr_cfg.seed, "training seed");
    tr->callback([&] {
        require_file(tr_triplets, "triplet dataset");
        require_file(tr_vocab, "vocabulary");
        if (tr_opt == "sgd") {
            tr_cfg.optimizer = Optimizer::Sgd;
        } else if (tr_opt == "adam") {
            tr_cfg.optimizer = Optimizer::Adam;
        } else {
            throw ConfigError("--optimizer must be sgd or adam");
        }
        const TripletDataset ds = load_triplets(tr_triplets);
        const Vocabulary vocab = Vocabulary::load(tr_vocab);
        const TrainResult result = train(ds, vocab, tr_cfg);
        fs::create_directories(tr_out + "/checkpoints");
        for (const Checkpoint& ck : result.checkpoints) {
            char name[64];
            std::snprintf(name, sizeof(name), "/checkpoints/step_%08" PRId64 ".ckpt", ck.step);
            save_checkpoint(ck.params, ck.step, vocab.hash(), tr_out + name);
        }
        save_checkpoint(result.params, tr_cfg.max_steps, vocab.hash(), tr_out + "/final.ckpt");
        save_loss_curve(result.loss_curve, tr_out + "/loss_curve.csv");
        write_command_manifest(tr_out + "/manifest.json", "train",
                               {{"steps", std::to_string(tr_cfg.max_steps)},
                                {"batch", std::to_string(tr_cfg.batch_size)},
                                {"lr", std::to_string(tr_cfg.learning_rate)},
                                {"margin", std::to_string(tr_cfg.margin)},
                                {"dim", std::to_string(tr_cfg.embedding_dim)},
                                {"optimizer", tr_opt},
                                {"seed", std::to_string(tr_cfg.seed)}},
                               {tr_triplets, tr_vocab});
        const double final_loss =
            result.loss_curve.empty() ? 0.0 : result.loss_curve.back().second;
        std::printf("trained %" PRId64 " steps, final batch loss %.4f, wrote %s\n",
                    tr_cfg.max_steps, final_loss, tr_out.c_str());
    });

    // --- index ----------------------------------------------------------------
    auto* ix = app.add_subcommand("index", "precompute the product embedding index");
    std::string ix_ckpt, ix_vocab, ix_products, ix_out = "index.bin";
    std::int64_t ix_min_reviews = 1;
    ix->add_option("--checkpoint", ix_ckpt, "encoder checkpoint")->required();
    ix->add_option("--vocab", ix_vocab, "vocab.txt")->required();
    ix->add_option("--products", ix_products, "products.jsonl")->required();
    ix->add_option("--min-reviews", ix_min_reviews, "evaluation product review threshold");
    ix->add_option("--out", ix_out, "output index file");
    ix->callback([&] {
        require_file(ix_vocab, "vocabulary");
        require_file(ix_products, "products file");
        const Vocabulary vocab = Vocabulary::load(ix_vocab);
        const EncoderParams params = load_params_for(ix_ckpt, vocab);
        std::vector<Product> products;
        for (Product& p : load_products(ix_products)) {
            if (p.review_count >= ix_min_reviews) products.push_back(std::move(p));
        }
        if (products.empty()) throw ConfigError("no products pass --min-reviews");
        const EmbeddingIndex index =
            build_embedding_index(params, vocab, products, hash_file(ix_products));
        save_embedding_index(index, ix_out);
        write_command_manifest(ix_out + ".manifest.json", "index",
                               {{"min_reviews", std::to_string(ix_min_reviews)}},
                               {ix_ckpt, ix_vocab, ix_products});
        std::printf("indexed %zu products (d=%d) -> %s\n", index.size(), index.d, ix_out.c_str());
    });

    // --- eval / baseline -------------------------------------------------------
    auto* ev = app.add_subcommand("eval", "offline recall/precision evaluation of a checkpoint");
    std::string ev_index, ev_ckpt, ev_vocab, ev_products, ev_collections, ev_out = "eval";
    std::size_t ev_k = 100, ev_min_gt = 5;
    std::int64_t ev_min_reviews = 1;
    ev->add_option("--index", ev_index, "embedding index")->required();
    ev->add_option("--checkpoint", ev_ckpt, "encoder checkpoint")->required();
    ev->add_option("--vocab", ev_vocab, "vocab.txt")->required();
    ev->add_option("--products", ev_products, "products.jsonl")->required();
    ev->add_option("--collections", ev_collections, "collections.jsonl (training queries)")->required();
    ev->add_option("--k", ev_k, "retrieval depth K");
    ev->add_option("--min-reviews", ev_min_reviews, "evaluation product review threshold");
    ev->add_option("--min-gt", ev_min_gt, "minimum evaluation products per collection");
    ev->add_option("--out", ev_out, "output directory");
    ev->callback([&] {
        require_file(ev_index, "embedding index");
        require_file(ev_vocab, "vocabulary");
        require_file(ev_products, "products file");
        require_file(ev_collections, "collections file");
        const Vocabulary vocab = Vocabulary::load(ev_vocab);
        std::int64_t step = 0;
        const EncoderParams params = load_params_for(ev_ckpt, vocab, &step);
        const EmbeddingIndex index = load_embedding_index(ev_index);
        const CorpusBundle bundle = load_corpus(ev_products, ev_collections);
        const EvalTaskSet task_set = build_eval_tasks(bundle, ev_min_reviews, ev_min_gt);
        const Retriever retriever = encoder_retriever(index, params, vocab);
        const EvalReport report =
            run_offline_eval(retriever, task_set.tasks, ev_k, "SBERT-style encoder", step);
        fs::create_directories(ev_out);
        save_report_csv(report, ev_out + "/report_encoder.csv");
        save_report_table(report, ev_out + "/report_encoder.txt");
        write_command_manifest(ev_out + "/manifest.json", "eval",
                               {{"k", std::to_string(ev_k)},
                                {"min_reviews", std::to_string(ev_min_reviews)},
                                {"min_gt", std::to_string(ev_min_gt)}},
                               {ev_index, ev_ckpt, ev_vocab, ev_products, ev_collections});
        std::fputs(format_report_table(report).c_str(), stdout);
    });

    auto* bl = app.add_subcommand("baseline", "offline evaluation of the BM25 baseline");
    std::string bl_products, bl_collections, bl_stopwords, bl_out = "baseline";
    std::size_t bl_k = 100, bl_min_gt = 5;
    std::int64_t bl_min_reviews = 1;
    bl->add_option("--products", bl_products, "products.jsonl")->required();
    bl->add_option("--collections", bl_collections, "collections.jsonl")->required();
    bl->add_option("--stopwords", bl_stopwords, "stopword file, one term per line");
    bl->add_option("--k", bl_k, "retrieval depth K");
    bl->add_option("--min-reviews", bl_min_reviews, "evaluation product review threshold");
    bl->add_option("--min-gt", bl_min_gt, "minimum evaluation products per collection");
    bl->add_option("--out", bl_out, "output directory");
    bl->callback([&] {
        require_file(bl_products, "products file");
        require_file(bl_collections, "collections file");
        const CorpusBundle bundle = load_corpus(bl_products, bl_collections);
        const EvalTaskSet task_set = build_eval_tasks(bundle, bl_min_reviews, bl_min_gt);
        std::vector<Bm25Doc> docs;
        for (const Product& p : task_set.eval_products) {
            docs.push_back(Bm25Doc{p.product_id, render_product(p), p.leaf_category()});
        }
        const Bm25Index index = Bm25Index::build(docs);
        const Retriever retriever = bm25_retriever(
            index, bl_stopwords.empty() ? default_stopwords() : load_stopwords(bl_stopwords));
        const EvalReport report = run_offline_eval(retriever, task_set.tasks, bl_k, "BM25 Search");
        fs::create_directories(bl_out);
        save_report_csv(report, bl_out + "/report_bm25.csv");
        save_report_table(report, bl_out + "/report_bm25.txt");
        write_command_manifest(bl_out + "/manifest.json", "baseline",
                               {{"k", std::to_string(bl_k)},
                                {"min_reviews", std::to_string(bl_min_reviews)},
                                {"min_gt", std::to_string(bl_min_gt)}},
                               {bl_products, bl_collections});
        std::fputs(format_report_table(report).c_str(), stdout);
    });

    // --- retrieve ---------------------------------------------------------------
    auto* rt = app.add_subcommand("retrieve", "top-k products for an ad-hoc intent sentence");
    std::string rt_index, rt_ckpt, rt_vocab, rt_query, rt_category;
    std::size_t rt_k = 10;
    rt->add_option("--index", rt_index, "embedding index")->required();
    rt->add_option("--checkpoint", rt_ckpt, "encoder checkpoint")->required();
    rt->add_option("--vocab", rt_vocab, "vocab.txt")->required();
    rt->add_option("--query", rt_query, "intent sentence")->required();
    rt->add_option("--k", rt_k, "number of results");
    rt->add_option("--category", rt_category, "restrict results to a leaf category");
    rt->callback([&] {
        require_file(rt_index, "embedding index");
        require_file(rt_vocab, "vocabulary");
        const Vocabulary vocab = Vocabulary::load(rt_vocab);
        const EncoderParams params = load_params_for(rt_ckpt, vocab);
        const EmbeddingIndex index = load_embedding_index(rt_index);
        const Vec q = embed(params, tokenize(rt_query, vocab));
        const auto results = retrieve_topk(
            index, q, rt_k,
            rt_category.empty() ? std::nullopt : std::make_optional(rt_category));
        for (std::size_t i = 0; i < results.size(); ++i) {
            std::printf("%2zu. %-12s %.6f\n", i + 1, results[i].first.c_str(), results[i].second);
        }
    });

    // --- report -----------------------------------------------------------------
    auto* rp = app.add_subcommand("report", "render tables, curves and simulated online metrics");
    std::string rp_run = "out";
    rp->add_option("--run", rp_run, "run output directory");
    rp->callback([&] {
        render_run_report(rp_run);
        std::printf("wrote %s/report.txt, curves.svg, online_logs_{model,expert}.jsonl\n",
                    rp_run.c_str());
    });

    // --- run ---------------------------------------------------------------------
    auto* rn = app.add_subcommand("run", "full pipeline: corpus -> dataset -> train -> eval");
    std::string rn_config, rn_preset, rn_out;
    std::uint64_t rn_seed = 0;
    double rn_aug = -1.0;
    bool rn_seed_set = false, rn_out_set = false;
    rn->add_option("--config", rn_config, "key=value config file");
    rn->add_option("--preset", rn_preset, "easy0|hard0|hard15|hard40|hard55");
    rn->add_option("--seed", rn_seed, "master seed")->each([&](const std::string&) { rn_seed_set = true; });
    rn->add_option("--out", rn_out, "output directory")->each([&](const std::string&) { rn_out_set = true; });
    rn->add_option("--aug", rn_aug, "override augmentation ratio");
    rn->callback([&] {
        RunConfig cfg = default_run_config();
        if (!rn_config.empty()) apply_config_file(cfg, rn_config);
        if (!rn_preset.empty()) apply_preset(cfg, rn_preset);
        if (rn_aug >= 0.0) cfg.aug_ratio = rn_aug;
        if (rn_seed_set) cfg.seed = rn_seed;
        if (rn_out_set) cfg.out_dir = rn_out;
        const PipelineResult result = run_pipeline(cfg);
        std::printf("run complete: %s\n", result.out_dir.c_str());
        std::fputs(format_report_table(result.encoder_report).c_str(), stdout);
        std::fputs(format_report_table(result.bm25_report).c_str(), stdout);
    });

    // --- serve ---------------------------------------------------------------------
    auto* sv = app.add_subcommand("serve", "HTTP retrieval service over an index + checkpoint");
    std::string sv_index, sv_ckpt, sv_vocab, sv_host = "127.0.0.1";
    int sv_port = 8080;
    sv->add_option("--index", sv_index, "embedding index")->required();
    sv->add_option("--checkpoint", sv_ckpt, "encoder checkpoint")->required();
    sv->add_option("--vocab", sv_vocab, "vocab.txt")->required();
    sv->add_option("--host", sv_host, "bind host");
    sv->add_option("--port", sv_port, "bind port");
    sv->callback([&] {
        require_file(sv_index, "embedding index");
        require_file(sv_vocab, "vocabulary");
        const Vocabulary vocab = Vocabulary::load(sv_vocab);
        std::int64_t step = 0;
        EncoderParams params = load_params_for(sv_ckpt, vocab, &step);
        EmbeddingIndex index = load_embedding_index(sv_index);
        std::printf("serving %zu products on http://%s:%d (GET /retrieve, /healthz)\n",
                    index.size(), sv_host.c_str(), sv_port);
        RetrievalService service(std::move(index), std::move(params), vocab, step);
        if (!service.listen(sv_host, sv_port)) {
            throw ConfigError("failed to listen on " + sv_host + ":" + std::to_string(sv_port));
        }
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
