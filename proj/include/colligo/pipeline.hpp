#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "colligo/dataset.hpp"
#include "colligo/encoder.hpp"
#include "colligo/eval.hpp"

namespace colligo {

struct EvalProtocolConfig {
    std::int64_t min_review_count = 1;
    std::size_t min_gt = 5;
    std::size_t k = 100;
};

// Negative-sampling presets, one per model row: easy0 (25 random), hard0/15/
// 40/55 (10 random + 15 BM25 at rising augmentation ratios).
struct PresetSpec {
    int n_random_same_category;
    int n_bm25;
    double aug_ratio;
};

const std::map<std::string, PresetSpec>& presets();

struct RunConfig {
    SyntheticConfig corpus;
    // When set, load this corpus instead of generating one.
    std::string products_path;
    std::string collections_path;
    std::string truth_path;

    std::string preset = "hard15";
    NegSamplingConfig neg{10, 15, 0};
    double aug_ratio = 0.15;
    TrainConfig train;
    EvalProtocolConfig eval;
    int vocab_min_freq = 2;
    std::string stopwords_path;  // optional override of the built-in list
    std::string out_dir = "out";
    std::uint64_t seed = 7;  // master seed; every stage seed derives from it
};

RunConfig default_run_config();
void apply_preset(RunConfig& cfg, const std::string& name);
// Flat key=value file; '#' starts a comment. Unknown keys are errors.
void apply_config_file(RunConfig& cfg, const std::string& path);
void apply_key_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string resolved_config_text(const RunConfig& cfg);

std::unordered_set<std::string> default_stopwords();
std::unordered_set<std::string> load_stopwords(const std::string& path);

struct StepMetrics {
    std::int64_t step = 0;
    double avg_recall = 0.0;
    double avg_precision = 0.0;
};

struct PipelineResult {
    EvalReport encoder_report;
    EvalReport bm25_report;
    DatasetStats data_stats;
    std::vector<StepMetrics> metrics_by_step;
    std::string out_dir;
};

// Full pipeline: corpus -> augmentation -> vocabulary -> triplets -> training
// -> embedding index -> offline evaluation (encoder and BM25 baseline), with
// every artifact and a manifest written under cfg.out_dir. Byte-deterministic
// for a fixed config.
PipelineResult run_pipeline(const RunConfig& cfg);

// In-memory variant used by experiment sweeps: no files are written.
PipelineResult run_pipeline_in_memory(const RunConfig& cfg);

// Evaluation tasks for a training run: recall is measured against the
// products of the *source* collection (how much of the curated collection a
// query restores), so a category-split query keeps the full cross-category
// ground truth while its C_gt pins the category; precision stays on the
// split's category.
EvalTaskSet build_restoration_eval_tasks(const CorpusBundle& base, const CorpusBundle& train_bundle,
                                         std::int64_t min_review_count, std::size_t min_gt);

// Renders report.txt, curves.svg and simulated online logs for a finished run
// directory.
void render_run_report(const std::string& run_dir);

std::uint64_t hash_file(const std::string& path);

}  // namespace colligo
