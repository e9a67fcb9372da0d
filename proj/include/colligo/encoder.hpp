#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "colligo/dataset.hpp"
#include "colligo/text.hpp"
#include "colligo/types.hpp"

namespace colligo {

// Token-embedding table with mean pooling. The encoder surface is a single
// embed() contract; the trainer never looks behind it.
struct EncoderParams {
    RowMat table;  // vocab_size x d
    int d = 0;
    std::uint64_t init_seed = 0;

    int vocab_size() const { return static_cast<int>(table.rows()); }
};

EncoderParams init_encoder(int vocab_size, int d, std::uint64_t seed);

// Arithmetic mean of the token rows; an empty sequence embeds to the zero
// vector (counted, see embed_empty_count).
Vec embed(const EncoderParams& params, const TokenSequence& tokens);
std::uint64_t embed_empty_count();

// max(0, ||eq - ep|| - ||eq - en|| + margin) with Euclidean norms.
template <typename DQ, typename DP, typename DN>
Scalar triplet_loss(const Eigen::MatrixBase<DQ>& eq, const Eigen::MatrixBase<DP>& ep,
                    const Eigen::MatrixBase<DN>& en, Scalar margin) {
    if (eq.size() != ep.size() || eq.size() != en.size()) {
        throw LookupError("triplet_loss: dimension mismatch");
    }
    const Scalar hinge = (eq - ep).norm() - (eq - en).norm() + margin;
    return hinge > Scalar{0} ? hinge : Scalar{0};
}

struct TripletGrad {
    Vec q;
    Vec p;
    Vec n;
};

// Subgradients: zero everywhere the loss is zero, and zero for a distance
// term whose norm falls below 1e-12.
TripletGrad triplet_loss_grad(const Vec& eq, const Vec& ep, const Vec& en, Scalar margin);

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
    Scalar margin = 1.0;
    int batch_size = 55;
    std::int64_t max_steps = 20000;
    std::int64_t eval_interval = 2000;
    Scalar learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::Adam;
    std::uint64_t seed = 0;
    int embedding_dim = 32;

    // Adam moments per the usual defaults.
    static constexpr Scalar kBeta1 = 0.9;
    static constexpr Scalar kBeta2 = 0.999;
    static constexpr Scalar kEpsilon = 1e-8;
};

struct Checkpoint {
    std::int64_t step = 0;
    EncoderParams params;
};

struct TrainResult {
    EncoderParams params;
    std::vector<std::pair<std::int64_t, Scalar>> loss_curve;  // (step, mean batch loss)
    std::vector<Checkpoint> checkpoints;
};

using EvalHook = std::function<void(std::int64_t step, const EncoderParams& params)>;

// Single-threaded, seeded-shuffle trainer over the dataset's triplets.
// Gradients flow through mean pooling: each token row of a sequence receives
// gradient / sequence_length, summed over occurrences, averaged over the batch.
TrainResult train(const TripletDataset& ds, const Vocabulary& vocab, const TrainConfig& cfg,
                  const EvalHook& eval_hook = nullptr);

// Central-difference check of the analytic gradient over every parameter
// coordinate touched by the triplet. Returns the max relative error
// |analytic - numeric| / max(1e-8, |numeric|).
Scalar finite_diff_check(const EncoderParams& params, const std::array<std::string, 3>& triplet_texts,
                         const Vocabulary& vocab, Scalar margin, Scalar eps);

// Checkpoint file: magic, vocab hash, rows, d, step, row-major float64 table.
void save_checkpoint(const EncoderParams& params, std::int64_t step, std::uint64_t vocab_hash,
                     const std::string& path);

struct LoadedCheckpoint {
    EncoderParams params;
    std::int64_t step = 0;
    std::uint64_t vocab_hash = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

void save_loss_curve(const std::vector<std::pair<std::int64_t, Scalar>>& curve, const std::string& path);

}  // namespace colligo
