#include "colligo/encoder.hpp"

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include "colligo/rng.hpp"

namespace colligo {

namespace {

std::atomic<std::uint64_t> g_empty_embed_count{0};

constexpr char kCheckpointMagic[8] = {'C', 'L', 'G', 'E', 'N', 'C', '0', '1'};
constexpr Scalar kDistanceFloor = 1e-12;

}  // namespace

EncoderParams init_encoder(int vocab_size, int d, std::uint64_t seed) {
    if (vocab_size < 3) throw ConfigError("vocab_size must be >= 3 (specials plus one token)");
    if (d < 2) throw ConfigError("embedding dimension must be >= 2");
    EncoderParams params;
    params.d = d;
    params.init_seed = seed;
    params.table.resize(vocab_size, d);
    Rng rng(seed);
    for (int i = 0; i < vocab_size; ++i) {
        for (int j = 0; j < d; ++j) params.table(i, j) = rng.uniform(-0.05, 0.05);
    }
    return params;
}

Vec embed(const EncoderParams& params, const TokenSequence& tokens) {
    if (tokens.ids.empty()) {
        if (g_empty_embed_count.fetch_add(1) == 0) {
            std::cerr << "colligo: embedding an empty token sequence -> zero vector\n";
        }
        return Vec::Zero(params.d);
    }
    Vec sum = Vec::Zero(params.d);
    for (const int id : tokens.ids) {
        if (id < 0 || id >= params.vocab_size()) {
            throw LookupError("token id " + std::to_string(id) + " outside embedding table");
        }
        sum += params.table.row(id).transpose();
    }
    return sum / static_cast<Scalar>(tokens.ids.size());
}

std::uint64_t embed_empty_count() { return g_empty_embed_count.load(); }

TripletGrad triplet_loss_grad(const Vec& eq, const Vec& ep, const Vec& en, Scalar margin) {
    if (eq.size() != ep.size() || eq.size() != en.size()) {
        throw LookupError("triplet_loss_grad: dimension mismatch");
    }
    TripletGrad g{Vec::Zero(eq.size()), Vec::Zero(eq.size()), Vec::Zero(eq.size())};
    const Vec dp = eq - ep;
    const Vec dn = eq - en;
    const Scalar norm_p = dp.norm();
    const Scalar norm_n = dn.norm();
    if (norm_p - norm_n + margin <= Scalar{0}) return g;
    if (norm_p >= kDistanceFloor) g.p = -dp / norm_p;
    if (norm_n >= kDistanceFloor) g.n = dn / norm_n;
    g.q = -g.p - g.n;
    return g;
}

namespace {

struct TokenizedTriplet {
    std::uint32_t q = 0;
    std::uint32_t p = 0;
    std::uint32_t n = 0;
};

// Token sequences for the distinct texts of the dataset, in first-appearance
// order so training is independent of hash-map iteration.
struct TokenizedDataset {
    std::vector<std::vector<int>> seqs;
    std::vector<TokenizedTriplet> triplets;
};

TokenizedDataset tokenize_dataset(const TripletDataset& ds, const Vocabulary& vocab) {
    TokenizedDataset out;
    std::unordered_map<std::string, std::uint32_t> seen;
    const auto intern = [&](const std::string& text) {
        const auto it = seen.find(text);
        if (it != seen.end()) return it->second;
        const auto id = static_cast<std::uint32_t>(out.seqs.size());
        out.seqs.push_back(tokenize(text, vocab).ids);
        seen.emplace(text, id);
        return id;
    };
    out.triplets.reserve(ds.examples.size());
    for (const TripletExample& ex : ds.examples) {
        out.triplets.push_back(
            {intern(ex.query_text), intern(ex.positive_text), intern(ex.negative_text)});
    }
    return out;
}

Vec mean_rows(const RowMat& table, const std::vector<int>& ids, int d) {
    if (ids.empty()) return Vec::Zero(d);
    Vec sum = Vec::Zero(d);
    for (const int id : ids) sum += table.row(id).transpose();
    return sum / static_cast<Scalar>(ids.size());
}

void scatter_grad(RowMat& grad, const std::vector<int>& ids, const Vec& g, Scalar scale) {
    if (ids.empty()) return;
    const Scalar w = scale / static_cast<Scalar>(ids.size());
    for (const int id : ids) grad.row(id) += w * g.transpose();
}

}  // namespace

TrainResult train(const TripletDataset& ds, const Vocabulary& vocab, const TrainConfig& cfg,
                  const EvalHook& eval_hook) {
    if (ds.examples.empty()) throw ConfigError("cannot train on an empty dataset");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.margin <= Scalar{0}) throw ConfigError("margin must be > 0");
    if (cfg.max_steps < 0) throw ConfigError("max_steps must be >= 0");
    if (cfg.max_steps > 0 && (cfg.eval_interval < 1 || cfg.eval_interval > cfg.max_steps)) {
        throw ConfigError("eval_interval must be in [1, max_steps]");
    }

    TrainResult result;
    result.params = init_encoder(vocab.size(), cfg.embedding_dim, mix_seed(cfg.seed, 0xC0));
    if (cfg.max_steps == 0) return result;

    const TokenizedDataset data = tokenize_dataset(ds, vocab);
    const std::size_t n = data.triplets.size();

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    std::size_t cursor = n;  // forces a shuffle before the first draw
    std::uint64_t epoch = 0;

    RowMat grad = RowMat::Zero(result.params.table.rows(), result.params.d);
    RowMat adam_m, adam_v;
    if (cfg.optimizer == Optimizer::Adam) {
        adam_m = RowMat::Zero(grad.rows(), grad.cols());
        adam_v = RowMat::Zero(grad.rows(), grad.cols());
    }

    result.loss_curve.reserve(static_cast<std::size_t>(cfg.max_steps));
    for (std::int64_t step = 1; step <= cfg.max_steps; ++step) {
        grad.setZero();
        Scalar batch_loss = 0;
        const Scalar inv_batch = Scalar{1} / static_cast<Scalar>(cfg.batch_size);
        for (int b = 0; b < cfg.batch_size; ++b) {
            if (cursor == n) {
                Rng shuffle_rng(mix_seed(cfg.seed, 0xE70C + epoch));
                shuffle_rng.shuffle(order);
                cursor = 0;
                ++epoch;
            }
            const TokenizedTriplet& t = data.triplets[order[cursor++]];
            const auto& q_ids = data.seqs[t.q];
            const auto& p_ids = data.seqs[t.p];
            const auto& n_ids = data.seqs[t.n];
            const Vec eq = mean_rows(result.params.table, q_ids, result.params.d);
            const Vec ep = mean_rows(result.params.table, p_ids, result.params.d);
            const Vec en = mean_rows(result.params.table, n_ids, result.params.d);
            const Scalar loss = triplet_loss(eq, ep, en, cfg.margin);
            batch_loss += loss;
            if (loss > Scalar{0}) {
                const TripletGrad g = triplet_loss_grad(eq, ep, en, cfg.margin);
                scatter_grad(grad, q_ids, g.q, inv_batch);
                scatter_grad(grad, p_ids, g.p, inv_batch);
                scatter_grad(grad, n_ids, g.n, inv_batch);
            }
        }
        batch_loss *= inv_batch;

        if (cfg.optimizer == Optimizer::Sgd) {
            result.params.table -= cfg.learning_rate * grad;
        } else {
            adam_m = TrainConfig::kBeta1 * adam_m + (1 - TrainConfig::kBeta1) * grad;
            adam_v = TrainConfig::kBeta2 * adam_v + (1 - TrainConfig::kBeta2) * grad.cwiseProduct(grad);
            const Scalar bias1 = 1 - std::pow(TrainConfig::kBeta1, static_cast<Scalar>(step));
            const Scalar bias2 = 1 - std::pow(TrainConfig::kBeta2, static_cast<Scalar>(step));
            result.params.table.array() -=
                cfg.learning_rate * (adam_m.array() / bias1) /
                ((adam_v.array() / bias2).sqrt() + TrainConfig::kEpsilon);
        }

        result.loss_curve.emplace_back(step, batch_loss);
        if (step % cfg.eval_interval == 0) {
            result.checkpoints.push_back(Checkpoint{step, result.params});
            if (eval_hook) eval_hook(step, result.params);
        }
    }
    return result;
}

Scalar finite_diff_check(const EncoderParams& params, const std::array<std::string, 3>& triplet_texts,
                         const Vocabulary& vocab, Scalar margin, Scalar eps) {
    if (eps <= Scalar{0}) throw ConfigError("eps must be > 0");
    const TokenSequence q = tokenize(triplet_texts[0], vocab);
    const TokenSequence p = tokenize(triplet_texts[1], vocab);
    const TokenSequence n = tokenize(triplet_texts[2], vocab);

    // Analytic row gradients through mean pooling.
    std::unordered_map<int, Vec> analytic;
    {
        const Vec eq = embed(params, q);
        const Vec ep = embed(params, p);
        const Vec en = embed(params, n);
        const TripletGrad g = triplet_loss_grad(eq, ep, en, margin);
        const auto add = [&](const std::vector<int>& ids, const Vec& grad_vec) {
            if (ids.empty()) return;
            const Scalar w = Scalar{1} / static_cast<Scalar>(ids.size());
            for (const int id : ids) {
                analytic.try_emplace(id, Vec::Zero(params.d)).first->second += w * grad_vec;
            }
        };
        add(q.ids, g.q);
        add(p.ids, g.p);
        add(n.ids, g.n);
    }

    EncoderParams probe = params;
    const auto loss_at = [&]() {
        return triplet_loss(embed(probe, q), embed(probe, p), embed(probe, n), margin);
    };

    Scalar max_rel = 0;
    for (const auto& [row, grad_row] : analytic) {
        for (int j = 0; j < params.d; ++j) {
            const Scalar saved = probe.table(row, j);
            probe.table(row, j) = saved + eps;
            const Scalar up = loss_at();
            probe.table(row, j) = saved - eps;
            const Scalar down = loss_at();
            probe.table(row, j) = saved;
            const Scalar numeric = (up - down) / (2 * eps);
            const Scalar rel =
                std::abs(grad_row[j] - numeric) / std::max<Scalar>(1e-8, std::abs(numeric));
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

void save_checkpoint(const EncoderParams& params, std::int64_t step, std::uint64_t vocab_hash,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    const std::uint32_t rows = static_cast<std::uint32_t>(params.table.rows());
    const std::uint32_t d = static_cast<std::uint32_t>(params.d);
    const std::uint64_t step_u = static_cast<std::uint64_t>(step);
    out.write(reinterpret_cast<const char*>(&vocab_hash), sizeof(vocab_hash));
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&d), sizeof(d));
    out.write(reinterpret_cast<const char*>(&step_u), sizeof(step_u));
    out.write(reinterpret_cast<const char*>(params.table.data()),
              static_cast<std::streamsize>(sizeof(Scalar) * rows * d));
    if (!out) throw ParseError("short write to '" + path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw ParseError(path + ": not a colligo checkpoint");
    }
    LoadedCheckpoint ck;
    std::uint32_t rows = 0, d = 0;
    std::uint64_t step_u = 0;
    in.read(reinterpret_cast<char*>(&ck.vocab_hash), sizeof(ck.vocab_hash));
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&d), sizeof(d));
    in.read(reinterpret_cast<char*>(&step_u), sizeof(step_u));
    if (!in || d < 2 || rows < 3) throw ParseError(path + ": corrupt checkpoint header");
    ck.step = static_cast<std::int64_t>(step_u);
    ck.params.d = static_cast<int>(d);
    ck.params.table.resize(rows, d);
    in.read(reinterpret_cast<char*>(ck.params.table.data()),
            static_cast<std::streamsize>(sizeof(Scalar) * rows * d));
    if (!in) throw ParseError(path + ": truncated checkpoint table");
    return ck;
}

void save_loss_curve(const std::vector<std::pair<std::int64_t, Scalar>>& curve,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << "step,loss\n";
    char buf[64];
    for (const auto& [step, loss] : curve) {
        std::snprintf(buf, sizeof(buf), "%" PRId64 ",%.17g\n", step, loss);
        out << buf;
    }
}

}  // namespace colligo
