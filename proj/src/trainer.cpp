#include "pseudovec/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "pseudovec/errors.hpp"
#include "pseudovec/kernels.hpp"
#include "pseudovec/text_io.hpp"
#include "pseudovec/visual.hpp"

namespace pseudovec {

namespace {

constexpr double kSigmoidClamp = 6.0;

inline double clamp_arg(double y) { return std::clamp(y, -kSigmoidClamp, kSigmoidClamp); }

void check_finite(const double* p, std::size_t n, const char* what) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(p[i]))
            throw NumericalError(std::string("non-finite value in ") + what +
                                 " after update; lower the learning rate");
}

} // namespace

void compose_pseudoword(std::span<const double> u, const double* v, const Matrix& mapping,
                        std::span<double> out) {
    if (out.size() != u.size())
        throw ArgumentError("pseudoword output size mismatch");
    std::copy(u.begin(), u.end(), out.begin());
    if (!v)
        return;
    if (mapping.rows() != u.size())
        throw ArgumentError("mapping rows " + std::to_string(mapping.rows()) +
                            " do not match embedding dimension " + std::to_string(u.size()));
    // out += M v, fused row-wise to avoid a temporary
    for (std::size_t r = 0; r < mapping.rows(); ++r)
        out[r] += kernels::dot(mapping.row(r), v, mapping.cols());
}

double exact_log_prob(std::int32_t target_id, std::int32_t context_id,
                      const ModelParameters& params, const VisualView& view) {
    const std::size_t W = params.output.rows();
    const std::size_t D = params.input.cols();
    const double* u_t = params.input.row(target_id);

    std::vector<double> z(D);
    std::vector<double> scores(W);
    for (std::size_t w = 0; w < W; ++w) {
        compose_pseudoword(params.output.row_span(w), view.of(static_cast<std::int32_t>(w)),
                           params.mapping, z);
        scores[w] = kernels::dot(z.data(), u_t, D);
    }
    const double m = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double s : scores)
        sum += std::exp(s - m);
    return scores[context_id] - (m + std::log(sum));
}

double hs_log_prob(std::span<const double> input_vec, std::int32_t word_id,
                   const HuffmanTree& tree, const ModelParameters& params) {
    const auto& path = tree.paths[word_id];
    const auto& code = tree.codes[word_id];
    double ll = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const double sign = code[i] == 0 ? 1.0 : -1.0;
        const double y =
            clamp_arg(sign * kernels::dot(params.output.row(path[i]), input_vec.data(),
                                          input_vec.size()));
        ll -= std::log1p(std::exp(-y)); // log sigmoid(y)
    }
    return ll;
}

double hs_pair_log_prob(std::int32_t target_id, std::int32_t context_id,
                        const ModelParameters& params, const HuffmanTree& tree,
                        const VisualView& view) {
    std::vector<double> z(params.input.cols());
    compose_pseudoword(params.input.row_span(context_id), view.of(context_id), params.mapping, z);
    return hs_log_prob(z, target_id, tree, params);
}

PairGradients exact_pair_gradients(std::int32_t target_id, std::int32_t context_id,
                                   const ModelParameters& params, const VisualView& view) {
    const std::size_t W = params.output.rows();
    const std::size_t D = params.input.cols();
    const double* u_t = params.input.row(target_id);

    Matrix z(W, D);
    std::vector<double> scores(W);
    for (std::size_t w = 0; w < W; ++w) {
        compose_pseudoword(params.output.row_span(w), view.of(static_cast<std::int32_t>(w)),
                           params.mapping, z.row_span(w));
        scores[w] = kernels::dot(z.row(w), u_t, D);
    }
    const double m = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double s : scores)
        sum += std::exp(s - m);
    const double lse = m + std::log(sum);

    PairGradients g;
    g.loss = lse - scores[context_id];
    g.input_row = target_id;
    g.input_grad.assign(D, 0.0);
    g.output_grads.reserve(W);

    const bool any_visual = !view.v.empty() &&
                            std::any_of(view.v.begin(), view.v.end(),
                                        [](const double* p) { return p != nullptr; });
    if (any_visual)
        g.mapping_grad = Matrix(params.mapping.rows(), params.mapping.cols());

    for (std::size_t w = 0; w < W; ++w) {
        const double p = std::exp(scores[w] - lse);
        const double coef = (static_cast<std::int32_t>(w) == context_id ? 1.0 : 0.0) - p;
        // d log p / d u_t accumulates coef * z_w
        kernels::axpy(coef, z.row(w), g.input_grad.data(), D);
        std::vector<double> out_grad(D);
        kernels::axpy(coef, u_t, out_grad.data(), D);
        g.output_grads.emplace_back(static_cast<std::int32_t>(w), std::move(out_grad));
        if (const double* v = view.of(static_cast<std::int32_t>(w)))
            kernels::ger(coef, u_t, D, v, view.d_v, g.mapping_grad.data());
    }
    return g;
}

PairGradients hs_pair_gradients(std::int32_t target_id, std::int32_t context_id,
                                const ModelParameters& params, const HuffmanTree& tree,
                                const VisualView& view) {
    const std::size_t D = params.input.cols();
    const double* v_ctx = view.of(context_id);

    std::vector<double> z(D);
    compose_pseudoword(params.input.row_span(context_id), v_ctx, params.mapping, z);

    PairGradients g;
    g.input_row = context_id;
    g.input_grad.assign(D, 0.0);

    const auto& path = tree.paths[target_id];
    const auto& code = tree.codes[target_id];
    g.output_grads.reserve(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        const std::int32_t node = path[i];
        const double sign = code[i] == 0 ? 1.0 : -1.0;
        const double y = clamp_arg(sign * kernels::dot(params.output.row(node), z.data(), D));
        const double e = std::exp(-y);
        g.loss += std::log1p(e);
        const double gcoef = sign * (e / (1.0 + e)); // sign * (1 - sigmoid(y))
        std::vector<double> node_grad(D);
        kernels::axpy(gcoef, z.data(), node_grad.data(), D);
        g.output_grads.emplace_back(node, std::move(node_grad));
        kernels::axpy(gcoef, params.output.row(node), g.input_grad.data(), D);
    }
    if (v_ctx) {
        g.mapping_grad = Matrix(params.mapping.rows(), params.mapping.cols());
        kernels::ger(1.0, g.input_grad.data(), D, v_ctx, view.d_v, g.mapping_grad.data());
    }
    return g;
}

double train_step(std::int32_t target_id, std::int32_t context_id, ModelParameters& params,
                  const HuffmanTree* tree, const VisualView& view, Backend backend, double lr) {
    PairGradients g = backend == Backend::ExactSoftmax
                          ? exact_pair_gradients(target_id, context_id, params, view)
                          : hs_pair_gradients(target_id, context_id, params, *tree, view);

    const std::size_t D = params.input.cols();
    kernels::axpy(lr, g.input_grad.data(), params.input.row(g.input_row), D);
    check_finite(params.input.row(g.input_row), D, "input vectors");
    for (const auto& [row, grad] : g.output_grads) {
        kernels::axpy(lr, grad.data(), params.output.row(row), D);
        check_finite(params.output.row(row), D, "output vectors");
    }
    if (!g.mapping_grad.empty()) {
        kernels::axpy(lr, g.mapping_grad.data(), params.mapping.data(), params.mapping.size());
        check_finite(params.mapping.data(), params.mapping.size(), "mapping matrix");
    }
    return g.loss;
}

namespace {

// Resolves per-word visual vectors for each step. Centroid vectors are
// fixed pointers into the store; hypersphere vectors are redrawn into a
// scratch buffer — all visual words for the exact backend (the denominator
// composes every word), only the context word for the hierarchical one.
class StepVisuals {
  public:
    StepVisuals(const VisualStore* store, const Vocabulary& vocab, VisualMode mode) : mode_(mode) {
        if (mode_ == VisualMode::None || !store || store->size() == 0)
            return;
        const std::size_t W = vocab.size();
        view_.v.assign(W, nullptr);
        view_.d_v = store->dim();
        reps_.assign(W, nullptr);
        for (std::size_t w = 0; w < W; ++w) {
            reps_[w] = store->find(vocab.word(static_cast<std::int32_t>(w)));
            if (!reps_[w])
                continue;
            if (mode_ == VisualMode::Centroid)
                view_.v[w] = reps_[w]->centroid.data();
            else
                visual_ids_.push_back(static_cast<std::int32_t>(w));
        }
        if (mode_ == VisualMode::Hypersphere)
            draws_ = Matrix(std::max<std::size_t>(1, visual_ids_.size()), view_.d_v);
    }

    const VisualView& prepare_exact(Rng& rng) {
        if (mode_ == VisualMode::Hypersphere) {
            for (std::size_t i = 0; i < visual_ids_.size(); ++i) {
                const std::int32_t w = visual_ids_[i];
                reps_[w]->sample(rng, draws_.row_span(i));
                view_.v[w] = draws_.row(i);
            }
        }
        return view_;
    }

    const VisualView& prepare_hs(std::int32_t context_id, Rng& rng) {
        if (mode_ != VisualMode::Hypersphere || view_.v.empty())
            return view_;
        if (last_context_ >= 0)
            view_.v[last_context_] = nullptr;
        last_context_ = -1;
        if (reps_[context_id]) {
            reps_[context_id]->sample(rng, draws_.row_span(0));
            view_.v[context_id] = draws_.row(0);
            last_context_ = context_id;
        }
        return view_;
    }

  private:
    VisualMode mode_;
    VisualView view_;
    std::vector<const VisualRepresentation*> reps_;
    std::vector<std::int32_t> visual_ids_;
    Matrix draws_;
    std::int32_t last_context_ = -1;
};

std::vector<std::span<const std::int32_t>> shard(std::span<const std::int32_t> ids, int threads) {
    std::vector<std::span<const std::int32_t>> shards;
    const std::size_t n = ids.size();
    const std::size_t t = static_cast<std::size_t>(threads);
    for (std::size_t i = 0; i < t; ++i) {
        const std::size_t lo = n * i / t;
        const std::size_t hi = n * (i + 1) / t;
        shards.push_back(ids.subspan(lo, hi - lo));
    }
    return shards;
}

void validate(std::size_t W, const HuffmanTree* tree, const VisualStore* store,
              const Matrix* mapping, const TrainingConfig& cfg) {
    if (W == 0)
        throw ConfigError("cannot train on an empty vocabulary");
    if (cfg.d_emb < 1)
        throw ConfigError("embedding dimension must be >= 1");
    if (!(cfg.lr_floor < cfg.lr_initial))
        throw ConfigError("lr_floor must be below lr_initial");
    if (cfg.threads < 1)
        throw ConfigError("threads must be >= 1");
    if (cfg.window < 1)
        throw ConfigError("window must be >= 1");
    if (cfg.backend == Backend::HierarchicalSoftmax) {
        if (!tree)
            throw ConfigError("hierarchical softmax needs a Huffman tree");
        if (tree->words() != W)
            throw ConfigError("Huffman tree covers " + std::to_string(tree->words()) +
                              " words but the vocabulary has " + std::to_string(W));
    }
    if (cfg.visual_mode != VisualMode::None) {
        if (!store)
            throw ConfigError("visual training needs a fitted visual store");
        if (!mapping)
            throw ConfigError("visual training needs an initialized mapping matrix");
        if (mapping->rows() != cfg.d_emb || mapping->cols() != store->dim())
            throw ConfigError("mapping shape " + std::to_string(mapping->rows()) + "x" +
                              std::to_string(mapping->cols()) + " does not match d_emb " +
                              std::to_string(cfg.d_emb) + " and visual dim " +
                              std::to_string(store->dim()));
        if (cfg.visual_mode == VisualMode::Centroid && store->kind() != VisualKind::Centroid)
            throw ConfigError("centroid training needs a centroid-mode visual store");
        if (cfg.visual_mode == VisualMode::Hypersphere && store->kind() != VisualKind::Mixture)
            throw ConfigError("hypersphere training needs a mixture-mode visual store");
    }
}

} // namespace

TrainResult train(std::span<const std::int32_t> corpus_ids, const Vocabulary& vocab,
                  const HuffmanTree* tree, const VisualStore* store,
                  const Matrix* initial_mapping, const TrainingConfig& cfg,
                  const EpochCallback& on_epoch) {
    const std::size_t W = vocab.size();
    validate(W, tree, store, initial_mapping, cfg);

    TrainResult result;
    ModelParameters& params = result.params;
    params.input = Matrix(W, cfg.d_emb);
    {
        Rng rng = fork_rng(cfg.seed, "embedding-init");
        const double inv = 1.0 / static_cast<double>(cfg.d_emb);
        for (std::size_t i = 0; i < params.input.size(); ++i)
            params.input.data()[i] = (rng.uniform01() - 0.5) * inv;
    }
    params.output = Matrix(cfg.backend == Backend::ExactSoftmax ? W : W - 1, cfg.d_emb, 0.0);
    if (cfg.visual_mode != VisualMode::None)
        params.mapping = *initial_mapping;

    const auto shards = shard(corpus_ids, cfg.threads);
    std::uint64_t pairs_per_epoch = 0;
    for (const auto& s : shards)
        pairs_per_epoch += window_pair_count(s.size(), cfg.window);
    const std::uint64_t total_steps =
        std::max<std::uint64_t>(1, pairs_per_epoch * static_cast<std::uint64_t>(cfg.epochs));

    std::atomic<std::uint64_t> done{0};
    const auto t0 = std::chrono::steady_clock::now();
    const WindowConfig wcfg{cfg.window, cfg.subsample_threshold};

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::mutex merge_mutex;
        double epoch_loss = 0.0;
        std::uint64_t epoch_pairs = 0;
        std::exception_ptr failure;

        auto worker = [&](int tid) {
            try {
                Rng rng = fork_rng(cfg.seed, "train/epoch" + std::to_string(epoch) + "/thread" +
                                                 std::to_string(tid));
                StepVisuals visuals(store, vocab, cfg.visual_mode);
                double loss_sum = 0.0;
                std::uint64_t count = 0;
                for_each_pair(shards[tid], vocab, wcfg, rng, [&](std::int32_t t, std::int32_t c) {
                    const VisualView& view = cfg.backend == Backend::ExactSoftmax
                                                 ? visuals.prepare_exact(rng)
                                                 : visuals.prepare_hs(c, rng);
                    const std::uint64_t step = done.fetch_add(1, std::memory_order_relaxed);
                    double lr = cfg.lr_initial -
                                (cfg.lr_initial - cfg.lr_floor) *
                                    (static_cast<double>(step) / static_cast<double>(total_steps));
                    if (lr < cfg.lr_floor)
                        lr = cfg.lr_floor;
                    loss_sum += train_step(t, c, params, tree, view, cfg.backend, lr);
                    ++count;
                    if (tid == 0 && (count & 0xFFFF) == 0) {
                        const double secs =
                            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count();
                        const std::uint64_t total_done = done.load(std::memory_order_relaxed);
                        std::fprintf(stderr, "\repoch %d/%d  lr %.6f  %.0f pairs/s   ",
                                     epoch + 1, cfg.epochs, lr,
                                     static_cast<double>(total_done) / std::max(secs, 1e-9));
                    }
                });
                const std::lock_guard<std::mutex> lock(merge_mutex);
                epoch_loss += loss_sum;
                epoch_pairs += count;
            } catch (...) {
                const std::lock_guard<std::mutex> lock(merge_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        };

        if (cfg.threads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(cfg.threads);
            for (int tid = 0; tid < cfg.threads; ++tid)
                pool.emplace_back(worker, tid);
            for (auto& th : pool)
                th.join();
        }
        if (failure)
            std::rethrow_exception(failure);

        const double mean_loss =
            epoch_pairs ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0;
        result.epoch_mean_loss.push_back(mean_loss);
        std::fprintf(stderr, "\repoch %d/%d  mean loss %.6f  (%llu pairs)        \n", epoch + 1,
                     cfg.epochs, mean_loss, static_cast<unsigned long long>(epoch_pairs));
        if (on_epoch)
            on_epoch(epoch, params);
    }
    return result;
}

void save_embeddings(const std::string& path, const Vocabulary& vocab, const Matrix& input) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write embedding file: " + path);
    out << vocab.size() << " " << input.cols() << "\n";
    for (std::size_t w = 0; w < vocab.size(); ++w) {
        out << vocab.word(static_cast<std::int32_t>(w));
        for (std::size_t d = 0; d < input.cols(); ++d)
            out << " " << format_double(input.at(w, d));
        out << "\n";
    }
    if (!out)
        throw IoError("write failed: " + path);
}

} // namespace pseudovec
