#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pseudovec/corpus.hpp"
#include "pseudovec/huffman.hpp"
#include "pseudovec/matrix.hpp"
#include "pseudovec/rng.hpp"

namespace pseudovec {

class VisualStore;

enum class Backend { ExactSoftmax, HierarchicalSoftmax };
enum class VisualMode { None, Centroid, Hypersphere };
enum class MappingInit { Random, Neural };

struct TrainingConfig {
    std::size_t d_emb = 300;
    int window = 5;
    int epochs = 5;
    double lr_initial = 0.025;
    double lr_floor = 0.025 * 1e-4;
    double subsample_threshold = 0.0;
    Backend backend = Backend::HierarchicalSoftmax;
    VisualMode visual_mode = VisualMode::None;
    MappingInit mapping_init = MappingInit::Random;
    std::uint64_t seed = 1;
    int threads = 1;
};

// input:   W x D word representations being induced
// output:  exact backend: W x D context vectors; hierarchical backend:
//          (W-1) x D inner-node vectors
// mapping: D x D_v visual projection, empty for text-only models
struct ModelParameters {
    Matrix input;
    Matrix output;
    Matrix mapping;
};

// Per-word visual vectors resolved for one training step. An empty `v`
// or a nullptr entry means the word has no visual term.
struct VisualView {
    std::vector<const double*> v;
    std::size_t d_v = 0;

    const double* of(std::int32_t w) const {
        return v.empty() ? nullptr : v[static_cast<std::size_t>(w)];
    }
};

// out = u + mapping * v; v == nullptr leaves u unchanged
void compose_pseudoword(std::span<const double> u, const double* v, const Matrix& mapping,
                        std::span<double> out);

// log p(context | target) under the full softmax, every word's context
// vector replaced by its pseudoword. Enumerates the vocabulary: this is
// the oracle backend for small models.
double exact_log_prob(std::int32_t target_id, std::int32_t context_id,
                      const ModelParameters& params, const VisualView& view);

// log p(word | input_vec) as the product of sigmoid branch decisions
// along the word's Huffman path. Sigmoid arguments clamp to [-6, 6].
double hs_log_prob(std::span<const double> input_vec, std::int32_t word_id,
                   const HuffmanTree& tree, const ModelParameters& params);

// hierarchical pair score: the context pseudoword predicts the target's path
double hs_pair_log_prob(std::int32_t target_id, std::int32_t context_id,
                        const ModelParameters& params, const HuffmanTree& tree,
                        const VisualView& view);

// Gradients of log p for one pair, evaluated without updating anything.
// loss is the pair's negative log probability at the current parameters.
struct PairGradients {
    std::int32_t input_row = -1;
    std::vector<double> input_grad;
    std::vector<std::pair<std::int32_t, std::vector<double>>> output_grads;
    Matrix mapping_grad; // empty when the mapping is untouched
    double loss = 0.0;
};

PairGradients exact_pair_gradients(std::int32_t target_id, std::int32_t context_id,
                                   const ModelParameters& params, const VisualView& view);
PairGradients hs_pair_gradients(std::int32_t target_id, std::int32_t context_id,
                                const ModelParameters& params, const HuffmanTree& tree,
                                const VisualView& view);

// One ascent step on log p(context | target); returns the pair's negative
// log probability before the update. Throws NumericalError if any touched
// parameter goes non-finite.
double train_step(std::int32_t target_id, std::int32_t context_id, ModelParameters& params,
                  const HuffmanTree* tree, const VisualView& view, Backend backend, double lr);

struct TrainResult {
    ModelParameters params;
    std::vector<double> epoch_mean_loss;
};

using EpochCallback = std::function<void(int epoch, const ModelParameters&)>;

// Full training run over an id sequence (OOV already removed). The
// learning rate decays linearly from lr_initial to lr_floor over the
// expected pair total. threads > 1 shards the corpus and updates shared
// parameters without locks; bit-exact reproducibility holds for
// threads=1 with a fixed seed.
TrainResult train(std::span<const std::int32_t> corpus_ids, const Vocabulary& vocab,
                  const HuffmanTree* tree, const VisualStore* store,
                  const Matrix* initial_mapping, const TrainingConfig& config,
                  const EpochCallback& on_epoch = {});

// word2vec text format, input vectors only
void save_embeddings(const std::string& path, const Vocabulary& vocab, const Matrix& input);

} // namespace pseudovec
