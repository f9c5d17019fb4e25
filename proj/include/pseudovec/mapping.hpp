#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pseudovec/matrix.hpp"
#include "pseudovec/rng.hpp"

namespace pseudovec {

class VisualStore;
struct EmbeddingTable;

// Mapping entries use the same range as freshly initialized embeddings,
// uniform on [-0.5/d_emb, 0.5/d_emb].
Matrix init_random_mapping(std::size_t d_emb, std::size_t d_v, Rng& rng);

struct NeuralInitOptions {
    int epochs = 200;
    double lr = 0.05;
    int batch_size = 16;
};

struct NeuralInitResult {
    Matrix mapping;
    double initial_mse = 0.0;
    double final_mse = 0.0;
    std::vector<double> epoch_mse; // measured after each epoch
};

// Fits mapping so mapping * inputs[i] tracks targets[i] in least squares,
// by mini-batch gradient descent from a random start. If an epoch raises
// the MSE the learning rate halves and training continues.
NeuralInitResult fit_linear_mapping(const Matrix& inputs, const Matrix& targets,
                                    const NeuralInitOptions& opt, Rng& rng);

// Pairs each store word's mean visual vector with its pretrained
// embedding; words missing on either side are skipped and counted.
struct MappingTrainingSet {
    Matrix inputs;  // n x d_v
    Matrix targets; // n x d_emb
    std::size_t skipped = 0;
};
MappingTrainingSet intersect_for_mapping(const VisualStore& store,
                                         const EmbeddingTable& pretrained);

// out = mapping * v
void project(const Matrix& mapping, std::span<const double> v, std::span<double> out);

void save_mapping(const std::string& path, const Matrix& m);
Matrix load_mapping(const std::string& path);

} // namespace pseudovec
