#include "pseudovec/mapping.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "pseudovec/embeddings.hpp"
#include "pseudovec/errors.hpp"
#include "pseudovec/kernels.hpp"
#include "pseudovec/text_io.hpp"
#include "pseudovec/visual.hpp"

namespace pseudovec {

Matrix init_random_mapping(std::size_t d_emb, std::size_t d_v, Rng& rng) {
    Matrix m(d_emb, d_v);
    const double inv = 1.0 / static_cast<double>(d_emb);
    for (std::size_t i = 0; i < m.size(); ++i)
        m.data()[i] = (rng.uniform01() - 0.5) * inv;
    return m;
}

namespace {

double mean_squared_error(const Matrix& m, const Matrix& inputs, const Matrix& targets,
                          std::vector<double>& scratch) {
    double total = 0.0;
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
        kernels::matvec(m.data(), m.rows(), m.cols(), inputs.row(i), scratch.data());
        total += kernels::squared_distance(scratch.data(), targets.row(i), m.rows());
    }
    return total / static_cast<double>(inputs.rows());
}

} // namespace

NeuralInitResult fit_linear_mapping(const Matrix& inputs, const Matrix& targets,
                                    const NeuralInitOptions& opt, Rng& rng) {
    if (inputs.rows() == 0)
        throw ConfigError("mapping pretraining set is empty: no word has both visual "
                          "features and a pretrained embedding");
    if (inputs.rows() != targets.rows())
        throw ArgumentError("mapping pretraining rows disagree: " +
                            std::to_string(inputs.rows()) + " inputs vs " +
                            std::to_string(targets.rows()) + " targets");

    const std::size_t d_v = inputs.cols();
    const std::size_t d_emb = targets.cols();
    const std::size_t n = inputs.rows();

    NeuralInitResult res;
    res.mapping = init_random_mapping(d_emb, d_v, rng);
    Matrix& m = res.mapping;

    std::vector<double> predicted(d_emb), residual(d_emb);
    res.initial_mse = mean_squared_error(m, inputs, targets, predicted);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    double lr = opt.lr;
    double prev = res.initial_mse;
    const std::size_t batch = std::max<std::size_t>(1, static_cast<std::size_t>(opt.batch_size));
    Matrix grad(d_emb, d_v);
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i)
            std::swap(order[i], order[i + rng.below(n - i)]);

        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            std::fill(grad.data(), grad.data() + grad.size(), 0.0);
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t row = order[i];
                kernels::matvec(m.data(), d_emb, d_v, inputs.row(row), predicted.data());
                for (std::size_t d = 0; d < d_emb; ++d)
                    residual[d] = predicted[d] - targets.at(row, d);
                kernels::ger(2.0 / static_cast<double>(end - start), residual.data(), d_emb,
                             inputs.row(row), d_v, grad.data());
            }
            kernels::axpy(-lr, grad.data(), m.data(), m.size());
        }

        const double mse = mean_squared_error(m, inputs, targets, predicted);
        res.epoch_mse.push_back(mse);
        if (mse > prev)
            lr *= 0.5; // step too large for this problem; back off and continue
        prev = mse;
    }
    res.final_mse = res.epoch_mse.empty() ? res.initial_mse : res.epoch_mse.back();
    return res;
}

MappingTrainingSet intersect_for_mapping(const VisualStore& store,
                                         const EmbeddingTable& pretrained) {
    std::vector<std::size_t> store_rows;
    std::vector<std::int32_t> target_rows;
    for (std::size_t i = 0; i < store.size(); ++i) {
        const std::int32_t id = pretrained.id_of(store.words()[i]);
        if (id >= 0) {
            store_rows.push_back(i);
            target_rows.push_back(id);
        }
    }
    MappingTrainingSet set;
    set.skipped = store.size() - store_rows.size();
    set.inputs = Matrix(store_rows.size(), store.dim());
    set.targets = Matrix(store_rows.size(), pretrained.vectors.cols());
    for (std::size_t i = 0; i < store_rows.size(); ++i) {
        const auto mean = store.repr(store_rows[i]).mean_vector();
        std::copy(mean.begin(), mean.end(), set.inputs.row(i));
        const double* t = pretrained.vectors.row(target_rows[i]);
        std::copy(t, t + set.targets.cols(), set.targets.row(i));
    }
    return set;
}

void project(const Matrix& mapping, std::span<const double> v, std::span<double> out) {
    if (v.size() != mapping.cols() || out.size() != mapping.rows())
        throw ArgumentError("projection shape mismatch: mapping is " +
                            std::to_string(mapping.rows()) + "x" +
                            std::to_string(mapping.cols()) + ", input " +
                            std::to_string(v.size()));
    kernels::matvec(mapping.data(), mapping.rows(), mapping.cols(), v.data(), out.data());
}

void save_mapping(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write mapping file: " + path);
    out << "MAPPING " << m.rows() << " " << m.cols() << "\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c)
            out << (c ? " " : "") << format_double(m.at(r, c));
        out << "\n";
    }
    if (!out)
        throw IoError("write failed: " + path);
}

Matrix load_mapping(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open mapping file: " + path);
    std::string tag;
    std::size_t rows = 0, cols = 0;
    if (!(in >> tag >> rows >> cols) || tag != "MAPPING")
        throw FormatError("bad mapping header in " + path);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!(in >> m.data()[i]))
            throw FormatError(path + ": truncated mapping matrix");
    }
    return m;
}

} // namespace pseudovec
