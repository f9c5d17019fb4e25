#include "pseudovec/visual.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pseudovec/errors.hpp"
#include "pseudovec/kernels.hpp"
#include "pseudovec/text_io.hpp"

namespace pseudovec {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836; // log(2*pi)

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r')
            ++j;
        if (j > i)
            out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

} // namespace

VisualFeatureSet VisualFeatureSet::load(const std::string& path, std::size_t expected_dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open feature file: " + path);

    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<double>> flat; // row-major growing blocks
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_ws(line);
        if (fields.empty())
            continue;
        if (fields.size() != expected_dim + 1)
            throw FormatError(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(expected_dim) + " values for word '" +
                              std::string(fields[0]) + "', got " +
                              std::to_string(fields.size() - 1));
        std::string word(fields[0]);
        auto [it, fresh] = flat.try_emplace(std::move(word));
        if (fresh)
            order.push_back(std::string(fields[0]));
        it->second.reserve(it->second.size() + expected_dim);
        for (std::size_t d = 1; d < fields.size(); ++d)
            it->second.push_back(parse_double(fields[d], path + ":" + std::to_string(line_no)));
    }
    if (order.empty())
        throw FormatError("feature file contains no samples: " + path);

    VisualFeatureSet set;
    set.dim = expected_dim;
    set.words = std::move(order);
    set.samples.reserve(set.words.size());
    for (std::size_t i = 0; i < set.words.size(); ++i) {
        auto& buf = flat[set.words[i]];
        const std::size_t n = buf.size() / expected_dim;
        Matrix m(n, expected_dim);
        std::copy(buf.begin(), buf.end(), m.data());
        set.samples.push_back(std::move(m));
        set.index.emplace(set.words[i], i);
    }
    return set;
}

void VisualFeatureSet::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write feature file: " + path);
    for (std::size_t i = 0; i < words.size(); ++i) {
        const Matrix& block = samples[i];
        for (std::size_t r = 0; r < block.rows(); ++r) {
            out << words[i];
            for (std::size_t d = 0; d < block.cols(); ++d)
                out << " " << format_double(block.at(r, d));
            out << "\n";
        }
    }
    if (!out)
        throw IoError("write failed: " + path);
}

const Matrix* VisualFeatureSet::find(std::string_view word) const {
    auto it = index.find(std::string(word));
    return it == index.end() ? nullptr : &samples[it->second];
}

std::size_t VisualRepresentation::dim() const {
    return kind == VisualKind::Centroid ? centroid.size()
                                        : (components.empty() ? 0 : components[0].mean.size());
}

std::vector<double> VisualRepresentation::mean_vector() const {
    if (kind == VisualKind::Centroid)
        return centroid;
    std::vector<double> m(dim(), 0.0);
    for (const auto& c : components)
        kernels::axpy(c.weight, c.mean.data(), m.data(), m.size());
    return m;
}

void VisualRepresentation::sample(Rng& rng, std::span<double> out) const {
    if (kind == VisualKind::Centroid) {
        std::copy(centroid.begin(), centroid.end(), out.begin());
        return;
    }
    const double u = rng.uniform01();
    std::size_t pick = components.size() - 1;
    double cum = 0.0;
    for (std::size_t k = 0; k < components.size(); ++k) {
        cum += components[k].weight;
        if (u < cum) {
            pick = k;
            break;
        }
    }
    const auto& comp = components[pick];
    for (std::size_t d = 0; d < comp.mean.size(); ++d)
        out[d] = comp.mean[d] + std::sqrt(comp.variance[d]) * rng.normal();
}

std::vector<double> compute_centroid(const Matrix& samples) {
    if (samples.rows() == 0)
        throw ArgumentError("centroid of an empty sample list");
    std::vector<double> acc(samples.cols(), 0.0);
    for (std::size_t r = 0; r < samples.rows(); ++r)
        kernels::axpy(1.0, samples.row(r), acc.data(), acc.size());
    kernels::scale(1.0 / static_cast<double>(samples.rows()), acc.data(), acc.size());
    return acc;
}

namespace {

// Seeded k-means giving EM its starting point. Ties go to the lowest
// cluster index; an emptied cluster is re-seeded with the point farthest
// from its current center, so the result is deterministic.
struct KmeansResult {
    Matrix centers;
    std::vector<std::size_t> assignment;
};

KmeansResult kmeans(const Matrix& samples, std::size_t k, Rng& rng) {
    const std::size_t n = samples.rows();
    const std::size_t dim = samples.cols();

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = i;
    for (std::size_t i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + rng.below(n - i)]);

    Matrix centers(k, dim);
    for (std::size_t c = 0; c < k; ++c)
        std::copy(samples.row(idx[c]), samples.row(idx[c]) + dim, centers.row(c));

    std::vector<std::size_t> assign(n, 0);
    std::vector<double> dist(n, 0.0);
    for (int iter = 0; iter < 25; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = kernels::squared_distance(samples.row(i), centers.row(c), dim);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            dist[i] = best_d;
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }

        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i)
            ++count[assign[i]];
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] > 0)
                continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (count[assign[i]] > 1 && dist[i] > far_d) {
                    far_d = dist[i];
                    far = i;
                }
            }
            --count[assign[far]];
            assign[far] = c;
            count[c] = 1;
            changed = true;
        }

        for (std::size_t c = 0; c < k; ++c)
            std::fill(centers.row(c), centers.row(c) + dim, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            kernels::axpy(1.0, samples.row(i), centers.row(assign[i]), dim);
        for (std::size_t c = 0; c < k; ++c)
            kernels::scale(1.0 / static_cast<double>(count[c]), centers.row(c), dim);

        if (!changed)
            break;
    }
    return {std::move(centers), std::move(assign)};
}

double log_density(const double* x, const GaussianComponent& c, double const_term) {
    double q = 0.0;
    for (std::size_t d = 0; d < c.mean.size(); ++d) {
        const double diff = x[d] - c.mean[d];
        q += diff * diff / c.variance[d];
    }
    return const_term - 0.5 * q;
}

} // namespace

VisualRepresentation fit_mixture(const Matrix& samples, int k, int max_iters, std::uint64_t seed,
                                 double variance_floor, std::vector<double>* log_likelihoods) {
    const std::size_t n = samples.rows();
    const std::size_t dim = samples.cols();
    if (k < 1)
        throw ArgumentError("mixture needs k >= 1");
    if (static_cast<std::size_t>(k) > n)
        throw ArgumentError("mixture k=" + std::to_string(k) + " exceeds sample count " +
                            std::to_string(n));
    if (!(variance_floor > 0.0))
        throw ArgumentError("variance floor must be positive");

    Rng rng(seed);
    const auto km = kmeans(samples, static_cast<std::size_t>(k), rng);

    VisualRepresentation repr;
    repr.kind = VisualKind::Mixture;
    repr.components.resize(k);
    {
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i)
            ++count[km.assignment[i]];
        for (int c = 0; c < k; ++c) {
            auto& comp = repr.components[c];
            comp.weight = static_cast<double>(count[c]) / static_cast<double>(n);
            comp.mean.assign(km.centers.row(c), km.centers.row(c) + dim);
            comp.variance.assign(dim, 0.0);
        }
        for (std::size_t i = 0; i < n; ++i) {
            auto& comp = repr.components[km.assignment[i]];
            const double* x = samples.row(i);
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = x[d] - comp.mean[d];
                comp.variance[d] += diff * diff;
            }
        }
        for (int c = 0; c < k; ++c)
            for (std::size_t d = 0; d < dim; ++d)
                repr.components[c].variance[d] = std::max(
                    repr.components[c].variance[d] / static_cast<double>(count[c]),
                    variance_floor);
    }

    Matrix resp(n, k);
    std::vector<double> const_term(k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        for (int c = 0; c < k; ++c) {
            double logdet = 0.0;
            for (std::size_t d = 0; d < dim; ++d)
                logdet += std::log(repr.components[c].variance[d]);
            const_term[c] = std::log(repr.components[c].weight) -
                            0.5 * (static_cast<double>(dim) * kLog2Pi + logdet);
        }

        // E step
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double* r = resp.row(i);
            double m = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                r[c] = log_density(samples.row(i), repr.components[c], const_term[c]);
                m = std::max(m, r[c]);
            }
            double sum = 0.0;
            for (int c = 0; c < k; ++c)
                sum += std::exp(r[c] - m);
            const double lse = m + std::log(sum);
            ll += lse;
            for (int c = 0; c < k; ++c)
                r[c] = std::exp(r[c] - lse);
        }
        if (log_likelihoods)
            log_likelihoods->push_back(ll);
        const bool converged =
            iter > 0 && (ll - prev_ll) < 1e-6 * std::max(1.0, std::abs(prev_ll));
        prev_ll = ll;
        if (converged)
            break;

        // M step, two-pass variances for stability
        double weight_sum = 0.0;
        for (int c = 0; c < k; ++c) {
            auto& comp = repr.components[c];
            double mass = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                mass += resp.at(i, c);
            if (mass < 1e-12) {
                comp.weight = 1e-12; // keep the component alive on its old parameters
                weight_sum += comp.weight;
                continue;
            }
            std::fill(comp.mean.begin(), comp.mean.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i)
                kernels::axpy(resp.at(i, c), samples.row(i), comp.mean.data(), dim);
            kernels::scale(1.0 / mass, comp.mean.data(), dim);

            std::fill(comp.variance.begin(), comp.variance.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double* x = samples.row(i);
                const double w = resp.at(i, c);
                for (std::size_t d = 0; d < dim; ++d) {
                    const double diff = x[d] - comp.mean[d];
                    comp.variance[d] += w * diff * diff;
                }
            }
            for (std::size_t d = 0; d < dim; ++d)
                comp.variance[d] = std::max(comp.variance[d] / mass, variance_floor);

            comp.weight = mass / static_cast<double>(n);
            weight_sum += comp.weight;
        }
        for (int c = 0; c < k; ++c)
            repr.components[c].weight /= weight_sum;
    }
    return repr;
}

double global_variance_floor(const VisualFeatureSet& features) {
    std::size_t total = 0;
    std::vector<double> mean(features.dim, 0.0);
    for (const auto& block : features.samples) {
        for (std::size_t r = 0; r < block.rows(); ++r)
            kernels::axpy(1.0, block.row(r), mean.data(), mean.size());
        total += block.rows();
    }
    kernels::scale(1.0 / static_cast<double>(total), mean.data(), mean.size());

    double var_sum = 0.0;
    for (const auto& block : features.samples)
        for (std::size_t r = 0; r < block.rows(); ++r)
            var_sum += kernels::squared_distance(block.row(r), mean.data(), mean.size());
    const double mean_var =
        var_sum / (static_cast<double>(total) * static_cast<double>(features.dim));
    return std::max(1e-8, 1e-6 * mean_var);
}

VisualStore VisualStore::fit(const VisualFeatureSet& features, VisualKind kind, int k,
                             int max_iters, std::uint64_t seed, double variance_floor_override) {
    const double floor = variance_floor_override >= 0.0 ? variance_floor_override
                                                        : global_variance_floor(features);
    VisualStore store(kind, features.dim, k, floor);
    for (std::size_t i = 0; i < features.words.size(); ++i) {
        const Matrix& block = features.samples[i];
        VisualRepresentation repr;
        if (kind == VisualKind::Centroid) {
            repr.kind = VisualKind::Centroid;
            repr.centroid = compute_centroid(block);
        } else {
            const int kw = std::min<int>(k, static_cast<int>(block.rows()));
            repr = fit_mixture(block, kw, max_iters,
                               fork_seed(seed, "gmm/" + features.words[i]), floor);
        }
        store.insert(features.words[i], std::move(repr));
    }
    return store;
}

void VisualStore::insert(std::string word, VisualRepresentation repr) {
    index_.emplace(word, words_.size());
    words_.push_back(std::move(word));
    reps_.push_back(std::move(repr));
}

const VisualRepresentation* VisualStore::find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? nullptr : &reps_[it->second];
}

void VisualStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write visual store: " + path);
    out << "MODE " << (kind_ == VisualKind::Centroid ? "centroid" : "mixture") << " DIM " << dim_
        << " K " << k_ << " FLOOR " << format_double(floor_) << "\n";
    for (std::size_t i = 0; i < words_.size(); ++i) {
        const auto& repr = reps_[i];
        if (kind_ == VisualKind::Centroid) {
            out << "WORD " << words_[i] << "\n";
            for (std::size_t d = 0; d < repr.centroid.size(); ++d)
                out << (d ? " " : "") << format_double(repr.centroid[d]);
            out << "\n";
        } else {
            out << "WORD " << words_[i] << " K " << repr.components.size() << "\n";
            for (const auto& comp : repr.components) {
                out << "COMP " << format_double(comp.weight) << "\n";
                for (std::size_t d = 0; d < comp.mean.size(); ++d)
                    out << (d ? " " : "") << format_double(comp.mean[d]);
                out << "\n";
                for (std::size_t d = 0; d < comp.variance.size(); ++d)
                    out << (d ? " " : "") << format_double(comp.variance[d]);
                out << "\n";
            }
        }
    }
    if (!out)
        throw IoError("write failed: " + path);
}

namespace {

std::vector<double> parse_vector_line(std::istream& in, std::size_t dim, const std::string& path,
                                      std::size_t& line_no) {
    std::string line;
    if (!std::getline(in, line))
        throw FormatError(path + ": truncated, expected a vector line");
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.size() != dim)
        throw FormatError(path + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(dim) + " values, got " + std::to_string(fields.size()));
    std::vector<double> v(dim);
    for (std::size_t d = 0; d < dim; ++d)
        v[d] = parse_double(fields[d], path + ":" + std::to_string(line_no));
    return v;
}

} // namespace

VisualStore VisualStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open visual store: " + path);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        throw FormatError("empty visual store: " + path);
    ++line_no;
    const auto h = split_ws(line);
    if (h.size() != 8 || h[0] != "MODE" || h[2] != "DIM" || h[4] != "K" || h[6] != "FLOOR")
        throw FormatError("bad visual store header: " + line);
    VisualKind kind;
    if (h[1] == "centroid")
        kind = VisualKind::Centroid;
    else if (h[1] == "mixture")
        kind = VisualKind::Mixture;
    else
        throw FormatError("unknown visual store mode: " + std::string(h[1]));
    const auto dim = parse_int<std::size_t>(h[3], path);
    const auto k = parse_int<int>(h[5], path);
    const double floor = parse_double(h[7], path);

    VisualStore store(kind, dim, k, floor);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto fields = split_ws(line);
        if (fields.empty() || fields[0] != "WORD")
            throw FormatError(path + ":" + std::to_string(line_no) + ": expected WORD block");
        VisualRepresentation repr;
        if (kind == VisualKind::Centroid) {
            if (fields.size() != 2)
                throw FormatError(path + ":" + std::to_string(line_no) + ": bad WORD line");
            repr.kind = VisualKind::Centroid;
            repr.centroid = parse_vector_line(in, dim, path, line_no);
        } else {
            if (fields.size() != 4 || fields[2] != "K")
                throw FormatError(path + ":" + std::to_string(line_no) + ": bad WORD line");
            repr.kind = VisualKind::Mixture;
            const auto kw = parse_int<std::size_t>(fields[3], path);
            repr.components.resize(kw);
            for (std::size_t c = 0; c < kw; ++c) {
                if (!std::getline(in, line))
                    throw FormatError(path + ": truncated component block");
                ++line_no;
                const auto comp_fields = split_ws(line);
                if (comp_fields.size() != 2 || comp_fields[0] != "COMP")
                    throw FormatError(path + ":" + std::to_string(line_no) + ": bad COMP line");
                repr.components[c].weight = parse_double(comp_fields[1], path);
                repr.components[c].mean = parse_vector_line(in, dim, path, line_no);
                repr.components[c].variance = parse_vector_line(in, dim, path, line_no);
            }
        }
        store.insert(std::string(fields[1]), std::move(repr));
    }
    return store;
}

} // namespace pseudovec
