#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pseudovec/matrix.hpp"
#include "pseudovec/rng.hpp"

namespace pseudovec {

// Raw per-word feature samples as read from a feature file: one sample
// per line, "word v_1 ... v_D". Words keep first-appearance order so the
// file round-trips byte-identically.
struct VisualFeatureSet {
    std::size_t dim = 0;
    std::vector<std::string> words;
    std::vector<Matrix> samples; // one (n_w x dim) block per word
    std::unordered_map<std::string, std::size_t> index;

    static VisualFeatureSet load(const std::string& path, std::size_t expected_dim);
    void save(const std::string& path) const;

    const Matrix* find(std::string_view word) const;
};

struct GaussianComponent {
    double weight = 0.0;
    std::vector<double> mean;
    std::vector<double> variance; // diagonal, floored
};

enum class VisualKind { Centroid, Mixture };

// One word's visual generator: a fixed centroid, or a diagonal Gaussian
// mixture drawn from at each training step.
struct VisualRepresentation {
    VisualKind kind = VisualKind::Centroid;
    std::vector<double> centroid;
    std::vector<GaussianComponent> components;

    std::size_t dim() const;
    std::vector<double> mean_vector() const; // centroid, or mixture mean
    void sample(Rng& rng, std::span<double> out) const;
};

std::vector<double> compute_centroid(const Matrix& samples);

// Diagonal-covariance EM, initialized by seeded k-means. Stops at
// max_iters or when the relative log-likelihood improvement drops below
// 1e-6. The per-iteration log-likelihoods land in *log_likelihoods when
// given.
VisualRepresentation fit_mixture(const Matrix& samples, int k, int max_iters, std::uint64_t seed,
                                 double variance_floor,
                                 std::vector<double>* log_likelihoods = nullptr);

// variance floor used by store fitting: 1e-6 of the pooled per-dimension
// sample variance (mean over dimensions), never below 1e-8
double global_variance_floor(const VisualFeatureSet& features);

// Fitted per-word representations, persisted between the offline fit and
// training. Immutable once built; training threads only read it.
class VisualStore {
  public:
    VisualStore() = default;
    VisualStore(VisualKind kind, std::size_t dim, int k, double variance_floor)
        : kind_(kind), dim_(dim), k_(k), floor_(variance_floor) {}

    // Fits every word in the feature set. Mixture words with fewer samples
    // than k get one component per sample. variance_floor_override < 0
    // means "derive from the data".
    static VisualStore fit(const VisualFeatureSet& features, VisualKind kind, int k,
                           int max_iters, std::uint64_t seed,
                           double variance_floor_override = -1.0);

    void insert(std::string word, VisualRepresentation repr);
    const VisualRepresentation* find(std::string_view word) const;

    VisualKind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    int k() const { return k_; }
    double variance_floor() const { return floor_; }
    std::size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }
    const VisualRepresentation& repr(std::size_t i) const { return reps_[i]; }

    void save(const std::string& path) const;
    static VisualStore load(const std::string& path);

  private:
    VisualKind kind_ = VisualKind::Centroid;
    std::size_t dim_ = 0;
    int k_ = 1;
    double floor_ = 0.0;
    std::vector<std::string> words_;
    std::vector<VisualRepresentation> reps_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace pseudovec
