#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pseudovec/rng.hpp"

namespace pseudovec {

// Word <-> dense-id map with occurrence counts. Ids are assigned in
// descending count order (ties lexicographic), so a vocabulary is a pure
// function of the corpus and min_count.
class Vocabulary {
  public:
    static Vocabulary build(const std::string& corpus_path, std::uint64_t min_count);
    static Vocabulary from_counts(std::vector<std::pair<std::string, std::uint64_t>> word_counts);

    std::size_t size() const { return words_.size(); }
    std::int32_t id_of(std::string_view word) const;
    const std::string& word(std::int32_t id) const { return words_[id]; }
    std::uint64_t count(std::int32_t id) const { return counts_[id]; }
    std::uint64_t total_tokens() const { return total_tokens_; }

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

  private:
    std::vector<std::string> words_;
    std::vector<std::uint64_t> counts_;
    std::unordered_map<std::string, std::int32_t> index_;
    std::uint64_t total_tokens_ = 0;
};

struct WindowConfig {
    int window_size = 5;               // c: offsets -c..c around each target
    double subsample_threshold = 0.0;  // 0 disables frequent-word dropping
};

// keep probability min(1, sqrt(t/f) + t/f) with f the corpus frequency;
// threshold 0 keeps everything
double subsample_keep_probability(std::uint64_t word_count, std::uint64_t total_tokens,
                                  double threshold);

// Maps tokens to ids, deleting out-of-vocabulary tokens so later windows
// close over them.
std::vector<std::int32_t> map_tokens(std::span<const std::string> tokens, const Vocabulary& vocab);
std::vector<std::int32_t> read_token_ids(const std::string& corpus_path, const Vocabulary& vocab);

// number of (target, context) pairs a sequence of `len` tokens yields at
// the given window size, without subsampling
std::uint64_t window_pair_count(std::size_t len, int window_size);

// Emits one (target, context) pair per in-window position. Subsampling,
// when enabled, drops tokens before windowing. `ids` must be OOV-free.
template <typename Fn>
void for_each_pair(std::span<const std::int32_t> ids, const Vocabulary& vocab,
                   const WindowConfig& cfg, Rng& rng, Fn&& fn) {
    std::vector<std::int32_t> kept;
    std::span<const std::int32_t> seq = ids;
    if (cfg.subsample_threshold > 0.0) {
        kept.reserve(ids.size());
        for (std::int32_t id : ids) {
            const double keep = subsample_keep_probability(vocab.count(id), vocab.total_tokens(),
                                                           cfg.subsample_threshold);
            if (rng.uniform01() < keep)
                kept.push_back(id);
        }
        seq = kept;
    }
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(seq.size());
    const std::ptrdiff_t c = cfg.window_size;
    for (std::ptrdiff_t t = 0; t < n; ++t) {
        for (std::ptrdiff_t j = -c; j <= c; ++j) {
            if (j == 0)
                continue;
            const std::ptrdiff_t s = t + j;
            if (s < 0 || s >= n)
                continue;
            fn(seq[t], seq[s]);
        }
    }
}

// string-token convenience: map (dropping OOV), then window
template <typename Fn>
void iterate_pairs(std::span<const std::string> tokens, const Vocabulary& vocab,
                   const WindowConfig& cfg, Rng& rng, Fn&& fn) {
    const std::vector<std::int32_t> ids = map_tokens(tokens, vocab);
    for_each_pair(std::span<const std::int32_t>(ids), vocab, cfg, rng, std::forward<Fn>(fn));
}

} // namespace pseudovec
