#pragma once

#include <span>
#include <string>
#include <vector>

#include "pseudovec/embeddings.hpp"

namespace pseudovec {

// a.b / (|a||b|), clamped to [-1, 1]; zero vectors are an error
double cosine(std::span<const double> a, std::span<const double> b);

// Spearman's rank correlation with average ranks for ties. Undefined
// (and an error) for fewer than 2 points or a fully tied list.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct BenchmarkPair {
    std::string word_a;
    std::string word_b;
    double human_score = 0.0;
};

// TSV benchmark: "word_a<TAB>word_b<TAB>score" lines, '#' comments.
struct BenchmarkSet {
    std::string name;
    std::vector<BenchmarkPair> pairs;

    static BenchmarkSet load_tsv(const std::string& path, std::string name);
};

struct BenchmarkResult {
    double rho = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
};

// Cosine-scores every pair with both words in vocabulary, skips (and
// counts) the rest, and correlates model scores with the human ones.
BenchmarkResult run_benchmark(const EmbeddingTable& embeddings, const BenchmarkSet& bench);

struct Neighbor {
    std::string word;
    double cosine = 0.0;
};

// k highest-cosine words excluding the query, ties broken lexicographically
std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& embeddings,
                                        const std::string& query, std::size_t k);

} // namespace pseudovec
