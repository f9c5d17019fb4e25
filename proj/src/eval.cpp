#include "pseudovec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "pseudovec/errors.hpp"
#include "pseudovec/kernels.hpp"
#include "pseudovec/text_io.hpp"

namespace pseudovec {

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ArgumentError("cosine of vectors with different lengths");
    const double na = kernels::dot(a.data(), a.data(), a.size());
    const double nb = kernels::dot(b.data(), b.data(), b.size());
    if (na == 0.0 || nb == 0.0)
        throw ArgumentError("cosine of a zero vector is undefined");
    const double c = kernels::dot(a.data(), b.data(), a.size()) / std::sqrt(na * nb);
    return std::clamp(c, -1.0, 1.0);
}

namespace {

// 1-based average ranks; tied values share the mean of their rank span
std::vector<double> average_ranks(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]])
            ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw ArgumentError("spearman lists have different lengths");
    if (xs.size() < 2)
        throw ArgumentError("spearman is undefined for fewer than 2 points");

    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ArgumentError("spearman is undefined when all values in a list are tied");
    return sxy / std::sqrt(sxx * syy);
}

BenchmarkSet BenchmarkSet::load_tsv(const std::string& path, std::string name) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open benchmark file: " + path);

    BenchmarkSet set;
    set.name = std::move(name);
    std::map<std::pair<std::string, std::string>, double> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": expected word_a<TAB>word_b<TAB>score");
        BenchmarkPair pair;
        pair.word_a = line.substr(0, t1);
        pair.word_b = line.substr(t1 + 1, t2 - t1 - 1);
        pair.human_score = parse_double(std::string_view(line).substr(t2 + 1),
                                        path + ":" + std::to_string(line_no));
        auto key = std::minmax(pair.word_a, pair.word_b);
        auto [it, fresh] = seen.emplace(std::pair{key.first, key.second}, pair.human_score);
        if (!fresh && it->second != pair.human_score)
            throw FormatError(path + ":" + std::to_string(line_no) + ": pair '" + pair.word_a +
                              "'/'" + pair.word_b + "' repeats with a conflicting score");
        set.pairs.push_back(std::move(pair));
    }
    if (set.pairs.empty())
        throw FormatError("benchmark file has no pairs: " + path);
    return set;
}

BenchmarkResult run_benchmark(const EmbeddingTable& embeddings, const BenchmarkSet& bench) {
    std::vector<double> model_scores, human_scores;
    BenchmarkResult res;
    for (const auto& pair : bench.pairs) {
        const double* a = embeddings.vector_of(pair.word_a);
        const double* b = embeddings.vector_of(pair.word_b);
        if (!a || !b) {
            ++res.skipped;
            continue;
        }
        model_scores.push_back(
            cosine({a, embeddings.vectors.cols()}, {b, embeddings.vectors.cols()}));
        human_scores.push_back(pair.human_score);
    }
    res.evaluated = model_scores.size();
    if (res.evaluated < 2)
        throw CoverageError("benchmark '" + bench.name + "': only " +
                            std::to_string(res.evaluated) + " of " +
                            std::to_string(bench.pairs.size()) +
                            " pairs are in vocabulary; need at least 2");
    res.rho = spearman(model_scores, human_scores);
    return res;
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& embeddings,
                                        const std::string& query, std::size_t k) {
    const std::int32_t qid = embeddings.id_of(query);
    if (qid < 0)
        throw ArgumentError("query word '" + query + "' is not in the vocabulary");
    if (k < 1)
        throw ArgumentError("neighbor count must be >= 1");
    const std::size_t dim = embeddings.vectors.cols();
    const std::span<const double> q{embeddings.vectors.row(qid), dim};

    std::vector<Neighbor> all;
    all.reserve(embeddings.words.size());
    for (std::size_t w = 0; w < embeddings.words.size(); ++w) {
        if (static_cast<std::int32_t>(w) == qid)
            continue;
        const std::span<const double> x{embeddings.vectors.row(w), dim};
        if (kernels::dot(x.data(), x.data(), dim) == 0.0)
            continue; // cosine undefined for zero vectors; leave them unranked
        all.push_back({embeddings.words[w], cosine(q, x)});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.cosine != b.cosine)
            return a.cosine > b.cosine;
        return a.word < b.word;
    });
    if (all.size() > k)
        all.resize(k);
    return all;
}

} // namespace pseudovec
