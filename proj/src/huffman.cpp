#include "pseudovec/huffman.hpp"

#include <algorithm>
#include <queue>

#include "pseudovec/corpus.hpp"
#include "pseudovec/errors.hpp"

namespace pseudovec {

HuffmanTree HuffmanTree::build(const Vocabulary& vocab) {
    std::vector<std::uint64_t> counts(vocab.size());
    for (std::size_t w = 0; w < vocab.size(); ++w)
        counts[w] = vocab.count(static_cast<std::int32_t>(w));
    return build_from_counts(counts);
}

HuffmanTree HuffmanTree::build_from_counts(std::span<const std::uint64_t> counts) {
    const std::size_t W = counts.size();
    if (W < 2)
        throw ConfigError("hierarchical softmax needs at least 2 words, got " +
                          std::to_string(W));

    // leaves are 0..W-1, merged nodes W..2W-2; min-heap on (count, id)
    using Entry = std::pair<std::uint64_t, std::int32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    std::vector<std::uint64_t> weight(2 * W - 1, 0);
    std::vector<std::int32_t> parent(2 * W - 1, -1);
    std::vector<std::uint8_t> branch(2 * W - 1, 0);

    for (std::size_t w = 0; w < W; ++w) {
        weight[w] = counts[w];
        heap.emplace(counts[w], static_cast<std::int32_t>(w));
    }
    std::int32_t next = static_cast<std::int32_t>(W);
    while (heap.size() > 1) {
        const auto [ca, a] = heap.top();
        heap.pop();
        const auto [cb, b] = heap.top();
        heap.pop();
        parent[a] = next;
        parent[b] = next;
        branch[a] = 0;
        branch[b] = 1;
        weight[next] = ca + cb;
        heap.emplace(weight[next], next);
        ++next;
    }

    HuffmanTree tree;
    tree.node_count = static_cast<std::int32_t>(W - 1);
    tree.paths.resize(W);
    tree.codes.resize(W);
    const std::int32_t root = static_cast<std::int32_t>(2 * W - 2);
    for (std::size_t w = 0; w < W; ++w) {
        auto& path = tree.paths[w];
        auto& code = tree.codes[w];
        for (std::int32_t node = static_cast<std::int32_t>(w); node != root;
             node = parent[node]) {
            code.push_back(branch[node]);
            path.push_back(parent[node] - static_cast<std::int32_t>(W));
        }
        std::reverse(path.begin(), path.end());
        std::reverse(code.begin(), code.end());
    }
    return tree;
}

std::vector<std::pair<std::int32_t, int>> HuffmanTree::path_of(std::int32_t word_id) const {
    if (word_id < 0 || static_cast<std::size_t>(word_id) >= paths.size())
        throw ArgumentError("word id " + std::to_string(word_id) + " out of range for " +
                            std::to_string(paths.size()) + " words");
    const auto& path = paths[word_id];
    const auto& code = codes[word_id];
    std::vector<std::pair<std::int32_t, int>> out;
    out.reserve(path.size());
    for (std::size_t i = 0; i < path.size(); ++i)
        out.emplace_back(path[i], code[i] == 0 ? +1 : -1);
    return out;
}

} // namespace pseudovec
