#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pseudovec {

class Vocabulary;

// Per-word paths through the Huffman inner nodes, driving the
// hierarchical softmax. Inner nodes are numbered 0..W-2; the root is
// always W-2. Merge ties break toward the smaller node id, so the tree
// is a pure function of the counts.
struct HuffmanTree {
    std::vector<std::vector<std::int32_t>> paths; // inner-node ids, root first
    std::vector<std::vector<std::uint8_t>> codes; // branch bits aligned with paths
    std::int32_t node_count = 0;                  // W - 1

    static HuffmanTree build(const Vocabulary& vocab);
    static HuffmanTree build_from_counts(std::span<const std::uint64_t> counts);

    std::size_t words() const { return paths.size(); }

    // root-to-leaf decisions as (inner node id, sign); bit 0 -> +1, bit 1 -> -1
    std::vector<std::pair<std::int32_t, int>> path_of(std::int32_t word_id) const;
};

} // namespace pseudovec
