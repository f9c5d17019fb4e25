#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pseudovec/matrix.hpp"

namespace pseudovec {

// Word vectors in word2vec text format: a "<count> <dim>" header line,
// then one "word v_1 ... v_dim" line per word.
struct EmbeddingTable {
    std::vector<std::string> words;
    std::unordered_map<std::string, std::int32_t> index;
    Matrix vectors;

    std::int32_t id_of(std::string_view word) const;
    const double* vector_of(std::string_view word) const; // nullptr when absent

    static EmbeddingTable load(const std::string& path);
    void save(const std::string& path) const;
};

} // namespace pseudovec
