#include "pseudovec/embeddings.hpp"

#include <fstream>
#include <sstream>

#include "pseudovec/errors.hpp"
#include "pseudovec/text_io.hpp"

namespace pseudovec {

std::int32_t EmbeddingTable::id_of(std::string_view word) const {
    auto it = index.find(std::string(word));
    return it == index.end() ? -1 : it->second;
}

const double* EmbeddingTable::vector_of(std::string_view word) const {
    const std::int32_t id = id_of(word);
    return id < 0 ? nullptr : vectors.row(id);
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open embedding file: " + path);
    std::size_t n = 0, dim = 0;
    if (!(in >> n >> dim) || n == 0 || dim == 0)
        throw FormatError("bad embedding header in " + path);

    EmbeddingTable table;
    table.words.reserve(n);
    table.vectors = Matrix(n, dim);
    std::string word;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> word))
            throw FormatError(path + ": truncated at word " + std::to_string(i));
        double* row = table.vectors.row(i);
        for (std::size_t d = 0; d < dim; ++d) {
            if (!(in >> row[d]))
                throw FormatError(path + ": truncated vector for word '" + word + "'");
        }
        table.index.emplace(word, static_cast<std::int32_t>(i));
        table.words.push_back(word);
    }
    return table;
}

void EmbeddingTable::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write embedding file: " + path);
    out << words.size() << " " << vectors.cols() << "\n";
    for (std::size_t i = 0; i < words.size(); ++i) {
        out << words[i];
        for (std::size_t d = 0; d < vectors.cols(); ++d)
            out << " " << format_double(vectors.at(i, d));
        out << "\n";
    }
    if (!out)
        throw IoError("write failed: " + path);
}

} // namespace pseudovec
