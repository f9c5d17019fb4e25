#include "pseudovec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pseudovec/errors.hpp"
#include "pseudovec/text_io.hpp"

namespace pseudovec {

Vocabulary Vocabulary::build(const std::string& corpus_path, std::uint64_t min_count) {
    std::ifstream in(corpus_path);
    if (!in)
        throw IoError("cannot open corpus file: " + corpus_path);

    std::unordered_map<std::string, std::uint64_t> raw;
    std::string token;
    while (in >> token)
        ++raw[token];

    std::vector<std::pair<std::string, std::uint64_t>> retained;
    retained.reserve(raw.size());
    for (auto& [word, count] : raw)
        if (count >= min_count)
            retained.emplace_back(word, count);
    if (retained.empty())
        throw ConfigError("empty vocabulary: no word in " + corpus_path + " reaches min_count " +
                          std::to_string(min_count));
    return from_counts(std::move(retained));
}

Vocabulary Vocabulary::from_counts(std::vector<std::pair<std::string, std::uint64_t>> wc) {
    std::sort(wc.begin(), wc.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary v;
    v.words_.reserve(wc.size());
    v.counts_.reserve(wc.size());
    for (auto& [word, count] : wc) {
        v.index_.emplace(word, static_cast<std::int32_t>(v.words_.size()));
        v.words_.push_back(std::move(word));
        v.counts_.push_back(count);
        v.total_tokens_ += count;
    }
    return v;
}

std::int32_t Vocabulary::id_of(std::string_view word) const {
    // heterogeneous lookup needs a transparent hash; the map is small and
    // queries are string_views, so build the key once
    auto it = index_.find(std::string(word));
    return it == index_.end() ? -1 : it->second;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write vocabulary file: " + path);
    out << "WORDS " << words_.size() << " TOKENS " << total_tokens_ << "\n";
    for (std::size_t i = 0; i < words_.size(); ++i)
        out << words_[i] << "\t" << counts_[i] << "\n";
    if (!out)
        throw IoError("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open vocabulary file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("empty vocabulary file: " + path);
    std::istringstream header(line);
    std::string words_tag, tokens_tag;
    std::size_t n_words = 0;
    std::uint64_t n_tokens = 0;
    header >> words_tag >> n_words >> tokens_tag >> n_tokens;
    if (words_tag != "WORDS" || tokens_tag != "TOKENS" || header.fail())
        throw FormatError("bad vocabulary header in " + path + ": " + line);

    Vocabulary v;
    v.words_.reserve(n_words);
    v.counts_.reserve(n_words);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw FormatError("missing tab in vocabulary line: " + line);
        std::string word = line.substr(0, tab);
        const std::uint64_t count =
            parse_int<std::uint64_t>(std::string_view(line).substr(tab + 1), path);
        v.index_.emplace(word, static_cast<std::int32_t>(v.words_.size()));
        v.words_.push_back(std::move(word));
        v.counts_.push_back(count);
        v.total_tokens_ += count;
    }
    if (v.words_.size() != n_words)
        throw FormatError("vocabulary file " + path + " declares " + std::to_string(n_words) +
                          " words but contains " + std::to_string(v.words_.size()));
    return v;
}

double subsample_keep_probability(std::uint64_t word_count, std::uint64_t total_tokens,
                                  double threshold) {
    if (threshold <= 0.0)
        return 1.0;
    const double f = static_cast<double>(word_count) / static_cast<double>(total_tokens);
    const double r = threshold / f;
    return std::min(1.0, std::sqrt(r) + r);
}

std::vector<std::int32_t> map_tokens(std::span<const std::string> tokens,
                                     const Vocabulary& vocab) {
    std::vector<std::int32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& tok : tokens) {
        const std::int32_t id = vocab.id_of(tok);
        if (id >= 0)
            ids.push_back(id);
    }
    return ids;
}

std::vector<std::int32_t> read_token_ids(const std::string& corpus_path, const Vocabulary& vocab) {
    std::ifstream in(corpus_path);
    if (!in)
        throw IoError("cannot open corpus file: " + corpus_path);
    std::vector<std::int32_t> ids;
    std::string token;
    while (in >> token) {
        const std::int32_t id = vocab.id_of(token);
        if (id >= 0)
            ids.push_back(id);
    }
    return ids;
}

std::uint64_t window_pair_count(std::size_t len, int window_size) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(len);
    const std::ptrdiff_t c = window_size;
    std::uint64_t total = 0;
    for (std::ptrdiff_t t = 0; t < n; ++t)
        total += static_cast<std::uint64_t>(std::min(t, c) + std::min(n - 1 - t, c));
    return total;
}

} // namespace pseudovec
