#include "sbd/subword.hpp"

namespace sbd::emb {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = 14695981039346656037ULL ^ seed;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string> char_ngrams(const std::string& word, int n_min, int n_max) {
    std::string wrapped = "<" + word + ">";
    // codepoint start offsets (UTF-8 continuation bytes have 10xxxxxx)
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < wrapped.size(); ++i)
        if ((static_cast<unsigned char>(wrapped[i]) & 0xC0) != 0x80) starts.push_back(i);
    starts.push_back(wrapped.size());

    std::vector<std::string> grams;
    int n_chars = static_cast<int>(starts.size()) - 1;
    for (int i = 0; i < n_chars; ++i) {
        for (int n = n_min; n <= n_max && i + n <= n_chars; ++n) {
            grams.push_back(wrapped.substr(starts[i], starts[i + n] - starts[i]));
        }
    }
    return grams;
}

std::uint32_t SubwordTable::bucket_of(const std::string& ngram) const {
    return static_cast<std::uint32_t>(fnv1a64(ngram, hash_seed) %
                                      static_cast<std::uint64_t>(buckets.rows()));
}

std::vector<std::uint32_t> SubwordTable::bucket_ids(const std::string& word) const {
    std::vector<std::uint32_t> ids;
    for (const std::string& g : char_ngrams(word, n_min, n_max)) ids.push_back(bucket_of(g));
    return ids;
}

int SubwordTable::add_ngram_rows(const std::string& word, double* out) const {
    int n = 0;
    for (std::uint32_t id : bucket_ids(word)) {
        const double* row = buckets.row_ptr(static_cast<int>(id));
        for (int k = 0; k < buckets.cols(); ++k) out[k] += row[k];
        ++n;
    }
    return n;
}

} // namespace sbd::emb
