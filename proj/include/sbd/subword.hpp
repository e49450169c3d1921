#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sbd/tensor.hpp"

namespace sbd::emb {

// FNV-1a over the UTF-8 bytes; the seed perturbs the offset basis.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);

// Character n-grams of the word wrapped in '<' and '>', n in
// [n_min, n_max], over codepoints (not bytes). "foi" with [3,3] gives
// {"<fo", "foi", "oi>"}.
std::vector<std::string> char_ngrams(const std::string& word, int n_min, int n_max);

// Hashed bucket vectors that compose word representations by summation.
struct SubwordTable {
    nn::Tensor2 buckets; // B x d
    int n_min = 3;
    int n_max = 6;
    std::uint64_t hash_seed = 0;

    int bucket_count() const { return buckets.rows(); }
    int dim() const { return buckets.cols(); }

    std::uint32_t bucket_of(const std::string& ngram) const;
    std::vector<std::uint32_t> bucket_ids(const std::string& word) const;

    // out += sum of the word's n-gram bucket rows; returns how many rows
    // contributed
    int add_ngram_rows(const std::string& word, double* out) const;
};

} // namespace sbd::emb
