#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sbd/rng.hpp"

namespace sbd::emb {

// Tokenized training text; each document is one newline-delimited line of
// the corpus file. Context windows never cross document boundaries.
struct TokenCorpus {
    std::vector<std::vector<std::string>> documents;

    std::size_t total_tokens() const;
};

// Whitespace-tokenized UTF-8, one document per line. Blank lines are
// skipped. The tokens are expected to be normalized already; callers that
// start from raw text run corpus::normalize first (it is idempotent).
TokenCorpus load_token_corpus(const std::string& path);

struct VocabEntry {
    std::string word;
    std::uint64_t count = 0;
};

// Dense ids 0..m-1 ordered by descending count, ties lexicographic.
class Vocabulary {
public:
    Vocabulary() = default;

    static Vocabulary build(const TokenCorpus& corpus, std::uint64_t min_count);
    static Vocabulary build(const std::vector<std::string>& tokens, std::uint64_t min_count);
    // keeps the given order; used when reading tables back from disk
    static Vocabulary from_ordered_words(std::vector<std::string> words);

    int size() const { return static_cast<int>(entries_.size()); }
    int id_of(const std::string& word) const; // -1 when absent
    const VocabEntry& entry(int id) const { return entries_[id]; }
    const std::vector<VocabEntry>& entries() const { return entries_; }
    std::uint64_t total_count() const { return total_count_; }

private:
    std::vector<VocabEntry> entries_;
    std::unordered_map<std::string, int> index_;
    std::uint64_t total_count_ = 0;

    void rebuild_index();
};

// Negative-sampling noise: P(w) proportional to count(w)^power.
class NoiseDistribution {
public:
    NoiseDistribution(const Vocabulary& vocab, double power);

    double prob(int id) const { return probs_[id]; }
    const std::vector<double>& probs() const { return probs_; }
    int sample(Rng& rng) const; // inverse-CDF by binary search

private:
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

} // namespace sbd::emb
