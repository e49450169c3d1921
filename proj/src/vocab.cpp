#include "sbd/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sbd/errors.hpp"

namespace sbd::emb {

std::size_t TokenCorpus::total_tokens() const {
    std::size_t n = 0;
    for (const auto& doc : documents) n += doc.size();
    return n;
}

TokenCorpus load_token_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    TokenCorpus corpus;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<std::string> doc;
        std::string tok;
        while (ls >> tok) doc.push_back(std::move(tok));
        if (!doc.empty()) corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

Vocabulary Vocabulary::build(const TokenCorpus& corpus, std::uint64_t min_count) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& doc : corpus.documents)
        for (const std::string& tok : doc) ++counts[tok];
    std::vector<VocabEntry> entries;
    entries.reserve(counts.size());
    for (auto& [word, count] : counts)
        if (count >= min_count) entries.push_back({word, count});
    if (entries.empty())
        throw DataError("vocabulary is empty after min_count=" + std::to_string(min_count) +
                        " filtering");
    std::sort(entries.begin(), entries.end(), [](const VocabEntry& a, const VocabEntry& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.word < b.word;
    });
    Vocabulary v;
    v.entries_ = std::move(entries);
    v.rebuild_index();
    return v;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& tokens, std::uint64_t min_count) {
    TokenCorpus c;
    c.documents.push_back(tokens);
    return build(c, min_count);
}

Vocabulary Vocabulary::from_ordered_words(std::vector<std::string> words) {
    Vocabulary v;
    v.entries_.reserve(words.size());
    for (auto& w : words) v.entries_.push_back({std::move(w), 0});
    v.rebuild_index();
    return v;
}

void Vocabulary::rebuild_index() {
    index_.clear();
    total_count_ = 0;
    for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
        index_[entries_[i].word] = i;
        total_count_ += entries_[i].count;
    }
}

int Vocabulary::id_of(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? -1 : it->second;
}

NoiseDistribution::NoiseDistribution(const Vocabulary& vocab, double power) {
    if (power < 0.0) throw ArgumentError("unigram noise: power must be >= 0");
    if (vocab.size() == 0) throw ArgumentError("unigram noise: empty vocabulary");
    probs_.resize(vocab.size());
    double total = 0.0;
    for (int i = 0; i < vocab.size(); ++i) {
        probs_[i] = std::pow(static_cast<double>(vocab.entry(i).count), power);
        total += probs_[i];
    }
    cdf_.resize(probs_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        probs_[i] /= total;
        acc += probs_[i];
        cdf_[i] = acc;
    }
    cdf_.back() = 1.0;
}

int NoiseDistribution::sample(Rng& rng) const {
    double u = rng.next_double();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<int>(it - cdf_.begin());
}

} // namespace sbd::emb
