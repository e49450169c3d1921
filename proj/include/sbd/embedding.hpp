#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbd/subword.hpp"
#include "sbd/tensor.hpp"
#include "sbd/vocab.hpp"

namespace sbd::emb {

enum class Mode { kCbow, kSkipgram };
enum class Family { kPlain, kOrder, kSubword };

const char* mode_name(Mode m);
const char* family_name(Family f);
Mode parse_mode(const std::string& s);      // "cbow" | "sg"
Family parse_family(const std::string& s);  // "w2v" | "order" | "subword"

struct InductionConfig {
    Mode mode = Mode::kSkipgram;
    Family family = Family::kPlain;
    int dim = 100;
    int window = 5;        // context radius; order family conventionally uses 2
    int negatives = 5;
    int epochs = 5;
    double initial_lr = 0.025;
    std::uint64_t min_count = 5;
    double subsample = 1e-5; // keep-prob min(1, sqrt(t/f) + t/f); 0 disables
    double noise_power = 0.75;
    int ngram_min = 3;
    int ngram_max = 6;
    int buckets = 2000000;
    std::uint64_t seed = 1;
    int workers = 1;

    // window=2 for the order family, lr 0.05 for CBOW / 0.025 for
    // skip-gram; the remaining defaults are shared
    static InductionConfig defaults(Family family, Mode mode);

    void validate() const;
    std::string method_tag() const; // e.g. "w2v-sg", "order-cwindow", "subword-cbow"
};

// Word-level lookup table. For the subword family the rows already hold
// the composed vectors (word row + n-gram rows) and the bucket table
// travels along for out-of-vocabulary composition.
struct EmbeddingTable {
    int dim = 0;
    nn::Tensor2 vectors; // m x dim, row i belongs to vocab id i
    Vocabulary vocab;
    std::string method_tag;
    std::optional<SubwordTable> subword;

    int size() const { return vocab.size(); }
    int id_of(const std::string& word) const { return vocab.id_of(word); }

    // OOV composition: sum of the word's hashed n-gram rows. False when no
    // subword table is attached.
    bool compose_oov(const std::string& word, std::vector<double>& out) const;

    void validate() const;
};

// Text format: header "m d", then one line per word with d decimals at
// full shortest-round-trip precision. A ".subword" sidecar with header
// "B d n_min n_max seed" is written/read when a bucket table is present.
void save_embeddings(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_embeddings(const std::string& path);

// Cosine neighbors in descending order, the query itself excluded.
// Unknown words compose through the subword table when present, else
// throw ArgumentError.
std::vector<std::pair<std::string, double>> nearest_neighbors(const EmbeddingTable& table,
                                                              const std::string& word, int n);

double cosine(const double* a, const double* b, int dim);

} // namespace sbd::emb
