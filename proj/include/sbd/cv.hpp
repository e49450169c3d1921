#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sbd/embedding.hpp"
#include "sbd/rcnn.hpp"
#include "sbd/report.hpp"

namespace sbd::eval {

struct GridSpec {
    std::vector<GridCell> cells;
    int k = 5;
    std::uint64_t seed = 7;
};

// "w2v:sg:50,300;subword:cbow:100" -> one cell per (group, dim)
std::vector<GridCell> parse_grid(const std::string& spec);

// all six method/strategy combinations at the given dimensions
std::vector<GridCell> full_grid(const std::vector<int>& dims = {50, 100, 300, 600});

// Where a grid cell's embeddings come from: either existing .vec files
// addressed by a path pattern ({method}, {strategy}, {dim} placeholders)
// or training on a raw corpus, cached under the cache directory.
class EmbeddingSource {
public:
    static EmbeddingSource from_pattern(std::string pattern);
    static EmbeddingSource from_corpus(emb::TokenCorpus corpus, emb::InductionConfig base);

    // nullopt (with a reason) when the cell cannot be served
    std::optional<emb::EmbeddingTable> get(const GridCell& cell, const std::string& cache_dir,
                                           std::string* why) const;

private:
    EmbeddingSource() = default;
    std::string pattern_;
    std::optional<emb::TokenCorpus> corpus_;
    emb::InductionConfig base_;
    std::uint64_t corpus_hash_ = 0;
};

struct CvOptions {
    std::string cache_dir; // empty disables caching
    int workers = 1;       // parallel grid-cell jobs
};

// Trains on k-1 folds, evaluates on the held-out fold, per cell. Fold
// assignments come from (dataset, k, seed) once and are shared across
// cells. Completed cell-folds are cached by a content hash of their
// inputs under <cache>/<method>-<strategy>-d<dim>-fold<i>/. Missing
// embeddings skip the cell; the run continues.
CvResults run_cv(const corpus::Dataset& dataset, const GridSpec& grid,
                 const EmbeddingSource& source, const model::ModelConfig& model_cfg,
                 const CvOptions& options = {});

} // namespace sbd::eval
