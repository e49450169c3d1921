#pragma once

#include <vector>

#include "sbd/rcnn.hpp"

namespace sbd::model {

struct EpochStats {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double holdout_loss = 0.0;
    double holdout_f1 = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    double weight_b = 1.0;
    double weight_nb = 1.0;
    int holdout_transcripts = 0;
};

// Minibatch RMSProp over shuffled phi-windows. A seeded 10% transcript
// holdout provides the per-epoch loss/F1 history; it never contributes
// gradient. Single-worker mode is bit-deterministic for a fixed seed;
// with workers > 1 each batch is sharded, per-shard gradients are summed
// in shard order by the owning thread before the update.
SbdModel train_sbd(const std::vector<const corpus::Transcript*>& transcripts,
                   const emb::EmbeddingTable& embeddings, const ModelConfig& cfg,
                   TrainHistory* history = nullptr);

SbdModel train_sbd(const corpus::Dataset& dataset, const emb::EmbeddingTable& embeddings,
                   const ModelConfig& cfg, TrainHistory* history = nullptr);

// N_total / (2 * N_class) over the masked label positions; a class that
// never occurs gets weight 1 (it cannot contribute loss anyway).
std::pair<double, double> inverse_frequency_weights(const std::vector<WindowInstance>& windows);

} // namespace sbd::model
