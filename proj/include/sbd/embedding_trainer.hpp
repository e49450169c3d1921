#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "sbd/embedding.hpp"
#include "sbd/vocab.hpp"

namespace sbd::emb {

// SGD with negative sampling over all six method/strategy combinations.
//
//   plain    cbow: input = mean of context rows, shared output rows
//   plain    sg:   input = center row, shared output rows
//   order    cbow: "cwindow" - the 2w context rows concatenated into one
//                  (2w*d)-wide predictor input, output rows 2w*d wide
//   order    sg:   structured skip-gram - one output matrix per relative
//                  offset, picked by the offset of the predicted word
//   subword  cbow/sg: like plain, but a word's input representation is
//                  its own row plus the sum of its hashed n-gram rows
//
// Updates are plain SGD; the learning rate decays linearly from
// initial_lr to initial_lr*1e-4 over epochs * (in-vocab token count).
// With workers=1 the whole run is bit-deterministic for a fixed seed;
// with more workers the parameter matrices take unsynchronized
// concurrent updates and the result is nondeterministic.
class EmbeddingTrainer {
public:
    EmbeddingTrainer(Vocabulary vocab, InductionConfig cfg);

    void train(const TokenCorpus& corpus);

    // moves the trained tensors out; the trainer is spent afterwards
    EmbeddingTable take_result();

    // raw parameter views for verification
    const nn::Tensor2& input_rows() const { return input_; }
    const nn::Tensor2& bucket_rows() const { return bucket_in_; }
    const nn::Tensor2& output_rows() const { return output_; }
    const std::vector<nn::Tensor2>& offset_outputs() const { return offset_out_; }
    const Vocabulary& vocab() const { return vocab_; }
    const NoiseDistribution& noise() const { return noise_; }

    // deterministic single-example steps (the train loop is built on
    // these; tests drive them directly)
    void step_cbow(const std::vector<int>& context, int center, double lr, Rng& rng);
    void step_skipgram(int center, int context, double lr, Rng& rng);
    // window_ids has exactly 2w slots in offset order (-w..-1, +1..+w);
    // -1 marks a position outside the document
    void step_cwindow(const std::vector<int>& window_ids, int center, double lr, Rng& rng);
    // offset in [-w..-1] or [1..w]
    void step_ssg(int center, int context, int offset, double lr, Rng& rng);

    // word's composed input representation (subword family adds n-gram
    // rows); out must hold dim doubles
    void compose_input(int word_id, double* out) const;

    double keep_probability(int word_id) const;

private:
    InductionConfig cfg_;
    Vocabulary vocab_;
    NoiseDistribution noise_;

    nn::Tensor2 input_;                    // m x d word rows
    nn::Tensor2 bucket_in_;                // B x d (subword family only)
    nn::Tensor2 output_;                   // m x d, or m x (2w*d) for cwindow
    std::vector<nn::Tensor2> offset_out_;  // 2w matrices of m x d (ssg only)

    std::vector<std::vector<std::uint32_t>> ngram_cache_; // per word id
    std::atomic<std::uint64_t> progress_{0};
    std::uint64_t schedule_total_ = 0;

    void train_worker(const TokenCorpus& corpus, std::size_t doc_begin, std::size_t doc_end,
                      Rng rng);
    void scatter_input_grad(int word_id, const double* dh, double scale, double lr);
    // shared negative-sampling inner loop; accumulates dL/dh into dh
    void ns_update(const double* h, int width, int target, nn::Tensor2& out, double lr, Rng& rng,
                   double* dh);
};

// Convenience wrapper: build vocabulary, train, return the table.
// Throws DataError when the corpus has fewer than 2 tokens or the
// vocabulary filters to nothing.
EmbeddingTable train_embeddings(const TokenCorpus& corpus, const InductionConfig& cfg);

} // namespace sbd::emb
