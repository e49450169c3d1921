#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sbd/corpus.hpp"
#include "sbd/embedding.hpp"
#include "sbd/layers.hpp"
#include "sbd/optimizer.hpp"

namespace sbd::model {

// Class indices used by the output head: column 0 = B, column 1 = NB.
inline int class_index(corpus::Label l) { return l == corpus::Label::B ? 0 : 1; }

enum class ClassWeightMode { kInverseFrequency, kManual };

struct ModelConfig {
    int phi = 50;  // window length
    int dim = 50;  // embedding width, must match the table
    int n_f = 100; // conv filters
    int h_c = 7;   // conv window (odd)
    int h_m = 3;   // pool window (odd)
    int n_r = 100; // LSTM cells per direction
    double dropout = 0.5;
    int epochs = 30;
    int batch_size = 32;
    ClassWeightMode class_weight_mode = ClassWeightMode::kInverseFrequency;
    double w_b = 1.0; // manual mode weights
    double w_nb = 1.0;
    bool fine_tune = true; // adjust the embedding matrix during training
    int train_stride = 0;  // 0 means phi (disjoint windows)
    double threshold = 0.5;
    std::uint64_t seed = 1;
    int workers = 1;
    nn::RmsPropConfig optim;

    void validate() const;
};

// Maps token surfaces to embedding rows. Row 0 is the padding row
// (all-zero, kept frozen), row 1 the unknown-word row; pretrained
// vocabulary words follow, then rows materialized for subword-composed
// OOVs seen while building training windows.
class TokenIndexer {
public:
    static constexpr int kPadId = 0;
    static constexpr int kUnkId = 1;

    explicit TokenIndexer(const emb::EmbeddingTable& table);
    // reconstruction from a checkpoint's word list
    TokenIndexer(std::vector<std::string> words, const emb::SubwordTable* subword, int dim);

    int rows() const { return 2 + static_cast<int>(words_.size()); }
    int word_count() const { return static_cast<int>(words_.size()); }
    const std::vector<std::string>& words() const { return words_; }
    bool has_subword() const { return subword_ != nullptr; }
    const emb::SubwordTable* subword() const { return subword_; }
    int dim() const { return dim_; }

    // -1 when the surface has no row
    int id_of(const std::string& token) const;
    // training-window path: unknown surfaces get a fresh composed row in
    // the subword case, otherwise the unknown id
    int lookup_or_add(const std::string& token);

    // composed vectors for rows added beyond the pretrained vocabulary
    const std::vector<std::vector<double>>& added_vectors() const { return added_vectors_; }
    int base_word_count() const { return base_words_; }

private:
    const emb::SubwordTable* subword_ = nullptr;
    int dim_ = 0;
    int base_words_ = 0;
    std::vector<std::string> words_;
    std::unordered_map<std::string, int> map_; // surface -> row id
    std::vector<std::vector<double>> added_vectors_;
};

// A phi-length training/evaluation window; padded tail positions carry
// mask=false and stay out of the loss and the metrics.
struct WindowInstance {
    std::vector<int> ids;    // embedding rows, phi entries
    std::vector<int> labels; // class indices, phi entries
    std::vector<bool> mask;
    int start = 0; // offset of the window inside its transcript
};

// Overlapping cover of the token stream: starts at 0, advances by
// stride while tokens remain, right-pads the final window. labels may be
// null (prediction windows).
std::vector<WindowInstance> windowize(const std::vector<corpus::Token>& tokens,
                                      const std::vector<corpus::Label>* labels, int phi,
                                      int stride, TokenIndexer& indexer);

// ---------------------------------------------------------------------
// The assembled network: embedding lookup -> 1D conv (ReLU) -> temporal
// max-pool -> BiLSTM -> dropout -> 2-way softmax per position.
// ---------------------------------------------------------------------

struct SbdModel {
    ModelConfig cfg;
    std::vector<std::string> words; // row 2+i of `embedding` belongs to words[i]
    std::optional<emb::SubwordTable> subword;
    nn::Tensor2 embedding; // (2 + words) x dim
    nn::ConvLayer conv;
    nn::LstmCell lstm_fwd;
    nn::LstmCell lstm_bwd;
    nn::DenseLayer out;
    std::string embedding_tag; // method tag of the source table, metadata

    TokenIndexer make_indexer() const;
    void validate() const;
};

struct RcnnGrads {
    nn::Tensor2 embedding; // allocated only when fine-tuning
    nn::ConvGrads conv;
    nn::LstmGrads lstm_fwd;
    nn::LstmGrads lstm_bwd;
    nn::DenseGrads out;

    explicit RcnnGrads(const SbdModel& model, bool with_embedding);
    void zero();
    void scale(double s);
};

struct RcnnCache {
    nn::Tensor2 input; // phi x dim gathered embeddings
    nn::ConvCache conv;
    nn::MaxPoolCache pool;
    nn::BiLstmCache bilstm;
    nn::Tensor2 pooled;    // into the BiLSTM
    nn::Tensor2 bi_out;    // into dropout
    nn::Tensor2 drop_mask;
    nn::Tensor2 dropped;   // into the dense head
    nn::Tensor2 probs;
};

// Forward over one gathered window; training toggles dropout. Returns
// per-position class probabilities (phi x 2).
nn::Tensor2 rcnn_forward(const SbdModel& model, const nn::Tensor2& input, bool training,
                         Rng& dropout_rng, RcnnCache& cache);

// Accumulates parameter gradients from d_logits; returns d_input so the
// caller can scatter into embedding rows when fine-tuning.
nn::Tensor2 rcnn_backward(const SbdModel& model, const RcnnCache& cache,
                          const nn::Tensor2& d_logits, RcnnGrads& grads);

// Materializes the phi x dim input for a window. extra_rows (may be
// null) serves ids at or beyond the embedding row count, used for
// prediction-time composed OOVs.
nn::Tensor2 gather_window(const SbdModel& model, const std::vector<int>& ids,
                          const std::vector<std::vector<double>>* extra_rows);

} // namespace sbd::model
