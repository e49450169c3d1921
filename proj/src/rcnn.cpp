#include "sbd/rcnn.hpp"

#include <algorithm>
#include <cmath>

#include "sbd/errors.hpp"

namespace sbd::model {

void ModelConfig::validate() const {
    if (phi < 1) throw ArgumentError("model: phi must be >= 1");
    if (dim < 1) throw ArgumentError("model: dim must be positive");
    if (n_f < 1) throw ArgumentError("model: n_f must be positive");
    if (h_c < 1 || h_c % 2 == 0) throw ArgumentError("model: h_c must be odd");
    if (h_m < 1 || h_m % 2 == 0) throw ArgumentError("model: h_m must be odd");
    if (n_r < 1) throw ArgumentError("model: n_r must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ArgumentError("model: dropout must be in [0, 1)");
    if (epochs < 1) throw ArgumentError("model: epochs must be >= 1");
    if (batch_size < 1) throw ArgumentError("model: batch size must be >= 1");
    if (class_weight_mode == ClassWeightMode::kManual && (!(w_b > 0.0) || !(w_nb > 0.0)))
        throw ArgumentError("model: manual class weights must be positive");
    if (train_stride < 0 || train_stride > phi)
        throw ArgumentError("model: train stride must be in [1, phi] (0 selects phi)");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ArgumentError("model: threshold must be in (0, 1)");
    if (workers < 1) throw ArgumentError("model: workers must be >= 1");
}

// ----------------------------- indexer --------------------------------

TokenIndexer::TokenIndexer(const emb::EmbeddingTable& table)
    : subword_(table.subword ? &*table.subword : nullptr), dim_(table.dim) {
    words_.reserve(table.size());
    for (int i = 0; i < table.size(); ++i) {
        words_.push_back(table.vocab.entry(i).word);
        map_[words_.back()] = 2 + i;
    }
    base_words_ = table.size();
}

TokenIndexer::TokenIndexer(std::vector<std::string> words, const emb::SubwordTable* subword,
                           int dim)
    : subword_(subword), dim_(dim), base_words_(static_cast<int>(words.size())),
      words_(std::move(words)) {
    for (int i = 0; i < static_cast<int>(words_.size()); ++i) map_[words_[i]] = 2 + i;
}

int TokenIndexer::id_of(const std::string& token) const {
    auto it = map_.find(token);
    return it == map_.end() ? -1 : it->second;
}

int TokenIndexer::lookup_or_add(const std::string& token) {
    int id = id_of(token);
    if (id >= 0) return id;
    if (!subword_) return kUnkId;
    std::vector<double> vec(dim_, 0.0);
    subword_->add_ngram_rows(token, vec.data());
    int new_id = rows();
    words_.push_back(token);
    map_[token] = new_id;
    added_vectors_.push_back(std::move(vec));
    return new_id;
}

// ---------------------------- windowize -------------------------------

std::vector<WindowInstance> windowize(const std::vector<corpus::Token>& tokens,
                                      const std::vector<corpus::Label>* labels, int phi,
                                      int stride, TokenIndexer& indexer) {
    if (phi < 1) throw ArgumentError("windowize: phi must be >= 1");
    if (stride < 1 || stride > phi)
        throw ArgumentError("windowize: stride must be in [1, phi]");
    if (labels && labels->size() != tokens.size())
        throw ArgumentError("windowize: label count mismatch");

    std::vector<WindowInstance> windows;
    if (tokens.empty()) return windows;

    const int n = static_cast<int>(tokens.size());
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = indexer.lookup_or_add(tokens[i]);

    int start = 0;
    while (true) {
        WindowInstance win;
        win.start = start;
        win.ids.assign(phi, TokenIndexer::kPadId);
        win.labels.assign(phi, class_index(corpus::Label::NB));
        win.mask.assign(phi, false);
        for (int j = 0; j < phi && start + j < n; ++j) {
            win.ids[j] = ids[start + j];
            win.mask[j] = true;
            if (labels) win.labels[j] = class_index((*labels)[start + j]);
        }
        windows.push_back(std::move(win));
        if (start + phi >= n) break;
        start += stride;
    }
    return windows;
}

// ------------------------------ model ---------------------------------

TokenIndexer SbdModel::make_indexer() const {
    return TokenIndexer(words, subword ? &*subword : nullptr, cfg.dim);
}

void SbdModel::validate() const {
    cfg.validate();
    if (embedding.rows() != 2 + static_cast<int>(words.size()) || embedding.cols() != cfg.dim)
        throw DataError("model: embedding matrix shape mismatch");
    if (conv.n_f != cfg.n_f || conv.h_c != cfg.h_c || conv.d_in != cfg.dim)
        throw DataError("model: conv layer shape mismatch");
    if (lstm_fwd.n_r != cfg.n_r || lstm_fwd.d_in != cfg.n_f || lstm_bwd.n_r != cfg.n_r ||
        lstm_bwd.d_in != cfg.n_f)
        throw DataError("model: recurrent layer shape mismatch");
    if (out.W.rows() != 2 || out.W.cols() != 2 * cfg.n_r)
        throw DataError("model: output layer shape mismatch");
}

RcnnGrads::RcnnGrads(const SbdModel& model, bool with_embedding)
    : embedding(with_embedding ? model.embedding.rows() : 0,
                with_embedding ? model.embedding.cols() : 0),
      conv(model.conv), lstm_fwd(model.lstm_fwd), lstm_bwd(model.lstm_bwd), out(model.out) {}

void RcnnGrads::zero() {
    embedding.zero();
    conv.zero();
    lstm_fwd.zero();
    lstm_bwd.zero();
    out.zero();
}

namespace {

void scale_tensor(nn::Tensor2& t, double s) {
    for (std::size_t i = 0; i < t.size(); ++i) t.at(i) *= s;
}

} // namespace

void RcnnGrads::scale(double s) {
    scale_tensor(embedding, s);
    scale_tensor(conv.filters, s);
    scale_tensor(conv.bias, s);
    for (nn::Tensor2* t : {&lstm_fwd.W_i, &lstm_fwd.W_f, &lstm_fwd.W_o, &lstm_fwd.W_g,
                           &lstm_fwd.b_i, &lstm_fwd.b_f, &lstm_fwd.b_o, &lstm_fwd.b_g,
                           &lstm_bwd.W_i, &lstm_bwd.W_f, &lstm_bwd.W_o, &lstm_bwd.W_g,
                           &lstm_bwd.b_i, &lstm_bwd.b_f, &lstm_bwd.b_o, &lstm_bwd.b_g})
        scale_tensor(*t, s);
    scale_tensor(out.W, s);
    scale_tensor(out.b, s);
}

nn::Tensor2 gather_window(const SbdModel& model, const std::vector<int>& ids,
                          const std::vector<std::vector<double>>* extra_rows) {
    nn::Tensor2 input(static_cast<int>(ids.size()), model.cfg.dim);
    for (int t = 0; t < input.rows(); ++t) {
        int id = ids[t];
        const double* src;
        if (id < model.embedding.rows()) {
            src = model.embedding.row_ptr(id);
        } else {
            int local = id - model.embedding.rows();
            if (!extra_rows || local >= static_cast<int>(extra_rows->size()))
                throw ShapeError("gather_window: id " + std::to_string(id) + " has no row");
            src = (*extra_rows)[local].data();
        }
        std::copy(src, src + model.cfg.dim, input.row_ptr(t));
    }
    return input;
}

nn::Tensor2 rcnn_forward(const SbdModel& model, const nn::Tensor2& input, bool training,
                         Rng& dropout_rng, RcnnCache& cache) {
    cache.input = input;
    nn::Tensor2 conv_out = nn::conv1d_forward(input, model.conv, cache.conv);
    cache.pooled = nn::maxpool_temporal(conv_out, model.cfg.h_m, cache.pool);
    cache.bi_out = nn::bilstm_forward(model.lstm_fwd, model.lstm_bwd, cache.pooled, cache.bilstm);
    cache.dropped =
        nn::dropout(cache.bi_out, model.cfg.dropout, training, dropout_rng, &cache.drop_mask);
    nn::Tensor2 logits = nn::dense_forward(cache.dropped, model.out);
    cache.probs = nn::softmax_rows(logits);
    return cache.probs;
}

nn::Tensor2 rcnn_backward(const SbdModel& model, const RcnnCache& cache,
                          const nn::Tensor2& d_logits, RcnnGrads& grads) {
    nn::Tensor2 d_dropped = nn::dense_backward(d_logits, model.out, cache.dropped, grads.out);
    nn::Tensor2 d_bi = nn::dropout_backward(d_dropped, cache.drop_mask);
    nn::Tensor2 d_pooled = nn::bilstm_backward(model.lstm_fwd, model.lstm_bwd, cache.bilstm, d_bi,
                                               grads.lstm_fwd, grads.lstm_bwd);
    nn::Tensor2 d_conv_out = nn::maxpool_backward(d_pooled, cache.pool);
    return nn::conv1d_backward(d_conv_out, model.conv, cache.conv, grads.conv);
}

} // namespace sbd::model
