#include "sbd/sbd_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "sbd/errors.hpp"
#include "sbd/loss.hpp"
#include "sbd/predictor.hpp"

namespace sbd::model {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    Rng r(seed ^ (salt * 0x9e3779b97f4a7c15ULL));
    return r.next_u64();
}

struct BatchAccum {
    double nll = 0.0;
    double weight = 0.0;
};

// forward + backward for one window; grads accumulate unnormalized
BatchAccum window_step(const SbdModel& model, const WindowInstance& win,
                       const std::vector<double>& class_weights, std::uint64_t dropout_seed,
                       RcnnGrads& grads, bool fine_tune) {
    Rng drop_rng(dropout_seed);
    nn::Tensor2 input = gather_window(model, win.ids, nullptr);
    RcnnCache cache;
    nn::Tensor2 probs = rcnn_forward(model, input, true, drop_rng, cache);
    nn::WceTerms terms = nn::weighted_ce_terms(probs, win.labels, class_weights, &win.mask);
    nn::Tensor2 d_input = rcnn_backward(model, cache, terms.d_logits, grads);
    if (fine_tune) {
        // padded positions still feed real positions' conv windows, so
        // their rows collect gradient too; the pad row is zeroed before
        // the update
        for (int t = 0; t < d_input.rows(); ++t) {
            double* dst = grads.embedding.row_ptr(win.ids[t]);
            const double* src = d_input.row_ptr(t);
            for (int k = 0; k < d_input.cols(); ++k) dst[k] += src[k];
        }
    }
    return {terms.nll_sum, terms.weight_sum};
}

double holdout_weighted_loss(const SbdModel& model, const std::vector<WindowInstance>& windows,
                             const std::vector<double>& class_weights) {
    double nll = 0.0, wsum = 0.0;
    Rng rng(0);
    for (const WindowInstance& win : windows) {
        nn::Tensor2 input = gather_window(model, win.ids, nullptr);
        RcnnCache cache;
        nn::Tensor2 probs = rcnn_forward(model, input, false, rng, cache);
        nn::WceTerms terms = nn::weighted_ce_terms(probs, win.labels, class_weights, &win.mask);
        nll += terms.nll_sum;
        wsum += terms.weight_sum;
    }
    return wsum > 0.0 ? nll / wsum : 0.0;
}

double boundary_f1(const SbdModel& model,
                   const std::vector<const corpus::Transcript*>& transcripts) {
    long long tp = 0, fp = 0, fn = 0;
    for (const corpus::Transcript* t : transcripts) {
        std::vector<double> p = predict_boundaries(model, t->tokens);
        for (std::size_t i = 0; i < p.size(); ++i) {
            bool pred_b = p[i] >= model.cfg.threshold;
            bool gold_b = t->labels[i] == corpus::Label::B;
            if (pred_b && gold_b) ++tp;
            else if (pred_b) ++fp;
            else if (gold_b) ++fn;
        }
    }
    if (tp == 0) return 0.0;
    double prec = static_cast<double>(tp) / (tp + fp);
    double rec = static_cast<double>(tp) / (tp + fn);
    return 2.0 * prec * rec / (prec + rec);
}

void apply_updates(SbdModel& model, RcnnGrads& grads, nn::RmsProp& opt, bool fine_tune) {
    if (fine_tune) {
        // the padding row stays all-zero
        double* pad = grads.embedding.row_ptr(TokenIndexer::kPadId);
        std::fill(pad, pad + grads.embedding.cols(), 0.0);
        opt.update("embedding", model.embedding, grads.embedding);
    }
    opt.update("conv.filters", model.conv.filters, grads.conv.filters);
    opt.update("conv.bias", model.conv.bias, grads.conv.bias);
    auto lstm = [&](const char* prefix, nn::LstmCell& cell, nn::LstmGrads& g) {
        std::string p(prefix);
        opt.update(p + ".W_i", cell.W_i, g.W_i);
        opt.update(p + ".W_f", cell.W_f, g.W_f);
        opt.update(p + ".W_o", cell.W_o, g.W_o);
        opt.update(p + ".W_g", cell.W_g, g.W_g);
        opt.update(p + ".b_i", cell.b_i, g.b_i);
        opt.update(p + ".b_f", cell.b_f, g.b_f);
        opt.update(p + ".b_o", cell.b_o, g.b_o);
        opt.update(p + ".b_g", cell.b_g, g.b_g);
    };
    lstm("lstm_fwd", model.lstm_fwd, grads.lstm_fwd);
    lstm("lstm_bwd", model.lstm_bwd, grads.lstm_bwd);
    opt.update("out.W", model.out.W, grads.out.W);
    opt.update("out.b", model.out.b, grads.out.b);
}

} // namespace

std::pair<double, double> inverse_frequency_weights(const std::vector<WindowInstance>& windows) {
    long long n_b = 0, n_nb = 0;
    for (const WindowInstance& w : windows)
        for (std::size_t i = 0; i < w.labels.size(); ++i) {
            if (!w.mask[i]) continue;
            if (w.labels[i] == class_index(corpus::Label::B)) ++n_b;
            else ++n_nb;
        }
    double total = static_cast<double>(n_b + n_nb);
    double w_b = n_b > 0 ? total / (2.0 * n_b) : 1.0;
    double w_nb = n_nb > 0 ? total / (2.0 * n_nb) : 1.0;
    return {w_b, w_nb};
}

SbdModel train_sbd(const std::vector<const corpus::Transcript*>& transcripts,
                   const emb::EmbeddingTable& embeddings, const ModelConfig& cfg,
                   TrainHistory* history) {
    cfg.validate();
    if (embeddings.dim != cfg.dim)
        throw ArgumentError("dimension mismatch: embeddings have d=" +
                            std::to_string(embeddings.dim) + ", model configured with d=" +
                            std::to_string(cfg.dim));
    if (transcripts.empty()) throw DataError("training set has no transcripts");
    for (const corpus::Transcript* t : transcripts) t->validate();

    // seeded 10% holdout for the epoch history
    std::vector<std::size_t> order(transcripts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng holdout_rng(mix_seed(cfg.seed, 0x401dULL));
    shuffle(order, holdout_rng);
    std::size_t holdout_count =
        transcripts.size() >= 2 ? std::max<std::size_t>(1, transcripts.size() / 10) : 0;

    std::vector<const corpus::Transcript*> train_set, holdout_set;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < holdout_count ? holdout_set : train_set).push_back(transcripts[order[i]]);

    TokenIndexer indexer(embeddings);
    const int stride = cfg.train_stride == 0 ? cfg.phi : cfg.train_stride;

    std::vector<WindowInstance> train_windows;
    for (const corpus::Transcript* t : train_set) {
        auto wins = windowize(t->tokens, &t->labels, cfg.phi, stride, indexer);
        train_windows.insert(train_windows.end(), wins.begin(), wins.end());
    }
    if (train_windows.empty()) throw DataError("training transcripts contain no tokens");

    std::vector<WindowInstance> holdout_windows;
    for (const corpus::Transcript* t : holdout_set) {
        auto wins = windowize(t->tokens, &t->labels, cfg.phi, cfg.phi, indexer);
        holdout_windows.insert(holdout_windows.end(), wins.begin(), wins.end());
    }
    // holdout prediction also touches the indexer; materialize those rows
    // before the matrix is frozen
    for (const corpus::Transcript* t : holdout_set)
        for (const corpus::Token& tok : t->tokens) indexer.lookup_or_add(tok);

    // assemble the model
    SbdModel model;
    model.cfg = cfg;
    model.words = indexer.words();
    model.subword = embeddings.subword;
    model.embedding_tag = embeddings.method_tag;
    model.embedding = nn::Tensor2(indexer.rows(), cfg.dim);
    {
        // unknown row: mean of the pretrained vectors
        double* unk = model.embedding.row_ptr(TokenIndexer::kUnkId);
        for (int i = 0; i < embeddings.size(); ++i) {
            const double* src = embeddings.vectors.row_ptr(i);
            std::copy(src, src + cfg.dim, model.embedding.row_ptr(2 + i));
            for (int k = 0; k < cfg.dim; ++k) unk[k] += src[k];
        }
        for (int k = 0; k < cfg.dim; ++k) unk[k] /= embeddings.size();
        const auto& extras = indexer.added_vectors();
        for (std::size_t j = 0; j < extras.size(); ++j)
            std::copy(extras[j].begin(), extras[j].end(),
                      model.embedding.row_ptr(2 + indexer.base_word_count() + static_cast<int>(j)));
    }
    Rng init_rng(mix_seed(cfg.seed, 0x1217ULL));
    model.conv = nn::ConvLayer(cfg.n_f, cfg.h_c, cfg.dim);
    model.conv.init(init_rng);
    model.lstm_fwd = nn::LstmCell(cfg.n_r, cfg.n_f);
    model.lstm_fwd.init(init_rng);
    model.lstm_bwd = nn::LstmCell(cfg.n_r, cfg.n_f);
    model.lstm_bwd.init(init_rng);
    model.out = nn::DenseLayer(2, 2 * cfg.n_r);
    model.out.init(init_rng);

    // class weights, on the windows the gradient actually sees
    double w_b = cfg.w_b, w_nb = cfg.w_nb;
    if (cfg.class_weight_mode == ClassWeightMode::kInverseFrequency)
        std::tie(w_b, w_nb) = inverse_frequency_weights(train_windows);
    std::vector<double> class_weights = {w_b, w_nb}; // index 0 = B
    if (history) {
        history->weight_b = w_b;
        history->weight_nb = w_nb;
        history->holdout_transcripts = static_cast<int>(holdout_set.size());
    }

    nn::RmsProp opt(cfg.optim);
    Rng shuffle_rng(mix_seed(cfg.seed, 0x54afULL));
    std::vector<std::size_t> widx(train_windows.size());
    for (std::size_t i = 0; i < widx.size(); ++i) widx[i] = i;

    RcnnGrads grads(model, cfg.fine_tune);
    std::uint64_t window_counter = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle(widx, shuffle_rng);
        double epoch_nll = 0.0, epoch_w = 0.0;

        for (std::size_t b = 0; b < widx.size(); b += cfg.batch_size) {
            std::size_t b_end = std::min(widx.size(), b + cfg.batch_size);
            grads.zero();
            BatchAccum batch;

            if (cfg.workers == 1 || b_end - b == 1) {
                for (std::size_t i = b; i < b_end; ++i) {
                    BatchAccum a =
                        window_step(model, train_windows[widx[i]], class_weights,
                                    mix_seed(cfg.seed, 0xd40bULL + window_counter + (i - b)), grads,
                                    cfg.fine_tune);
                    batch.nll += a.nll;
                    batch.weight += a.weight;
                }
            } else {
                // shard the batch; grads summed in shard order by this thread
                std::size_t n_shards = std::min<std::size_t>(cfg.workers, b_end - b);
                std::vector<RcnnGrads> shard_grads;
                std::vector<BatchAccum> shard_acc(n_shards);
                shard_grads.reserve(n_shards);
                for (std::size_t s = 0; s < n_shards; ++s)
                    shard_grads.emplace_back(model, cfg.fine_tune);
                std::vector<std::thread> threads;
                for (std::size_t s = 0; s < n_shards; ++s) {
                    threads.emplace_back([&, s] {
                        for (std::size_t i = b + s; i < b_end; i += n_shards) {
                            BatchAccum a = window_step(
                                model, train_windows[widx[i]], class_weights,
                                mix_seed(cfg.seed, 0xd40bULL + window_counter + (i - b)),
                                shard_grads[s], cfg.fine_tune);
                            shard_acc[s].nll += a.nll;
                            shard_acc[s].weight += a.weight;
                        }
                    });
                }
                for (auto& t : threads) t.join();
                for (std::size_t s = 0; s < n_shards; ++s) {
                    batch.nll += shard_acc[s].nll;
                    batch.weight += shard_acc[s].weight;
                    if (cfg.fine_tune) grads.embedding.add_scaled(shard_grads[s].embedding, 1.0);
                    grads.conv.filters.add_scaled(shard_grads[s].conv.filters, 1.0);
                    grads.conv.bias.add_scaled(shard_grads[s].conv.bias, 1.0);
                    for (auto [dst, src] :
                         {std::pair{&grads.lstm_fwd, &shard_grads[s].lstm_fwd},
                          std::pair{&grads.lstm_bwd, &shard_grads[s].lstm_bwd}}) {
                        dst->W_i.add_scaled(src->W_i, 1.0);
                        dst->W_f.add_scaled(src->W_f, 1.0);
                        dst->W_o.add_scaled(src->W_o, 1.0);
                        dst->W_g.add_scaled(src->W_g, 1.0);
                        dst->b_i.add_scaled(src->b_i, 1.0);
                        dst->b_f.add_scaled(src->b_f, 1.0);
                        dst->b_o.add_scaled(src->b_o, 1.0);
                        dst->b_g.add_scaled(src->b_g, 1.0);
                    }
                    grads.out.W.add_scaled(shard_grads[s].out.W, 1.0);
                    grads.out.b.add_scaled(shard_grads[s].out.b, 1.0);
                }
            }
            window_counter += b_end - b;

            if (batch.weight > 0.0) {
                grads.scale(1.0 / batch.weight);
                apply_updates(model, grads, opt, cfg.fine_tune);
            }
            epoch_nll += batch.nll;
            epoch_w += batch.weight;
        }

        double train_loss = epoch_w > 0.0 ? epoch_nll / epoch_w : 0.0;
        if (!std::isfinite(train_loss))
            throw NumericError("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch));

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = train_loss;
        if (!holdout_set.empty()) {
            stats.holdout_loss = holdout_weighted_loss(model, holdout_windows, class_weights);
            stats.holdout_f1 = boundary_f1(model, holdout_set);
        }
        if (history) history->epochs.push_back(stats);
    }
    return model;
}

SbdModel train_sbd(const corpus::Dataset& dataset, const emb::EmbeddingTable& embeddings,
                   const ModelConfig& cfg, TrainHistory* history) {
    std::vector<const corpus::Transcript*> ptrs;
    ptrs.reserve(dataset.transcripts.size());
    for (const corpus::Transcript& t : dataset.transcripts) ptrs.push_back(&t);
    return train_sbd(ptrs, embeddings, cfg, history);
}

} // namespace sbd::model
