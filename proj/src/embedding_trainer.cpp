#include "sbd/embedding_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "sbd/errors.hpp"

namespace sbd::emb {

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}

EmbeddingTrainer::EmbeddingTrainer(Vocabulary vocab, InductionConfig cfg)
    : cfg_(cfg), vocab_(std::move(vocab)), noise_(vocab_, cfg.noise_power) {
    cfg_.validate();
    const int m = vocab_.size();
    const int d = cfg_.dim;

    Rng rng(cfg_.seed);
    input_ = nn::Tensor2(m, d);
    input_.randomize_uniform(-0.5 / d, 0.5 / d, rng);

    if (cfg_.family == Family::kSubword) {
        bucket_in_ = nn::Tensor2(cfg_.buckets, d);
        bucket_in_.randomize_uniform(-0.5 / d, 0.5 / d, rng);
        SubwordTable probe;
        probe.buckets = nn::Tensor2(cfg_.buckets, 0); // ids only, no data reads
        probe.n_min = cfg_.ngram_min;
        probe.n_max = cfg_.ngram_max;
        probe.hash_seed = cfg_.seed;
        ngram_cache_.resize(m);
        for (int i = 0; i < m; ++i) ngram_cache_[i] = probe.bucket_ids(vocab_.entry(i).word);
    }

    if (cfg_.family == Family::kOrder && cfg_.mode == Mode::kSkipgram) {
        offset_out_.assign(2 * cfg_.window, nn::Tensor2(m, d));
    } else if (cfg_.family == Family::kOrder && cfg_.mode == Mode::kCbow) {
        output_ = nn::Tensor2(m, 2 * cfg_.window * d);
    } else {
        output_ = nn::Tensor2(m, d);
    }
}

double EmbeddingTrainer::keep_probability(int word_id) const {
    if (cfg_.subsample <= 0.0) return 1.0; // disabled
    double f = static_cast<double>(vocab_.entry(word_id).count) /
               static_cast<double>(vocab_.total_count());
    double p = std::sqrt(cfg_.subsample / f) + cfg_.subsample / f;
    return p < 1.0 ? p : 1.0;
}

void EmbeddingTrainer::compose_input(int word_id, double* out) const {
    const double* row = input_.row_ptr(word_id);
    const int d = cfg_.dim;
    for (int k = 0; k < d; ++k) out[k] = row[k];
    if (cfg_.family == Family::kSubword) {
        for (std::uint32_t b : ngram_cache_[word_id]) {
            const double* br = bucket_in_.row_ptr(static_cast<int>(b));
            for (int k = 0; k < d; ++k) out[k] += br[k];
        }
    }
}

void EmbeddingTrainer::scatter_input_grad(int word_id, const double* dh, double scale, double lr) {
    const int d = cfg_.dim;
    double* row = input_.row_ptr(word_id);
    const double step = lr * scale;
    for (int k = 0; k < d; ++k) row[k] -= step * dh[k];
    if (cfg_.family == Family::kSubword) {
        for (std::uint32_t b : ngram_cache_[word_id]) {
            double* br = bucket_in_.row_ptr(static_cast<int>(b));
            for (int k = 0; k < d; ++k) br[k] -= step * dh[k];
        }
    }
}

void EmbeddingTrainer::ns_update(const double* h, int width, int target, nn::Tensor2& out,
                                 double lr, Rng& rng, double* dh) {
    for (int s = 0; s <= cfg_.negatives; ++s) {
        int id;
        double label;
        if (s == 0) {
            id = target;
            label = 1.0;
        } else {
            id = noise_.sample(rng);
            if (id == target) continue; // drawing the positive as noise teaches nothing
            label = 0.0;
        }
        double* o = out.row_ptr(id);
        double score = 0.0;
        for (int k = 0; k < width; ++k) score += h[k] * o[k];
        double g = sigmoid(score) - label; // dL/dscore for logistic loss
        for (int k = 0; k < width; ++k) {
            dh[k] += g * o[k];
            o[k] -= lr * g * h[k];
        }
    }
}

void EmbeddingTrainer::step_cbow(const std::vector<int>& context, int center, double lr,
                                 Rng& rng) {
    if (context.empty()) return;
    const int d = cfg_.dim;
    std::vector<double> h(d, 0.0), tmp(d), dh(d, 0.0);
    for (int c : context) {
        compose_input(c, tmp.data());
        for (int k = 0; k < d; ++k) h[k] += tmp[k];
    }
    const double inv = 1.0 / static_cast<double>(context.size());
    for (int k = 0; k < d; ++k) h[k] *= inv;

    ns_update(h.data(), d, center, output_, lr, rng, dh.data());
    for (int c : context) scatter_input_grad(c, dh.data(), inv, lr);
}

void EmbeddingTrainer::step_skipgram(int center, int context, double lr, Rng& rng) {
    const int d = cfg_.dim;
    std::vector<double> h(d), dh(d, 0.0);
    compose_input(center, h.data());
    ns_update(h.data(), d, context, output_, lr, rng, dh.data());
    scatter_input_grad(center, dh.data(), 1.0, lr);
}

void EmbeddingTrainer::step_cwindow(const std::vector<int>& window_ids, int center, double lr,
                                    Rng& rng) {
    const int d = cfg_.dim;
    const int slots = 2 * cfg_.window;
    if (static_cast<int>(window_ids.size()) != slots)
        throw ArgumentError("step_cwindow: expected " + std::to_string(slots) + " window slots");
    const int width = slots * d;
    std::vector<double> h(width, 0.0), dh(width, 0.0);
    for (int s = 0; s < slots; ++s) {
        int id = window_ids[s];
        if (id < 0) continue; // outside the document: zero block
        const double* row = input_.row_ptr(id);
        std::copy(row, row + d, h.begin() + static_cast<std::size_t>(s) * d);
    }

    ns_update(h.data(), width, center, output_, lr, rng, dh.data());
    for (int s = 0; s < slots; ++s) {
        int id = window_ids[s];
        if (id < 0) continue;
        double* row = input_.row_ptr(id);
        const double* dslot = dh.data() + static_cast<std::size_t>(s) * d;
        for (int k = 0; k < d; ++k) row[k] -= lr * dslot[k];
    }
}

void EmbeddingTrainer::step_ssg(int center, int context, int offset, double lr, Rng& rng) {
    const int w = cfg_.window;
    if (offset == 0 || offset < -w || offset > w)
        throw ArgumentError("step_ssg: offset " + std::to_string(offset) + " out of range");
    // slots: -w..-1 map to 0..w-1, +1..+w map to w..2w-1
    int slot = offset < 0 ? offset + w : w + offset - 1;
    const int d = cfg_.dim;
    std::vector<double> h(d), dh(d, 0.0);
    compose_input(center, h.data());
    ns_update(h.data(), d, context, offset_out_[slot], lr, rng, dh.data());
    scatter_input_grad(center, dh.data(), 1.0, lr);
}

void EmbeddingTrainer::train(const TokenCorpus& corpus) {
    if (corpus.total_tokens() < 2)
        throw DataError("training corpus has fewer than 2 tokens");
    schedule_total_ = static_cast<std::uint64_t>(cfg_.epochs) * vocab_.total_count();
    progress_ = 0;

    if (cfg_.workers == 1) {
        train_worker(corpus, 0, corpus.documents.size(), Rng(cfg_.seed * 0x9e3779b1ULL + 1));
        return;
    }
    std::vector<std::thread> threads;
    std::size_t n_docs = corpus.documents.size();
    std::size_t n_workers = std::min<std::size_t>(cfg_.workers, std::max<std::size_t>(n_docs, 1));
    for (std::size_t w = 0; w < n_workers; ++w) {
        std::size_t begin = n_docs * w / n_workers;
        std::size_t end = n_docs * (w + 1) / n_workers;
        threads.emplace_back(&EmbeddingTrainer::train_worker, this, std::cref(corpus), begin, end,
                             Rng(cfg_.seed * 0x9e3779b1ULL + 1 + w));
    }
    for (auto& t : threads) t.join();
}

void EmbeddingTrainer::train_worker(const TokenCorpus& corpus, std::size_t doc_begin,
                                    std::size_t doc_end, Rng rng) {
    const int w = cfg_.window;
    std::vector<int> kept;
    std::vector<int> window_ids;
    std::vector<int> context;

    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
        for (std::size_t di = doc_begin; di < doc_end; ++di) {
            const auto& doc = corpus.documents[di];

            kept.clear();
            std::uint64_t in_vocab = 0;
            for (const std::string& tok : doc) {
                int id = vocab_.id_of(tok);
                if (id < 0) continue;
                ++in_vocab;
                if (cfg_.subsample > 0.0 && rng.next_double() >= keep_probability(id)) continue;
                kept.push_back(id);
            }
            std::uint64_t done = progress_.fetch_add(in_vocab, std::memory_order_relaxed);
            double frac = static_cast<double>(done) / static_cast<double>(schedule_total_ + 1);
            double lr = cfg_.initial_lr * std::max(1e-4, 1.0 - frac);

            const int n = static_cast<int>(kept.size());
            for (int t = 0; t < n; ++t) {
                switch (cfg_.family) {
                    case Family::kPlain:
                    case Family::kSubword:
                        if (cfg_.mode == Mode::kCbow) {
                            context.clear();
                            for (int j = std::max(0, t - w); j <= std::min(n - 1, t + w); ++j)
                                if (j != t) context.push_back(kept[j]);
                            step_cbow(context, kept[t], lr, rng);
                        } else {
                            for (int j = std::max(0, t - w); j <= std::min(n - 1, t + w); ++j)
                                if (j != t) step_skipgram(kept[t], kept[j], lr, rng);
                        }
                        break;
                    case Family::kOrder:
                        if (cfg_.mode == Mode::kCbow) {
                            window_ids.assign(2 * w, -1);
                            for (int o = -w; o <= w; ++o) {
                                if (o == 0) continue;
                                int j = t + o;
                                int slot = o < 0 ? o + w : w + o - 1;
                                if (j >= 0 && j < n) window_ids[slot] = kept[j];
                            }
                            step_cwindow(window_ids, kept[t], lr, rng);
                        } else {
                            for (int o = -w; o <= w; ++o) {
                                if (o == 0) continue;
                                int j = t + o;
                                if (j >= 0 && j < n) step_ssg(kept[t], kept[j], o, lr, rng);
                            }
                        }
                        break;
                }
            }
        }
    }
}

EmbeddingTable EmbeddingTrainer::take_result() {
    EmbeddingTable table;
    table.dim = cfg_.dim;
    table.method_tag = cfg_.method_tag();

    if (cfg_.family == Family::kSubword) {
        // compose word + n-gram rows once, then hand the buckets over for
        // OOV composition
        table.vectors = nn::Tensor2(vocab_.size(), cfg_.dim);
        for (int i = 0; i < vocab_.size(); ++i) compose_input(i, table.vectors.row_ptr(i));
        SubwordTable sw;
        sw.buckets = std::move(bucket_in_);
        sw.n_min = cfg_.ngram_min;
        sw.n_max = cfg_.ngram_max;
        sw.hash_seed = cfg_.seed;
        table.subword = std::move(sw);
    } else {
        table.vectors = std::move(input_);
    }
    table.vocab = std::move(vocab_);
    return table;
}

EmbeddingTable train_embeddings(const TokenCorpus& corpus, const InductionConfig& cfg) {
    Vocabulary vocab = Vocabulary::build(corpus, cfg.min_count);
    EmbeddingTrainer trainer(std::move(vocab), cfg);
    trainer.train(corpus);
    return trainer.take_result();
}

} // namespace sbd::emb
