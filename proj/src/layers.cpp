#include "sbd/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sbd::nn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double xavier_bound(int fan_in, int fan_out) {
    return std::sqrt(6.0 / (fan_in + fan_out));
}

} // namespace

// ------------------------------- conv ---------------------------------

ConvLayer::ConvLayer(int n_f_, int h_c_, int d_in_) : n_f(n_f_), h_c(h_c_), d_in(d_in_) {
    if (n_f < 1) throw ArgumentError("ConvLayer: n_f must be positive");
    if (h_c < 1 || h_c % 2 == 0) throw ArgumentError("ConvLayer: h_c must be odd and >= 1");
    if (d_in < 1) throw ArgumentError("ConvLayer: d_in must be positive");
    filters = Tensor2(n_f, h_c * d_in);
    bias = Tensor2(1, n_f);
}

void ConvLayer::init(Rng& rng) {
    double b = xavier_bound(h_c * d_in, n_f);
    filters.randomize_uniform(-b, b, rng);
    bias.zero();
}

int conv_output_length(int phi, int h_c) {
    int p = h_c / 2;
    return phi - h_c + 2 * p + 1;
}

Tensor2 conv1d_forward(const Tensor2& input, const ConvLayer& layer, ConvCache& cache) {
    if (input.cols() != layer.d_in)
        throw ShapeError("conv1d_forward: input width " + std::to_string(input.cols()) +
                         " != filter expectation " + std::to_string(layer.d_in));
    const int phi = input.rows();
    const int p = layer.h_c / 2;
    const int q_f = conv_output_length(phi, layer.h_c);

    cache.input = input;
    cache.pre = Tensor2(q_f, layer.n_f);
    Tensor2 out(q_f, layer.n_f);

    for (int t = 0; t < q_f; ++t) {
        for (int f = 0; f < layer.n_f; ++f) {
            const double* w = layer.filters.row_ptr(f);
            double acc = layer.bias(0, f);
            for (int j = 0; j < layer.h_c; ++j) {
                int src = t - p + j;
                if (src < 0 || src >= phi) continue; // zero padding
                const double* in_row = input.row_ptr(src);
                const double* w_row = w + j * layer.d_in;
                for (int k = 0; k < layer.d_in; ++k) acc += w_row[k] * in_row[k];
            }
            cache.pre(t, f) = acc;
            out(t, f) = acc > 0.0 ? acc : 0.0;
        }
    }
    return out;
}

Tensor2 conv1d_backward(const Tensor2& d_out, const ConvLayer& layer, const ConvCache& cache,
                        ConvGrads& grads) {
    const int phi = cache.input.rows();
    const int p = layer.h_c / 2;
    require_shape(d_out, cache.pre.rows(), layer.n_f, "conv1d_backward: d_out");

    Tensor2 d_input(phi, layer.d_in);
    for (int t = 0; t < d_out.rows(); ++t) {
        for (int f = 0; f < layer.n_f; ++f) {
            if (cache.pre(t, f) <= 0.0) continue; // ReLU gate
            double g = d_out(t, f);
            if (g == 0.0) continue;
            grads.bias(0, f) += g;
            double* dw = grads.filters.row_ptr(f);
            const double* w = layer.filters.row_ptr(f);
            for (int j = 0; j < layer.h_c; ++j) {
                int src = t - p + j;
                if (src < 0 || src >= phi) continue;
                const double* in_row = cache.input.row_ptr(src);
                double* d_in_row = d_input.row_ptr(src);
                const double* w_row = w + j * layer.d_in;
                double* dw_row = dw + j * layer.d_in;
                for (int k = 0; k < layer.d_in; ++k) {
                    dw_row[k] += g * in_row[k];
                    d_in_row[k] += g * w_row[k];
                }
            }
        }
    }
    return d_input;
}

// ------------------------------ maxpool -------------------------------

Tensor2 maxpool_temporal(const Tensor2& features, int h_m, MaxPoolCache& cache) {
    if (h_m < 1 || h_m % 2 == 0)
        throw ArgumentError("maxpool_temporal: h_m must be odd and >= 1");
    const int phi = features.rows();
    const int n_f = features.cols();
    const int r = h_m / 2;

    cache.rows = phi;
    cache.cols = n_f;
    cache.argmax.assign(static_cast<std::size_t>(phi) * n_f, 0);

    Tensor2 out(phi, n_f);
    for (int t = 0; t < phi; ++t) {
        int lo = std::max(0, t - r);
        int hi = std::min(phi - 1, t + r);
        for (int f = 0; f < n_f; ++f) {
            double best = -std::numeric_limits<double>::infinity();
            int best_row = lo;
            for (int s = lo; s <= hi; ++s) {
                double v = features(s, f);
                if (v > best) { // strict: first index wins ties
                    best = v;
                    best_row = s;
                }
            }
            out(t, f) = best;
            cache.argmax[static_cast<std::size_t>(t) * n_f + f] = best_row;
        }
    }
    return out;
}

Tensor2 maxpool_backward(const Tensor2& d_out, const MaxPoolCache& cache) {
    require_shape(d_out, cache.rows, cache.cols, "maxpool_backward: d_out");
    Tensor2 d_in(cache.rows, cache.cols);
    for (int t = 0; t < cache.rows; ++t)
        for (int f = 0; f < cache.cols; ++f)
            d_in(cache.argmax[static_cast<std::size_t>(t) * cache.cols + f], f) += d_out(t, f);
    return d_in;
}

// ------------------------------- lstm ---------------------------------

LstmCell::LstmCell(int n_r_, int d_in_) : n_r(n_r_), d_in(d_in_) {
    if (n_r < 1 || d_in < 1) throw ArgumentError("LstmCell: sizes must be positive");
    int z = d_in + n_r;
    W_i = Tensor2(n_r, z);
    W_f = Tensor2(n_r, z);
    W_o = Tensor2(n_r, z);
    W_g = Tensor2(n_r, z);
    b_i = Tensor2(1, n_r);
    b_f = Tensor2(1, n_r, 1.0);
    b_o = Tensor2(1, n_r);
    b_g = Tensor2(1, n_r);
}

void LstmCell::init(Rng& rng) {
    double b = xavier_bound(d_in + n_r, n_r);
    W_i.randomize_uniform(-b, b, rng);
    W_f.randomize_uniform(-b, b, rng);
    W_o.randomize_uniform(-b, b, rng);
    W_g.randomize_uniform(-b, b, rng);
    b_i.zero();
    b_f.fill(1.0);
    b_o.zero();
    b_g.zero();
}

LstmGrads::LstmGrads(const LstmCell& cell)
    : W_i(cell.W_i.rows(), cell.W_i.cols()),
      W_f(cell.W_f.rows(), cell.W_f.cols()),
      W_o(cell.W_o.rows(), cell.W_o.cols()),
      W_g(cell.W_g.rows(), cell.W_g.cols()),
      b_i(1, cell.n_r), b_f(1, cell.n_r), b_o(1, cell.n_r), b_g(1, cell.n_r) {}

void LstmGrads::zero() {
    W_i.zero(); W_f.zero(); W_o.zero(); W_g.zero();
    b_i.zero(); b_f.zero(); b_o.zero(); b_g.zero();
}

namespace {

// gate pre-activation: W z + b for one gate
void gate_affine(const Tensor2& W, const Tensor2& b, const double* z, int z_len, double* out) {
    for (int r = 0; r < W.rows(); ++r) {
        const double* w = W.row_ptr(r);
        double acc = b(0, r);
        for (int c = 0; c < z_len; ++c) acc += w[c] * z[c];
        out[r] = acc;
    }
}

} // namespace

void lstm_step(const LstmCell& cell, const std::vector<double>& x_t,
               const std::vector<double>& h_prev, const std::vector<double>& c_prev,
               std::vector<double>& h_t, std::vector<double>& c_t) {
    if (static_cast<int>(x_t.size()) != cell.d_in ||
        static_cast<int>(h_prev.size()) != cell.n_r ||
        static_cast<int>(c_prev.size()) != cell.n_r)
        throw ShapeError("lstm_step: input sizes do not match cell");

    int z_len = cell.d_in + cell.n_r;
    std::vector<double> z(z_len);
    std::copy(x_t.begin(), x_t.end(), z.begin());
    std::copy(h_prev.begin(), h_prev.end(), z.begin() + cell.d_in);

    std::vector<double> ai(cell.n_r), af(cell.n_r), ao(cell.n_r), ag(cell.n_r);
    gate_affine(cell.W_i, cell.b_i, z.data(), z_len, ai.data());
    gate_affine(cell.W_f, cell.b_f, z.data(), z_len, af.data());
    gate_affine(cell.W_o, cell.b_o, z.data(), z_len, ao.data());
    gate_affine(cell.W_g, cell.b_g, z.data(), z_len, ag.data());

    h_t.resize(cell.n_r);
    c_t.resize(cell.n_r);
    for (int r = 0; r < cell.n_r; ++r) {
        double i = sigmoid(ai[r]), f = sigmoid(af[r]), o = sigmoid(ao[r]), g = std::tanh(ag[r]);
        c_t[r] = f * c_prev[r] + i * g;
        h_t[r] = o * std::tanh(c_t[r]);
    }
}

Tensor2 lstm_forward(const LstmCell& cell, const Tensor2& sequence, LstmSeqCache& cache) {
    if (sequence.cols() != cell.d_in)
        throw ShapeError("lstm_forward: input width " + std::to_string(sequence.cols()) +
                         " != cell d_in " + std::to_string(cell.d_in));
    const int phi = sequence.rows();
    const int n_r = cell.n_r;
    const int z_len = cell.d_in + n_r;

    cache.input = sequence;
    cache.z = Tensor2(phi, z_len);
    cache.i = Tensor2(phi, n_r);
    cache.f = Tensor2(phi, n_r);
    cache.o = Tensor2(phi, n_r);
    cache.g = Tensor2(phi, n_r);
    cache.c = Tensor2(phi, n_r);
    cache.tanh_c = Tensor2(phi, n_r);

    Tensor2 h(phi, n_r);
    std::vector<double> ai(n_r), af(n_r), ao(n_r), ag(n_r);

    for (int t = 0; t < phi; ++t) {
        double* z = cache.z.row_ptr(t);
        const double* x = sequence.row_ptr(t);
        std::copy(x, x + cell.d_in, z);
        if (t == 0)
            std::fill(z + cell.d_in, z + z_len, 0.0);
        else
            std::copy(h.row_ptr(t - 1), h.row_ptr(t - 1) + n_r, z + cell.d_in);

        gate_affine(cell.W_i, cell.b_i, z, z_len, ai.data());
        gate_affine(cell.W_f, cell.b_f, z, z_len, af.data());
        gate_affine(cell.W_o, cell.b_o, z, z_len, ao.data());
        gate_affine(cell.W_g, cell.b_g, z, z_len, ag.data());

        for (int r = 0; r < n_r; ++r) {
            double iv = sigmoid(ai[r]), fv = sigmoid(af[r]), ov = sigmoid(ao[r]);
            double gv = std::tanh(ag[r]);
            double c_prev = t == 0 ? 0.0 : cache.c(t - 1, r);
            double cv = fv * c_prev + iv * gv;
            cache.i(t, r) = iv;
            cache.f(t, r) = fv;
            cache.o(t, r) = ov;
            cache.g(t, r) = gv;
            cache.c(t, r) = cv;
            double tc = std::tanh(cv);
            cache.tanh_c(t, r) = tc;
            h(t, r) = ov * tc;
        }
    }
    return h;
}

Tensor2 lstm_backward(const LstmCell& cell, const LstmSeqCache& cache, const Tensor2& d_h,
                      LstmGrads& grads) {
    const int phi = cache.input.rows();
    const int n_r = cell.n_r;
    const int z_len = cell.d_in + n_r;
    require_shape(d_h, phi, n_r, "lstm_backward: d_h");

    Tensor2 d_seq(phi, cell.d_in);
    std::vector<double> dh_next(n_r, 0.0); // dL/dh_t flowing from step t+1
    std::vector<double> dc_next(n_r, 0.0);
    std::vector<double> da(4 * n_r);

    for (int t = phi - 1; t >= 0; --t) {
        double* da_i = da.data();
        double* da_f = da.data() + n_r;
        double* da_o = da.data() + 2 * n_r;
        double* da_g = da.data() + 3 * n_r;

        for (int r = 0; r < n_r; ++r) {
            double dh = d_h(t, r) + dh_next[r];
            double o = cache.o(t, r), tc = cache.tanh_c(t, r);
            double dc = dc_next[r] + dh * o * (1.0 - tc * tc);
            double i = cache.i(t, r), f = cache.f(t, r), g = cache.g(t, r);
            double c_prev = t == 0 ? 0.0 : cache.c(t - 1, r);

            double d_o = dh * tc;
            double d_i = dc * g;
            double d_f = dc * c_prev;
            double d_g = dc * i;

            da_i[r] = d_i * i * (1.0 - i);
            da_f[r] = d_f * f * (1.0 - f);
            da_o[r] = d_o * o * (1.0 - o);
            da_g[r] = d_g * (1.0 - g * g);
            dc_next[r] = dc * f;
        }

        const double* z = cache.z.row_ptr(t);
        std::vector<double> dz(z_len, 0.0);
        auto accumulate_gate = [&](const Tensor2& W, Tensor2& dW, Tensor2& db, const double* da_gate) {
            for (int r = 0; r < n_r; ++r) {
                double a = da_gate[r];
                if (a == 0.0) continue;
                db(0, r) += a;
                double* dw = dW.row_ptr(r);
                const double* w = W.row_ptr(r);
                for (int c = 0; c < z_len; ++c) {
                    dw[c] += a * z[c];
                    dz[c] += a * w[c];
                }
            }
        };
        accumulate_gate(cell.W_i, grads.W_i, grads.b_i, da_i);
        accumulate_gate(cell.W_f, grads.W_f, grads.b_f, da_f);
        accumulate_gate(cell.W_o, grads.W_o, grads.b_o, da_o);
        accumulate_gate(cell.W_g, grads.W_g, grads.b_g, da_g);

        for (int k = 0; k < cell.d_in; ++k) d_seq(t, k) = dz[k];
        for (int r = 0; r < n_r; ++r) dh_next[r] = dz[cell.d_in + r];
    }
    return d_seq;
}

// ------------------------------ bilstm --------------------------------

namespace {

Tensor2 reverse_rows(const Tensor2& m) {
    Tensor2 out(m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r)
        std::copy(m.row_ptr(r), m.row_ptr(r) + m.cols(), out.row_ptr(m.rows() - 1 - r));
    return out;
}

} // namespace

Tensor2 bilstm_forward(const LstmCell& cell_fwd, const LstmCell& cell_bwd,
                       const Tensor2& sequence, BiLstmCache& cache) {
    if (cell_fwd.n_r != cell_bwd.n_r || cell_fwd.d_in != cell_bwd.d_in)
        throw ShapeError("bilstm_forward: direction cells disagree on shape");
    const int phi = sequence.rows();
    const int n_r = cell_fwd.n_r;

    Tensor2 h_fwd = lstm_forward(cell_fwd, sequence, cache.fwd);
    Tensor2 h_bwd_rev = lstm_forward(cell_bwd, reverse_rows(sequence), cache.bwd);

    Tensor2 out(phi, 2 * n_r);
    for (int t = 0; t < phi; ++t) {
        std::copy(h_fwd.row_ptr(t), h_fwd.row_ptr(t) + n_r, out.row_ptr(t));
        const double* hb = h_bwd_rev.row_ptr(phi - 1 - t);
        std::copy(hb, hb + n_r, out.row_ptr(t) + n_r);
    }
    return out;
}

Tensor2 bilstm_backward(const LstmCell& cell_fwd, const LstmCell& cell_bwd,
                        const BiLstmCache& cache, const Tensor2& d_out, LstmGrads& grads_fwd,
                        LstmGrads& grads_bwd) {
    const int phi = d_out.rows();
    const int n_r = cell_fwd.n_r;
    require_shape(d_out, phi, 2 * n_r, "bilstm_backward: d_out");

    Tensor2 d_h_fwd(phi, n_r);
    Tensor2 d_h_bwd_rev(phi, n_r);
    for (int t = 0; t < phi; ++t) {
        const double* row = d_out.row_ptr(t);
        std::copy(row, row + n_r, d_h_fwd.row_ptr(t));
        std::copy(row + n_r, row + 2 * n_r, d_h_bwd_rev.row_ptr(phi - 1 - t));
    }

    Tensor2 d_seq = lstm_backward(cell_fwd, cache.fwd, d_h_fwd, grads_fwd);
    Tensor2 d_seq_rev = lstm_backward(cell_bwd, cache.bwd, d_h_bwd_rev, grads_bwd);
    d_seq.add_scaled(reverse_rows(d_seq_rev), 1.0);
    return d_seq;
}

// ------------------------------ dropout -------------------------------

Tensor2 dropout(const Tensor2& x, double rate, bool training, Rng& rng, Tensor2* mask_out) {
    if (rate < 0.0 || rate >= 1.0)
        throw ArgumentError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
    if (!training || rate == 0.0) {
        if (mask_out) {
            *mask_out = Tensor2(x.rows(), x.cols());
            mask_out->fill(1.0);
        }
        return x;
    }
    double scale = 1.0 / (1.0 - rate);
    Tensor2 out(x.rows(), x.cols());
    Tensor2 mask(x.rows(), x.cols());
    for (std::size_t idx = 0; idx < x.size(); ++idx) {
        double m = rng.next_double() < rate ? 0.0 : scale;
        mask.at(idx) = m;
        out.at(idx) = x.at(idx) * m;
    }
    if (mask_out) *mask_out = std::move(mask);
    return out;
}

Tensor2 dropout_backward(const Tensor2& d_y, const Tensor2& mask) {
    if (!d_y.same_shape(mask)) throw ShapeError("dropout_backward: mask shape mismatch");
    Tensor2 d_x(d_y.rows(), d_y.cols());
    for (std::size_t i = 0; i < d_y.size(); ++i) d_x.at(i) = d_y.at(i) * mask.at(i);
    return d_x;
}

// ------------------------------- dense --------------------------------

DenseLayer::DenseLayer(int n_out, int n_in) : W(n_out, n_in), b(1, n_out) {
    if (n_out < 1 || n_in < 1) throw ArgumentError("DenseLayer: sizes must be positive");
}

void DenseLayer::init(Rng& rng) {
    double bound = xavier_bound(W.cols(), W.rows());
    W.randomize_uniform(-bound, bound, rng);
    b.zero();
}

Tensor2 dense_forward(const Tensor2& x, const DenseLayer& layer) {
    if (x.cols() != layer.W.cols())
        throw ShapeError("dense_forward: input width " + std::to_string(x.cols()) +
                         " != weight columns " + std::to_string(layer.W.cols()));
    Tensor2 logits(x.rows(), layer.W.rows());
    for (int t = 0; t < x.rows(); ++t) {
        const double* xin = x.row_ptr(t);
        for (int o = 0; o < layer.W.rows(); ++o) {
            const double* w = layer.W.row_ptr(o);
            double acc = layer.b(0, o);
            for (int c = 0; c < x.cols(); ++c) acc += w[c] * xin[c];
            logits(t, o) = acc;
        }
    }
    return logits;
}

Tensor2 dense_backward(const Tensor2& d_logits, const DenseLayer& layer, const Tensor2& x,
                       DenseGrads& grads) {
    require_shape(d_logits, x.rows(), layer.W.rows(), "dense_backward: d_logits");
    Tensor2 d_x(x.rows(), x.cols());
    for (int t = 0; t < x.rows(); ++t) {
        const double* xin = x.row_ptr(t);
        double* dxr = d_x.row_ptr(t);
        for (int o = 0; o < layer.W.rows(); ++o) {
            double g = d_logits(t, o);
            if (g == 0.0) continue;
            grads.b(0, o) += g;
            double* dw = grads.W.row_ptr(o);
            const double* w = layer.W.row_ptr(o);
            for (int c = 0; c < x.cols(); ++c) {
                dw[c] += g * xin[c];
                dxr[c] += g * w[c];
            }
        }
    }
    return d_x;
}

Tensor2 softmax_rows(const Tensor2& logits) {
    Tensor2 out(logits.rows(), logits.cols());
    for (int t = 0; t < logits.rows(); ++t) {
        const double* row = logits.row_ptr(t);
        double mx = row[0];
        for (int c = 1; c < logits.cols(); ++c) mx = std::max(mx, row[c]);
        if (!std::isfinite(mx))
            throw NumericError("softmax: non-finite logit at row " + std::to_string(t));
        double sum = 0.0;
        double* orow = out.row_ptr(t);
        for (int c = 0; c < logits.cols(); ++c) {
            orow[c] = std::exp(row[c] - mx);
            sum += orow[c];
        }
        for (int c = 0; c < logits.cols(); ++c) orow[c] /= sum;
    }
    return out;
}

std::pair<double, double> dense_softmax(const std::vector<double>& x, const DenseLayer& layer) {
    if (static_cast<int>(x.size()) != layer.W.cols())
        throw ShapeError("dense_softmax: input size mismatch");
    if (layer.W.rows() != 2)
        throw ShapeError("dense_softmax: expected a 2-way head");
    Tensor2 xin(1, static_cast<int>(x.size()));
    std::copy(x.begin(), x.end(), xin.row_ptr(0));
    Tensor2 probs = softmax_rows(dense_forward(xin, layer));
    return {probs(0, 0), probs(0, 1)};
}

} // namespace sbd::nn
