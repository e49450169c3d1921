#pragma once

#include <utility>
#include <vector>

#include "sbd/tensor.hpp"

namespace sbd::nn {

// ---------------------------------------------------------------------
// 1-D convolution over the temporal axis, stride 1, ReLU activation.
// Zero padding of p = h_c/2 rows on each side keeps the output length at
// phi - h_c + 2p + 1 (= phi for odd h_c), so every input position gets a
// feature row.
// ---------------------------------------------------------------------

struct ConvLayer {
    int n_f = 0;  // filter count
    int h_c = 0;  // temporal window, odd
    int d_in = 0; // input width

    Tensor2 filters; // n_f x (h_c * d_in)
    Tensor2 bias;    // 1 x n_f

    ConvLayer() = default;
    ConvLayer(int n_f, int h_c, int d_in);

    void init(Rng& rng); // scaled uniform weights, zero bias
};

struct ConvGrads {
    Tensor2 filters;
    Tensor2 bias;

    explicit ConvGrads(const ConvLayer& layer)
        : filters(layer.filters.rows(), layer.filters.cols()), bias(1, layer.n_f) {}
    void zero() { filters.zero(); bias.zero(); }
};

struct ConvCache {
    Tensor2 input; // phi x d_in, as seen by forward
    Tensor2 pre;   // phi x n_f, pre-activation
};

int conv_output_length(int phi, int h_c);

// input phi x d_in -> phi x n_f (ReLU applied)
Tensor2 conv1d_forward(const Tensor2& input, const ConvLayer& layer, ConvCache& cache);

// d_out phi x n_f -> d_input phi x d_in; accumulates into grads
Tensor2 conv1d_backward(const Tensor2& d_out, const ConvLayer& layer, const ConvCache& cache,
                        ConvGrads& grads);

// ---------------------------------------------------------------------
// Same-length temporal max pooling over a window of h_m rows centered at
// each position, -inf padding. Gradient goes to the argmax; ties break
// toward the earlier index.
// ---------------------------------------------------------------------

struct MaxPoolCache {
    std::vector<int> argmax; // row index per (t, f), flat t * n_f + f
    int rows = 0;
    int cols = 0;
};

Tensor2 maxpool_temporal(const Tensor2& features, int h_m, MaxPoolCache& cache);
Tensor2 maxpool_backward(const Tensor2& d_out, const MaxPoolCache& cache);

// ---------------------------------------------------------------------
// LSTM with forget gate:
//   i = sig(W_i [x;h] + b_i)   f = sig(W_f [x;h] + b_f)
//   o = sig(W_o [x;h] + b_o)   g = tanh(W_g [x;h] + b_g)
//   c_t = f . c_prev + i . g   h_t = o . tanh(c_t)
// Forget bias initializes to 1.
// ---------------------------------------------------------------------

struct LstmCell {
    int n_r = 0;  // hidden size
    int d_in = 0; // input width

    Tensor2 W_i, W_f, W_o, W_g; // each n_r x (d_in + n_r)
    Tensor2 b_i, b_f, b_o, b_g; // each 1 x n_r

    LstmCell() = default;
    LstmCell(int n_r, int d_in);

    void init(Rng& rng);
};

struct LstmGrads {
    Tensor2 W_i, W_f, W_o, W_g;
    Tensor2 b_i, b_f, b_o, b_g;

    explicit LstmGrads(const LstmCell& cell);
    void zero();
};

// single step, exposed for unit-level checks
void lstm_step(const LstmCell& cell, const std::vector<double>& x_t,
               const std::vector<double>& h_prev, const std::vector<double>& c_prev,
               std::vector<double>& h_t, std::vector<double>& c_t);

struct LstmSeqCache {
    Tensor2 input;                  // phi x d_in
    Tensor2 z;                      // phi x (d_in + n_r), [x_t ; h_{t-1}]
    Tensor2 i, f, o, g, c, tanh_c;  // phi x n_r each
};

// zero initial states; returns phi x n_r hidden sequence
Tensor2 lstm_forward(const LstmCell& cell, const Tensor2& sequence, LstmSeqCache& cache);

// BPTT; d_h is phi x n_r, returns d_sequence phi x d_in
Tensor2 lstm_backward(const LstmCell& cell, const LstmSeqCache& cache, const Tensor2& d_h,
                      LstmGrads& grads);

// ---------------------------------------------------------------------
// Bidirectional wrapper: forward cell left-to-right, backward cell
// right-to-left, hidden states concatenated per timestep.
// ---------------------------------------------------------------------

struct BiLstmCache {
    LstmSeqCache fwd;
    LstmSeqCache bwd; // over the reversed sequence
};

Tensor2 bilstm_forward(const LstmCell& cell_fwd, const LstmCell& cell_bwd,
                       const Tensor2& sequence, BiLstmCache& cache);

Tensor2 bilstm_backward(const LstmCell& cell_fwd, const LstmCell& cell_bwd,
                        const BiLstmCache& cache, const Tensor2& d_out, LstmGrads& grads_fwd,
                        LstmGrads& grads_bwd);

// ---------------------------------------------------------------------
// Inverted dropout. Training mode zeroes entries with probability rate
// and scales survivors by 1/(1-rate); inference is the identity. The
// mask holds the applied per-entry scale so backward reuses it.
// ---------------------------------------------------------------------

Tensor2 dropout(const Tensor2& x, double rate, bool training, Rng& rng, Tensor2* mask_out = nullptr);
Tensor2 dropout_backward(const Tensor2& d_y, const Tensor2& mask);

// ---------------------------------------------------------------------
// Fully connected output layer + softmax.
// ---------------------------------------------------------------------

struct DenseLayer {
    Tensor2 W; // n_out x n_in
    Tensor2 b; // 1 x n_out

    DenseLayer() = default;
    DenseLayer(int n_out, int n_in);
    void init(Rng& rng);
};

struct DenseGrads {
    Tensor2 W, b;

    explicit DenseGrads(const DenseLayer& layer)
        : W(layer.W.rows(), layer.W.cols()), b(1, layer.b.cols()) {}
    void zero() { W.zero(); b.zero(); }
};

// x: phi x n_in -> logits phi x n_out
Tensor2 dense_forward(const Tensor2& x, const DenseLayer& layer);
Tensor2 dense_backward(const Tensor2& d_logits, const DenseLayer& layer, const Tensor2& x,
                       DenseGrads& grads);

// row-wise softmax with max subtraction; rows sum to 1 within 1e-9
Tensor2 softmax_rows(const Tensor2& logits);

// single 2-way head over one hidden vector: (P(B), P(NB))
std::pair<double, double> dense_softmax(const std::vector<double>& x, const DenseLayer& layer);

} // namespace sbd::nn
