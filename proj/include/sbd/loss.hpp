#pragma once

#include <vector>

#include "sbd/tensor.hpp"

namespace sbd::nn {

// Raw per-collection sums, before normalization. d_logits holds
// w_t * (p_t - onehot_t) per row so a minibatch can be normalized by its
// combined weight once all windows contributed.
struct WceTerms {
    double nll_sum = 0.0;    // sum_t w(y_t) * -ln p_t(y_t)
    double weight_sum = 0.0; // sum_t w(y_t)
    Tensor2 d_logits;        // unnormalized
    int clamp_count = 0;     // probabilities clamped at 1e-12
};

// labels hold class indices into class_weights; positions with mask[t]
// false are excluded entirely.
WceTerms weighted_ce_terms(const Tensor2& probs, const std::vector<int>& labels,
                           const std::vector<double>& class_weights,
                           const std::vector<bool>* mask = nullptr);

struct WceResult {
    double loss = 0.0; // nll_sum / weight_sum (0 when nothing contributes)
    Tensor2 d_logits;  // gradient of the normalized loss w.r.t. logits
    int clamp_count = 0;
};

WceResult weighted_cross_entropy(const Tensor2& probs, const std::vector<int>& labels,
                                 const std::vector<double>& class_weights,
                                 const std::vector<bool>* mask = nullptr);

} // namespace sbd::nn
