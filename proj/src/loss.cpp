#include "sbd/loss.hpp"

#include <cmath>

#include "sbd/errors.hpp"

namespace sbd::nn {

namespace {
constexpr double kProbFloor = 1e-12;
}

WceTerms weighted_ce_terms(const Tensor2& probs, const std::vector<int>& labels,
                           const std::vector<double>& class_weights,
                           const std::vector<bool>* mask) {
    const int n = probs.rows();
    const int n_classes = probs.cols();
    if (static_cast<int>(labels.size()) != n)
        throw ArgumentError("weighted_ce: " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(n) + " probability rows");
    if (static_cast<int>(class_weights.size()) != n_classes)
        throw ArgumentError("weighted_ce: class_weights size mismatch");
    for (double w : class_weights)
        if (!(w > 0.0)) throw ArgumentError("weighted_ce: class weights must be positive");
    if (mask && static_cast<int>(mask->size()) != n)
        throw ArgumentError("weighted_ce: mask length mismatch");

    WceTerms terms;
    terms.d_logits = Tensor2(n, n_classes);
    for (int t = 0; t < n; ++t) {
        if (mask && !(*mask)[t]) continue;
        int y = labels[t];
        if (y < 0 || y >= n_classes)
            throw ArgumentError("weighted_ce: label out of range at position " + std::to_string(t));
        double w = class_weights[y];
        double p = probs(t, y);
        if (p < kProbFloor) {
            p = kProbFloor;
            ++terms.clamp_count;
        }
        terms.nll_sum += w * -std::log(p);
        terms.weight_sum += w;
        for (int c = 0; c < n_classes; ++c)
            terms.d_logits(t, c) = w * (probs(t, c) - (c == y ? 1.0 : 0.0));
    }
    return terms;
}

WceResult weighted_cross_entropy(const Tensor2& probs, const std::vector<int>& labels,
                                 const std::vector<double>& class_weights,
                                 const std::vector<bool>* mask) {
    WceTerms terms = weighted_ce_terms(probs, labels, class_weights, mask);
    WceResult res;
    res.clamp_count = terms.clamp_count;
    res.d_logits = std::move(terms.d_logits);
    if (terms.weight_sum > 0.0) {
        res.loss = terms.nll_sum / terms.weight_sum;
        for (std::size_t i = 0; i < res.d_logits.size(); ++i)
            res.d_logits.at(i) /= terms.weight_sum;
    }
    return res;
}

} // namespace sbd::nn
