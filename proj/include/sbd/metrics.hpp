#pragma once

#include <vector>

#include "sbd/corpus.hpp"

namespace sbd::eval {

// B is the positive class; NB is never averaged in.
struct ConfusionCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;

    long long total() const { return tp + fp + fn + tn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp; fp += o.fp; fn += o.fn; tn += o.tn;
        return *this;
    }
};

struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    ConfusionCounts counts;
    // set when a 0/0 convention produced one of the numbers
    bool degenerate = false;
};

MetricsReport metrics_from_counts(const ConfusionCounts& counts);

// Token-level comparison; throws ArgumentError on length mismatch.
// Masked/pad positions are excluded upstream.
MetricsReport compute_metrics(const std::vector<corpus::Label>& predicted,
                              const std::vector<corpus::Label>& gold);

} // namespace sbd::eval
