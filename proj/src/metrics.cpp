#include "sbd/metrics.hpp"

#include "sbd/errors.hpp"

namespace sbd::eval {

MetricsReport metrics_from_counts(const ConfusionCounts& counts) {
    MetricsReport r;
    r.counts = counts;
    if (counts.tp + counts.fp > 0) {
        r.precision = static_cast<double>(counts.tp) / (counts.tp + counts.fp);
    } else {
        r.precision = 0.0;
        r.degenerate = true;
    }
    if (counts.tp + counts.fn > 0) {
        r.recall = static_cast<double>(counts.tp) / (counts.tp + counts.fn);
    } else {
        r.recall = 0.0;
        r.degenerate = true;
    }
    if (r.precision + r.recall > 0.0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

MetricsReport compute_metrics(const std::vector<corpus::Label>& predicted,
                              const std::vector<corpus::Label>& gold) {
    if (predicted.size() != gold.size())
        throw ArgumentError("compute_metrics: " + std::to_string(predicted.size()) +
                            " predictions for " + std::to_string(gold.size()) + " gold labels");
    ConfusionCounts c;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        bool p = predicted[i] == corpus::Label::B;
        bool g = gold[i] == corpus::Label::B;
        if (p && g) ++c.tp;
        else if (p && !g) ++c.fp;
        else if (!p && g) ++c.fn;
        else ++c.tn;
    }
    return metrics_from_counts(c);
}

} // namespace sbd::eval
