#include "sbd/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "sbd/errors.hpp"

namespace sbd::nn {

GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::vector<ParamBlock>& blocks, double h) {
    GradCheckReport report;
    for (const ParamBlock& block : blocks) {
        if (!block.value || !block.grad)
            throw ArgumentError("grad_check: null block '" + block.name + "'");
        if (!block.value->same_shape(*block.grad))
            throw ShapeError("grad_check: grad shape mismatch for '" + block.name + "'");
        Tensor2& value = *block.value;
        for (std::size_t i = 0; i < value.size(); ++i) {
            double saved = value.at(i);
            value.at(i) = saved + h;
            double loss_plus = loss_fn();
            value.at(i) = saved - h;
            double loss_minus = loss_fn();
            value.at(i) = saved;

            double numeric = (loss_plus - loss_minus) / (2.0 * h);
            double analytic = block.grad->at(i);
            double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
            double rel = std::fabs(analytic - numeric) / denom;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_block = block.name;
                report.worst_index = i;
                report.analytic = analytic;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

} // namespace sbd::nn
