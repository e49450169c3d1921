#include "sbd/optimizer.hpp"

#include <cmath>

#include "sbd/errors.hpp"

namespace sbd::nn {

RmsProp::RmsProp(RmsPropConfig cfg) : cfg_(cfg) {
    if (!(cfg_.rho > 0.0 && cfg_.rho < 1.0))
        throw ArgumentError("RmsProp: rho must be in (0, 1)");
    if (!(cfg_.eps > 0.0)) throw ArgumentError("RmsProp: eps must be positive");
    if (!(cfg_.lr > 0.0)) throw ArgumentError("RmsProp: lr must be positive");
}

void RmsProp::update(const std::string& name, Tensor2& param, const Tensor2& grad) {
    if (!param.same_shape(grad))
        throw ShapeError("RmsProp: grad shape mismatch for '" + name + "'");
    auto [it, inserted] = ms_.try_emplace(name, param.rows(), param.cols());
    Tensor2& ms = it->second;
    if (!inserted && !ms.same_shape(param))
        throw ShapeError("RmsProp: accumulator shape changed for '" + name + "'");

    for (std::size_t i = 0; i < param.size(); ++i) {
        double g = grad.at(i);
        if (!std::isfinite(g))
            throw NumericError("RmsProp: non-finite gradient in '" + name + "'");
        double m = cfg_.rho * ms.at(i) + (1.0 - cfg_.rho) * g * g;
        ms.at(i) = m;
        param.at(i) -= cfg_.lr * g / std::sqrt(m + cfg_.eps);
    }
}

const Tensor2* RmsProp::state(const std::string& name) const {
    auto it = ms_.find(name);
    return it == ms_.end() ? nullptr : &it->second;
}

} // namespace sbd::nn
