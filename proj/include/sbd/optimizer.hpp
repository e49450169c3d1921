#pragma once

#include <string>
#include <unordered_map>

#include "sbd/tensor.hpp"

namespace sbd::nn {

struct RmsPropConfig {
    double lr = 1e-3;
    double rho = 0.9;
    double eps = 1e-8;
};

// RMSProp: ms <- rho*ms + (1-rho)*g^2; theta <- theta - lr*g/sqrt(ms+eps).
// Mean-square accumulators are kept per parameter name and created lazily
// at zero on first use.
class RmsProp {
public:
    explicit RmsProp(RmsPropConfig cfg = {});

    void update(const std::string& name, Tensor2& param, const Tensor2& grad);

    const RmsPropConfig& config() const { return cfg_; }
    const Tensor2* state(const std::string& name) const;
    void reset() { ms_.clear(); }

private:
    RmsPropConfig cfg_;
    std::unordered_map<std::string, Tensor2> ms_;
};

} // namespace sbd::nn
