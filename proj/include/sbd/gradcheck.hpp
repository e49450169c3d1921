#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sbd/tensor.hpp"

namespace sbd::nn {

// A named parameter tensor paired with its analytic gradient. The caller
// fills `grad` (one analytic backward pass) before running the check.
struct ParamBlock {
    std::string name;
    Tensor2* value;
    const Tensor2* grad;
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_block;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central differences in double precision: perturbs every entry of every
// block by +-h, re-evaluates loss_fn, and reports the worst relative
// error |a - n| / max(|a|, |n|, 1e-8). loss_fn must be deterministic
// (dropout off) and must read the blocks' current values.
GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::vector<ParamBlock>& blocks, double h = 1e-5);

} // namespace sbd::nn
