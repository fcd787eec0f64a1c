#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grf/tensor.hpp"

namespace grf {

using NamedTensor = std::pair<std::string, TensorPtr>;

// Bias-corrected Adam over an ordered parameter group. Moment buffers are
// allocated lazily and stay aligned with the group by position.
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t t = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

// One in-place update step from the tensors' grad buffers. A non-finite
// gradient aborts with a NumericError naming the parameter.
void adam_step(std::vector<NamedTensor>& params, AdamState& state);

} // namespace grf
