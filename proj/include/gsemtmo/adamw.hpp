#pragma once

#include <vector>

#include "gsemtmo/tensor.hpp"

namespace gsemtmo {

struct AdamwConfig {
    double lr = 1e-3;
    double weight_decay = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment accumulators, one pair per parameter tensor.
struct AdamwState {
    std::vector<Tensor2> m;
    std::vector<Tensor2> v;
    long step = 0;

    static AdamwState like(const std::vector<Tensor2>& params);
};

// Decoupled weight decay: decay is applied to the parameters directly and
// never enters the moment estimates.
void adamw_step(std::vector<Tensor2>& params, const std::vector<Tensor2>& grads,
                AdamwState& state, const AdamwConfig& cfg);

}  // namespace gsemtmo
