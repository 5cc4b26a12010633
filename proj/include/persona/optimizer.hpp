#pragma once

#include <cstdint>

#include "persona/model.hpp"

namespace persona {

struct AdamState {
  Gradients first_moment;
  Gradients second_moment;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const ModelParams& params);

// Bias-corrected Adam. Head tensors use lr_head, GNN tensors (layers and
// projection) use lr_gnn.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr_head,
               double lr_gnn);

}  // namespace persona
