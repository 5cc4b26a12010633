#include "persona/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace persona {

namespace {

std::vector<std::span<double>> tensors_of(Gradients& g) {
  std::vector<std::span<double>> out;
  for_each_tensor(g, [&](ParamGroup, std::string_view, std::span<double> t) { out.push_back(t); });
  return out;
}

std::vector<std::span<const double>> tensors_of(const Gradients& g) {
  std::vector<std::span<const double>> out;
  for_each_tensor(g,
                  [&](ParamGroup, std::string_view, std::span<const double> t) { out.push_back(t); });
  return out;
}

}  // namespace

AdamState make_adam_state(const ModelParams& params) {
  AdamState s;
  s.first_moment = zeros_like(params);
  s.second_moment = zeros_like(params);
  return s;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr_head,
               double lr_gnn) {
  const auto g = tensors_of(grads);
  const auto m = tensors_of(state.first_moment);
  const auto v = tensors_of(state.second_moment);
  std::vector<std::span<double>> p;
  std::vector<ParamGroup> groups;
  for_each_tensor(params, [&](ParamGroup group, std::string_view, std::span<double> t) {
    p.push_back(t);
    groups.push_back(group);
  });
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw std::invalid_argument("adam_step: parameter layout mismatch");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (g[k].size() != p[k].size() || m[k].size() != p[k].size()) {
      throw std::invalid_argument("adam_step: tensor shape mismatch");
    }
    const double lr = groups[k] == ParamGroup::Head ? lr_head : lr_gnn;
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      m[k][i] = state.beta1 * m[k][i] + (1.0 - state.beta1) * g[k][i];
      v[k][i] = state.beta2 * v[k][i] + (1.0 - state.beta2) * g[k][i] * g[k][i];
      const double m_hat = m[k][i] / correction1;
      const double v_hat = v[k][i] / correction2;
      p[k][i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace persona
