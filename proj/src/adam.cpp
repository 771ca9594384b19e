#include "lfm/adam.hpp"

#include <cmath>
#include <string>

#include "lfm/error.hpp"

namespace lfm {

Adam::Adam(std::size_t size, double learning_rate, AdamSettings settings) : lr_(learning_rate), s_(settings) {
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  own_.m.assign(size, 0.0);
  own_.v.assign(size, 0.0);
}

void Adam::step(std::span<double> params, std::span<const double> grad, const std::vector<bool>* mask) {
  step(params, grad, own_, mask);
}

void Adam::step(std::span<double> params, std::span<const double> grad, AdamMoments& moments,
                const std::vector<bool>* mask) const {
  if (moments.empty() && moments.m.empty()) {
    moments.m.assign(params.size(), 0.0);
    moments.v.assign(params.size(), 0.0);
  }
  if (grad.size() != params.size() || moments.m.size() != params.size() || moments.v.size() != params.size())
    throw ValidationError("Adam: parameter size mismatch (" + std::to_string(params.size()) + " parameters, " +
                          std::to_string(grad.size()) + " gradients, " + std::to_string(moments.m.size()) +
                          " moments)");
  const long long t = ++moments.steps;
  const double c1 = 1.0 - std::pow(s_.beta1, double(t));
  const double c2 = 1.0 - std::pow(s_.beta2, double(t));
  auto& m = moments.m;
  auto& v = moments.v;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    m[i] = s_.beta1 * m[i] + (1.0 - s_.beta1) * grad[i];
    v[i] = s_.beta2 * v[i] + (1.0 - s_.beta2) * grad[i] * grad[i];
    params[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + s_.epsilon);
  }
}

}  // namespace lfm
