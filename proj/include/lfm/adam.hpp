#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lfm {

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment estimates plus the step count; enough to resume.
struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
  long long steps = 0;

  bool empty() const { return steps == 0; }
};

/// Bias-corrected Adam over one flat parameter block.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, double learning_rate, AdamSettings settings = {});

  /// Entries with mask[i] == false are left untouched (moments too).
  void step(std::span<double> params, std::span<const double> grad, const std::vector<bool>* mask = nullptr);
  /// Same update, on moments held by the caller. Empty moments are sized on first use.
  void step(std::span<double> params, std::span<const double> grad, AdamMoments& moments,
            const std::vector<bool>* mask = nullptr) const;
  long long steps() const { return own_.steps; }
  double learning_rate() const { return lr_; }
  const AdamMoments& moments() const { return own_; }

 private:
  double lr_ = 0.0;
  AdamSettings s_;
  AdamMoments own_;
};

}  // namespace lfm
