#pragma once

#include <string>
#include <string_view>

#include "lfm/arrays.hpp"

namespace lfm {

struct LossWeights {
  double alpha = 1e-3;  // FFT loss
  double beta = 1e-2;   // axial total variation
  double gamma = 1e-2;  // positivity
  void validate() const;
};

/// Spectral quantity compared by the FFT loss.
///   Complex:   (1/N) sum |F(sim) - F(meas)|^2
///   Amplitude: (1/N) sum (|F(sim)| - |F(meas)|)^2
enum class FftVariant { Complex, Amplitude };

FftVariant parse_fft_variant(std::string_view name);
std::string to_string(FftVariant v);

struct LightFieldLoss {
  double value = 0.0;
  LightFieldStack gradient;
};

struct VolumeLoss {
  double value = 0.0;
  IntensityVolume gradient;
};

/// Sum of squared differences over every (u, x, y).
LightFieldLoss mse_loss(const LightFieldStack& sim, const LightFieldStack& meas);

/// Per-view unnormalized 2D DFT; N is the pixel count of one view, which makes
/// the complex variant equal to mse_loss by Parseval.
LightFieldLoss fft_loss(const LightFieldStack& sim, const LightFieldStack& meas, FftVariant variant);

/// sum_{x,y} sum_{z>=1} |I(x,y,z) - I(x,y,z-1)|, with sign(0) = 0 in the gradient.
VolumeLoss ztv_loss(const IntensityVolume& vol);

/// sum max(0, -I).
VolumeLoss pos_loss(const IntensityVolume& vol);

struct LossReport {
  double mse = 0.0;
  double fft = 0.0;
  double ztv = 0.0;
  double pos = 0.0;
  double total = 0.0;
  long long pixel_count = 0;  // N used by the FFT loss
};

struct TotalLoss {
  LossReport report;
  LightFieldStack lf_gradient;     // from mse + alpha * fft
  IntensityVolume volume_gradient;  // from beta * ztv + gamma * pos
};

TotalLoss total_loss(const LightFieldStack& sim, const LightFieldStack& meas, const IntensityVolume& vol,
                     const LossWeights& weights, FftVariant variant);

/// "iteration,mse,fft,ztv,pos,total"
std::string loss_csv_header();
std::string loss_csv_row(int iteration, const LossReport& r);

}  // namespace lfm
