#include <algorithm>
#include <cmath>
#include <numeric>

#include "lfm/error.hpp"
#include "lfm/recon.hpp"

namespace lfm {

IntensityVolume rld(const LightFieldStack& measurement, const PsfStack& psfs, const RldOptions& options) {
  if (options.iterations < 0) throw ValidationError("RLD iteration count must be non-negative");
  for (double v : measurement.data) {
    if (!std::isfinite(v)) throw ValidationError("measurement contains non-finite values");
    if (v < 0.0) throw ValidationError("RLD requires non-negative measurements");
  }
  Projector op(psfs);
  if (measurement.views != psfs.views || measurement.nx != psfs.nx || measurement.ny != psfs.ny)
    throw ValidationError("measurement shape " + measurement.shape_str() + " incompatible with PSF stack " +
                          psfs.shape_str());
  const VolumeShape shape{psfs.nx, psfs.ny, psfs.depths};
  const double eps = options.epsilon;

  IntensityVolume estimate;
  if (options.init) {
    estimate = *options.init;
    if (estimate.shape != shape) throw ValidationError("RLD init shape " + estimate.shape.str() + " != " + shape.str());
    for (double v : estimate.data)
      if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("RLD init must be strictly positive");
  } else {
    const double flux = std::accumulate(measurement.data.begin(), measurement.data.end(), 0.0);
    const double level = flux > 0.0 ? flux / (double(psfs.views) * double(shape.size())) : 1.0;
    estimate = IntensityVolume(shape, level);
  }

  auto normalizer = op.adjoint(LightFieldStack(measurement.views, measurement.nx, measurement.ny, 1.0));
  for (double& v : normalizer.data) v = std::max(v, eps);

  LightFieldStack ratio(measurement.views, measurement.nx, measurement.ny);
  for (int it = 0; it < options.iterations; ++it) {
    const auto predicted = op.forward(estimate);
    for (std::size_t i = 0; i < ratio.data.size(); ++i)
      ratio.data[i] = measurement.data[i] / std::max(predicted.data[i], eps);
    const auto correction = op.adjoint(ratio);
    for (std::size_t i = 0; i < estimate.data.size(); ++i)
      estimate.data[i] = std::max(0.0, estimate.data[i] * correction.data[i] / normalizer.data[i]);
    if (options.observer) options.observer(it, estimate);
  }
  return estimate;
}

}  // namespace lfm
