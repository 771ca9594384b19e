#pragma once

#include <vector>

#include "lfm/arrays.hpp"
#include "lfm/fft.hpp"

namespace lfm {

/// LF_u = sum_z I_z (*) PSF_{u,z}, circular same-size convolution with the
/// PSF origin at pixel (nx/2, ny/2).
LightFieldStack project(const IntensityVolume& vol, const PsfStack& psfs);

/// vol_z = sum_u LF_u correlated with PSF_{u,z}; the exact adjoint of project().
IntensityVolume project_adjoint(const LightFieldStack& lf, const PsfStack& psfs);

/// Block-average pooling by an integer factor along every axis.
IntensityVolume downsample(const IntensityVolume& super_vol, int scale);

/// Transpose of downsample(): each value spread over its scale^3 block, divided by scale^3.
IntensityVolume downsample_vjp(const IntensityVolume& upstream, int scale);

/// Reusable FFT convolution operator for one PSF stack.
///
/// forward() keeps the spectra of the last volume so psf_gradient() can
/// return dL/dPSF without re-transforming it.
class Projector {
 public:
  explicit Projector(const PsfStack& psfs);

  void set_psfs(const PsfStack& psfs);
  int views() const { return views_; }
  int depths() const { return depths_; }

  LightFieldStack forward(const IntensityVolume& vol);
  IntensityVolume adjoint(const LightFieldStack& lf) const;
  /// Gradient of <upstream, forward(vol)> with respect to every PSF entry,
  /// evaluated at the volume passed to the most recent forward().
  PsfStack psf_gradient(const LightFieldStack& upstream) const;

 private:
  void check_volume(const IntensityVolume& vol) const;
  void check_light_field(const LightFieldStack& lf) const;

  int views_ = 0;
  int depths_ = 0;
  int nx_ = 0;
  int ny_ = 0;
  Fft2d fft_;
  std::vector<std::vector<cplx>> kernel_spectra_;  // [u * depths + z]
  std::vector<std::vector<cplx>> volume_spectra_;  // [z], from the last forward()
};

}  // namespace lfm
