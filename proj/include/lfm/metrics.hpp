#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lfm/arrays.hpp"

namespace lfm {

/// 10 log10(peak^2 / MSE). Peak defaults to the reference maximum.
/// Identical inputs give +infinity.
double psnr(const IntensityVolume& recon, const IntensityVolume& reference, std::optional<double> peak = std::nullopt);

/// Gaussian-window SSIM (11x11, sigma 1.5, K1 = 0.01, K2 = 0.03) over the valid
/// region of each z-slice, averaged over z. Dynamic range is the reference maximum
/// (1 when that is not positive).
double ssim(const IntensityVolume& recon, const IntensityVolume& reference);

/// Same as ssim() for one 2D (nx, ny) image pair with an explicit dynamic range.
double ssim_image(std::span<const double> a, std::span<const double> b, int nx, int ny, double data_range);

/// Spectral energy |F|^2 of an (nx, ny) image in radial bins of normalized frequency
/// r = |f| / Nyquist over [0, 1]; corner frequencies (r > 1) fall into the last bin.
std::vector<double> radial_band_energy(std::span<const double> image, int nx, int ny, int bins);

/// Spectral energy at normalized radial frequency >= cutoff, summed over the z-slices.
double high_band_energy(const IntensityVolume& vol, double cutoff = 0.5);

/// High-band share of total spectral energy of one image.
double high_band_ratio(std::span<const double> image, int nx, int ny, double cutoff = 0.5);

}  // namespace lfm
