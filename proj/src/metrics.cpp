#include "lfm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lfm/error.hpp"
#include "lfm/fft.hpp"

namespace lfm {

double psnr(const IntensityVolume& recon, const IntensityVolume& reference, std::optional<double> peak) {
  if (recon.shape != reference.shape)
    throw ValidationError("metric shape mismatch: " + recon.shape.str() + " vs " + reference.shape.str());
  if (reference.data.empty()) throw ValidationError("empty volumes");
  const double p = peak ? *peak : *std::max_element(reference.data.begin(), reference.data.end());
  if (!(p > 0.0)) throw ValidationError("PSNR peak must be positive");
  double sse = 0.0;
  for (std::size_t i = 0; i < recon.data.size(); ++i) {
    const double d = recon.data[i] - reference.data[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(p * p / (sse / double(recon.data.size())));
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable valid-mode filter: output is (nx - 10) x (ny - 10).
std::vector<double> filter_valid(std::span<const double> img, int nx, int ny) {
  static const auto taps = gaussian_taps();
  const int ox = nx - kWindow + 1, oy = ny - kWindow + 1;
  std::vector<double> rows(std::size_t(ox) * ny, 0.0);
  for (int x = 0; x < ox; ++x)
    for (int y = 0; y < ny; ++y) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * img[std::size_t(x + k) * ny + y];
      rows[std::size_t(x) * ny + y] = acc;
    }
  std::vector<double> out(std::size_t(ox) * oy, 0.0);
  for (int x = 0; x < ox; ++x)
    for (int y = 0; y < oy; ++y) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * rows[std::size_t(x) * ny + y + k];
      out[std::size_t(x) * oy + y] = acc;
    }
  return out;
}

}  // namespace

double ssim_image(std::span<const double> a, std::span<const double> b, int nx, int ny, double data_range) {
  if (nx < kWindow || ny < kWindow) throw ValidationError("SSIM needs images of at least 11x11");
  if (a.size() != std::size_t(nx) * ny || b.size() != a.size()) throw ValidationError("SSIM image size mismatch");
  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto ma = filter_valid(a, nx, ny), mb = filter_valid(b, nx, ny);
  const auto maa = filter_valid(aa, nx, ny), mbb = filter_valid(bb, nx, ny), mab = filter_valid(ab, nx, ny);
  double total = 0.0;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    const double va = maa[i] - ma[i] * ma[i];
    const double vb = mbb[i] - mb[i] * mb[i];
    const double cov = mab[i] - ma[i] * mb[i];
    total += ((2.0 * ma[i] * mb[i] + c1) * (2.0 * cov + c2)) /
             ((ma[i] * ma[i] + mb[i] * mb[i] + c1) * (va + vb + c2));
  }
  return total / double(ma.size());
}

double ssim(const IntensityVolume& recon, const IntensityVolume& reference) {
  if (recon.shape != reference.shape)
    throw ValidationError("metric shape mismatch: " + recon.shape.str() + " vs " + reference.shape.str());
  const auto& s = reference.shape;
  if (s.nx < kWindow || s.ny < kWindow) throw ValidationError("SSIM needs lateral size of at least 11x11");
  double range = *std::max_element(reference.data.begin(), reference.data.end());
  if (!(range > 0.0)) range = 1.0;
  double total = 0.0;
  for (int z = 0; z < s.nz; ++z) total += ssim_image(recon.slice(z), reference.slice(z), s.nx, s.ny, range);
  return total / s.nz;
}

std::vector<double> radial_band_energy(std::span<const double> image, int nx, int ny, int bins) {
  if (bins < 1) throw ValidationError("need at least one radial bin");
  if (image.size() != std::size_t(nx) * ny) throw ValidationError("image size mismatch");
  auto spec = to_complex(image);
  Fft2d(nx, ny).forward(spec);
  std::vector<double> energy(bins, 0.0);
  for (int kx = 0; kx < nx; ++kx) {
    const double fx = double(kx <= nx / 2 ? kx : kx - nx) / nx;
    for (int ky = 0; ky < ny; ++ky) {
      const double fy = double(ky <= ny / 2 ? ky : ky - ny) / ny;
      const double r = std::hypot(fx, fy) / 0.5;
      const int bin = std::min(bins - 1, static_cast<int>(r * bins));
      energy[bin] += std::norm(spec[std::size_t(kx) * ny + ky]);
    }
  }
  return energy;
}

namespace {

double band_energy_above(std::span<const double> image, int nx, int ny, double cutoff, double* total) {
  auto spec = to_complex(image);
  Fft2d(nx, ny).forward(spec);
  double high = 0.0, all = 0.0;
  for (int kx = 0; kx < nx; ++kx) {
    const double fx = double(kx <= nx / 2 ? kx : kx - nx) / nx;
    for (int ky = 0; ky < ny; ++ky) {
      const double fy = double(ky <= ny / 2 ? ky : ky - ny) / ny;
      const double e = std::norm(spec[std::size_t(kx) * ny + ky]);
      all += e;
      if (std::hypot(fx, fy) / 0.5 >= cutoff) high += e;
    }
  }
  if (total) *total = all;
  return high;
}

}  // namespace

double high_band_energy(const IntensityVolume& vol, double cutoff) {
  double e = 0.0;
  for (int z = 0; z < vol.shape.nz; ++z) e += band_energy_above(vol.slice(z), vol.shape.nx, vol.shape.ny, cutoff, nullptr);
  return e;
}

double high_band_ratio(std::span<const double> image, int nx, int ny, double cutoff) {
  if (image.size() != std::size_t(nx) * ny) throw ValidationError("image size mismatch");
  double total = 0.0;
  const double high = band_energy_above(image, nx, ny, cutoff, &total);
  return total > 0.0 ? high / total : 0.0;
}

}  // namespace lfm
