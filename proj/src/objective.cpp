#include "lfm/objective.hpp"

#include <cmath>
#include <cstdio>

#include "lfm/error.hpp"
#include "lfm/fft.hpp"

namespace lfm {

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0))
    throw ValidationError("loss weights must be non-negative");
}

FftVariant parse_fft_variant(std::string_view name) {
  if (name == "complex") return FftVariant::Complex;
  if (name == "amplitude") return FftVariant::Amplitude;
  throw ValidationError("unknown FFT loss variant '" + std::string(name) + "' (expected complex|amplitude)");
}

std::string to_string(FftVariant v) { return v == FftVariant::Complex ? "complex" : "amplitude"; }

namespace {

void check_same(const LightFieldStack& a, const LightFieldStack& b) {
  if (a.views != b.views || a.nx != b.nx || a.ny != b.ny || a.data.size() != b.data.size())
    throw ValidationError("light field shapes differ: " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace

LightFieldLoss mse_loss(const LightFieldStack& sim, const LightFieldStack& meas) {
  check_same(sim, meas);
  LightFieldLoss out{0.0, LightFieldStack(sim.views, sim.nx, sim.ny)};
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    const double d = sim.data[i] - meas.data[i];
    out.value += d * d;
    out.gradient.data[i] = 2.0 * d;
  }
  return out;
}

LightFieldLoss fft_loss(const LightFieldStack& sim, const LightFieldStack& meas, FftVariant variant) {
  check_same(sim, meas);
  const std::size_t n = sim.view_size();
  const double inv_n = 1.0 / double(n);
  const Fft2d fft(sim.nx, sim.ny);
  LightFieldLoss out{0.0, LightFieldStack(sim.views, sim.nx, sim.ny)};
  std::vector<cplx> grad(n);
  for (int u = 0; u < sim.views; ++u) {
    auto s = to_complex(sim.view(u));
    auto m = to_complex(meas.view(u));
    fft.forward(s);
    fft.forward(m);
    for (std::size_t k = 0; k < n; ++k) {
      if (variant == FftVariant::Complex) {
        const cplx d = s[k] - m[k];
        out.value += std::norm(d) * inv_n;
        grad[k] = 2.0 * inv_n * d;
      } else {
        const double as = std::abs(s[k]);
        const double d = as - std::abs(m[k]);
        out.value += d * d * inv_n;
        grad[k] = as > 0.0 ? (2.0 * inv_n * d / as) * s[k] : cplx{};
      }
    }
    // Real input: dL/ds = Re(F^H grad).
    fft.inverse(grad);
    auto g = out.gradient.view(u);
    for (std::size_t p = 0; p < n; ++p) g[p] = grad[p].real();
  }
  return out;
}

VolumeLoss ztv_loss(const IntensityVolume& vol) {
  const auto& s = vol.shape;
  if (s.nz < 2) throw ValidationError("axial TV needs at least 2 depth planes, got " + std::to_string(s.nz));
  VolumeLoss out{0.0, IntensityVolume(s)};
  for (int x = 0; x < s.nx; ++x) {
    for (int y = 0; y < s.ny; ++y) {
      for (int z = 1; z < s.nz; ++z) {
        const double d = vol.at(x, y, z) - vol.at(x, y, z - 1);
        out.value += std::abs(d);
        const double sg = (d > 0.0) - (d < 0.0);
        out.gradient.at(x, y, z) += sg;
        out.gradient.at(x, y, z - 1) -= sg;
      }
    }
  }
  return out;
}

VolumeLoss pos_loss(const IntensityVolume& vol) {
  VolumeLoss out{0.0, IntensityVolume(vol.shape)};
  for (std::size_t i = 0; i < vol.data.size(); ++i) {
    if (vol.data[i] < 0.0) {
      out.value -= vol.data[i];
      out.gradient.data[i] = -1.0;
    }
  }
  return out;
}

TotalLoss total_loss(const LightFieldStack& sim, const LightFieldStack& meas, const IntensityVolume& vol,
                     const LossWeights& weights, FftVariant variant) {
  weights.validate();
  auto mse = mse_loss(sim, meas);
  TotalLoss out;
  out.report.mse = mse.value;
  out.report.pixel_count = static_cast<long long>(sim.view_size());
  out.lf_gradient = std::move(mse.gradient);
  if (weights.alpha > 0.0) {
    const auto fft = fft_loss(sim, meas, variant);
    out.report.fft = fft.value;
    for (std::size_t i = 0; i < out.lf_gradient.data.size(); ++i)
      out.lf_gradient.data[i] += weights.alpha * fft.gradient.data[i];
  } else {
    out.report.fft = fft_loss(sim, meas, variant).value;
  }

  out.volume_gradient = IntensityVolume(vol.shape);
  out.volume_gradient.voxel_size = vol.voxel_size;
  if (vol.shape.nz >= 2) {
    const auto ztv = ztv_loss(vol);
    out.report.ztv = ztv.value;
    for (std::size_t i = 0; i < vol.data.size(); ++i) out.volume_gradient.data[i] += weights.beta * ztv.gradient.data[i];
  }
  const auto pos = pos_loss(vol);
  out.report.pos = pos.value;
  for (std::size_t i = 0; i < vol.data.size(); ++i) out.volume_gradient.data[i] += weights.gamma * pos.gradient.data[i];

  out.report.total = out.report.mse + weights.alpha * out.report.fft + weights.beta * out.report.ztv +
                     weights.gamma * out.report.pos;
  return out;
}

std::string loss_csv_header() { return "iteration,mse,fft,ztv,pos,total"; }

std::string loss_csv_row(int iteration, const LossReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g", iteration, r.mse, r.fft, r.ztv, r.pos, r.total);
  return buf;
}

}  // namespace lfm
