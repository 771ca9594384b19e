#include "lfm/forward.hpp"

#include "lfm/error.hpp"

namespace lfm {

Projector::Projector(const PsfStack& psfs) : fft_(std::max(psfs.nx, 1), std::max(psfs.ny, 1)) { set_psfs(psfs); }

void Projector::set_psfs(const PsfStack& psfs) {
  if (psfs.views < 1 || psfs.depths < 1 || psfs.nx < 1 || psfs.ny < 1)
    throw ValidationError("PSF stack " + psfs.shape_str() + " is empty");
  if (psfs.nx != fft_.nx() || psfs.ny != fft_.ny()) fft_ = Fft2d(psfs.nx, psfs.ny);
  views_ = psfs.views;
  depths_ = psfs.depths;
  nx_ = psfs.nx;
  ny_ = psfs.ny;
  kernel_spectra_.resize(std::size_t(views_) * depths_);
  for (int u = 0; u < views_; ++u) {
    for (int z = 0; z < depths_; ++z) {
      auto& k = kernel_spectra_[std::size_t(u) * depths_ + z];
      k = to_complex(ifftshift<double>(psfs.slice(u, z), nx_, ny_));
      fft_.forward(k);
    }
  }
  volume_spectra_.clear();
}

void Projector::check_volume(const IntensityVolume& vol) const {
  if (vol.shape.nx != nx_ || vol.shape.ny != ny_ || vol.shape.nz != depths_)
    throw ValidationError("volume shape " + vol.shape.str() + " incompatible with PSF stack (" +
                          std::to_string(views_) + ", " + std::to_string(depths_) + ", " + std::to_string(nx_) +
                          ", " + std::to_string(ny_) + ")");
}

void Projector::check_light_field(const LightFieldStack& lf) const {
  if (lf.views != views_ || lf.nx != nx_ || lf.ny != ny_)
    throw ValidationError("light field shape " + lf.shape_str() + " incompatible with PSF stack (" +
                          std::to_string(views_) + ", " + std::to_string(depths_) + ", " + std::to_string(nx_) +
                          ", " + std::to_string(ny_) + ")");
}

LightFieldStack Projector::forward(const IntensityVolume& vol) {
  check_volume(vol);
  const std::size_t n = std::size_t(nx_) * ny_;
  volume_spectra_.resize(depths_);
  for (int z = 0; z < depths_; ++z) {
    volume_spectra_[z] = to_complex(vol.slice(z));
    fft_.forward(volume_spectra_[z]);
  }
  LightFieldStack lf(views_, nx_, ny_);
  std::vector<cplx> acc(n);
  for (int u = 0; u < views_; ++u) {
    std::fill(acc.begin(), acc.end(), cplx{});
    for (int z = 0; z < depths_; ++z) {
      const auto& k = kernel_spectra_[std::size_t(u) * depths_ + z];
      const auto& v = volume_spectra_[z];
      for (std::size_t p = 0; p < n; ++p) acc[p] += v[p] * k[p];
    }
    fft_.inverse(acc);
    auto out = lf.view(u);
    for (std::size_t p = 0; p < n; ++p) out[p] = acc[p].real() / double(n);
  }
  return lf;
}

IntensityVolume Projector::adjoint(const LightFieldStack& lf) const {
  check_light_field(lf);
  const std::size_t n = std::size_t(nx_) * ny_;
  std::vector<std::vector<cplx>> view_spectra(views_);
  for (int u = 0; u < views_; ++u) {
    view_spectra[u] = to_complex(lf.view(u));
    fft_.forward(view_spectra[u]);
  }
  IntensityVolume vol({nx_, ny_, depths_});
  std::vector<cplx> acc(n);
  std::vector<double> slice(n);
  for (int z = 0; z < depths_; ++z) {
    std::fill(acc.begin(), acc.end(), cplx{});
    for (int u = 0; u < views_; ++u) {
      const auto& k = kernel_spectra_[std::size_t(u) * depths_ + z];
      const auto& g = view_spectra[u];
      for (std::size_t p = 0; p < n; ++p) acc[p] += g[p] * std::conj(k[p]);
    }
    fft_.inverse(acc);
    for (std::size_t p = 0; p < n; ++p) slice[p] = acc[p].real() / double(n);
    vol.set_slice(z, slice);
  }
  return vol;
}

PsfStack Projector::psf_gradient(const LightFieldStack& upstream) const {
  check_light_field(upstream);
  if (volume_spectra_.size() != std::size_t(depths_))
    throw ValidationError("Projector::psf_gradient called before forward");
  const std::size_t n = std::size_t(nx_) * ny_;
  PsfStack grad(views_, depths_, nx_, ny_);
  std::vector<cplx> acc(n);
  std::vector<double> kernel_grad(n);
  for (int u = 0; u < views_; ++u) {
    auto g = to_complex(upstream.view(u));
    fft_.forward(g);
    for (int z = 0; z < depths_; ++z) {
      const auto& v = volume_spectra_[z];
      for (std::size_t p = 0; p < n; ++p) acc[p] = g[p] * std::conj(v[p]);
      fft_.inverse(acc);
      for (std::size_t p = 0; p < n; ++p) kernel_grad[p] = acc[p].real() / double(n);
      // The kernel is the PSF shifted by -(nx/2, ny/2); undo that permutation.
      circshift<double>(kernel_grad, grad.slice(u, z), nx_, ny_, nx_ / 2, ny_ / 2);
    }
  }
  return grad;
}

LightFieldStack project(const IntensityVolume& vol, const PsfStack& psfs) {
  Projector op(psfs);
  return op.forward(vol);
}

IntensityVolume project_adjoint(const LightFieldStack& lf, const PsfStack& psfs) {
  const Projector op(psfs);
  return op.adjoint(lf);
}

IntensityVolume downsample(const IntensityVolume& super_vol, int scale) {
  const auto& s = super_vol.shape;
  if (scale < 1) throw ValidationError("downsample scale must be >= 1");
  if (s.nx % scale || s.ny % scale || s.nz % scale)
    throw ValidationError("volume shape " + s.str() + " is not divisible by scale " + std::to_string(scale));
  IntensityVolume out({s.nx / scale, s.ny / scale, s.nz / scale});
  for (int i = 0; i < 3; ++i) out.voxel_size[i] = super_vol.voxel_size[i] * scale;
  const double inv = 1.0 / (double(scale) * scale * scale);
  for (int x = 0; x < s.nx; ++x)
    for (int y = 0; y < s.ny; ++y)
      for (int z = 0; z < s.nz; ++z) out.at(x / scale, y / scale, z / scale) += super_vol.at(x, y, z) * inv;
  return out;
}

IntensityVolume downsample_vjp(const IntensityVolume& upstream, int scale) {
  if (scale < 1) throw ValidationError("downsample scale must be >= 1");
  const auto& s = upstream.shape;
  IntensityVolume out({s.nx * scale, s.ny * scale, s.nz * scale});
  for (int i = 0; i < 3; ++i) out.voxel_size[i] = upstream.voxel_size[i] / scale;
  const double inv = 1.0 / (double(scale) * scale * scale);
  for (int x = 0; x < out.shape.nx; ++x)
    for (int y = 0; y < out.shape.ny; ++y)
      for (int z = 0; z < out.shape.nz; ++z) out.at(x, y, z) = upstream.at(x / scale, y / scale, z / scale) * inv;
  return out;
}

}  // namespace lfm
