#include "lfm/optics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lfm/error.hpp"

namespace lfm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double radial_polynomial(int n, int m, double rho) {
  double r = 0.0;
  for (int s = 0; s <= (n - m) / 2; ++s) {
    const double c = ((s % 2) ? -1.0 : 1.0) * factorial(n - s) /
                     (factorial(s) * factorial((n + m) / 2 - s) * factorial((n - m) / 2 - s));
    r += c * std::pow(rho, n - 2 * s);
  }
  return r;
}

struct SliceForward {
  std::vector<cplx> aperture_field;
  std::vector<cplx> image_field;
  std::vector<double> psf;
  double total = 0.0;
};

void check_pupil_grid(const ComplexPupil& pupil, const ZernikePhaseBasis& basis) {
  if (pupil.nx != basis.grid.nx || pupil.ny != basis.grid.ny)
    throw ValidationError("pupil grid " + std::to_string(pupil.nx) + "x" + std::to_string(pupil.ny) +
                          " does not match basis grid " + std::to_string(basis.grid.nx) + "x" +
                          std::to_string(basis.grid.ny));
}

void check_state(const ZernikePhaseBasis& basis, const ZernikeState& state) {
  if (state.size() != basis.size() || state.trainable.size() != state.coeffs.size())
    throw ValidationError("Zernike state has " + std::to_string(state.size()) + " coefficients, basis has " +
                          std::to_string(basis.size()));
}

SliceForward forward_slice(const ComplexPupil& pupil, std::span<const double> abe, const Fft2d& fft) {
  const int nx = pupil.nx, ny = pupil.ny;
  SliceForward out;
  out.aperture_field.resize(pupil.field.size());
  for (std::size_t p = 0; p < pupil.field.size(); ++p) {
    const cplx f = pupil.field[p];
    out.aperture_field[p] = (f == cplx{}) ? cplx{} : f * std::polar(1.0, -abe[p]);
  }
  auto shifted = ifftshift<cplx>(out.aperture_field, nx, ny);
  fft.forward(shifted);
  out.image_field = fftshift<cplx>(shifted, nx, ny);

  out.psf.resize(out.image_field.size());
  double total = 0.0;
  for (std::size_t p = 0; p < out.psf.size(); ++p) {
    const double a = std::norm(out.image_field[p]);
    out.psf[p] = a * a;
    total += out.psf[p];
  }
  if (!(total > 0.0)) throw ValidationError("empty aperture: PSF has zero energy");
  for (double& v : out.psf) v /= total;
  out.total = total;
  return out;
}

// Accumulates dL/dAbe for one slice into abe_grad.
void backward_slice(std::span<const cplx> aperture_field, std::span<const cplx> image_field,
                    std::span<const double> psf, double total, std::span<const double> upstream,
                    std::span<double> abe_grad, const Fft2d& fft) {
  const int nx = fft.nx(), ny = fft.ny();
  double mean_upstream = 0.0;
  for (std::size_t p = 0; p < upstream.size(); ++p) mean_upstream += upstream[p] * psf[p];

  // Gradient with respect to the image-plane field, as dL/dRe + i dL/dIm.
  std::vector<cplx> grad_image(image_field.size());
  for (std::size_t p = 0; p < grad_image.size(); ++p) {
    const double grad_q = (upstream[p] - mean_upstream) / total;
    const cplx h = image_field[p];
    grad_image[p] = (4.0 * grad_q * std::norm(h)) * h;
  }
  // Adjoint of fftshift . F . ifftshift.
  auto g = ifftshift<cplx>(grad_image, nx, ny);
  fft.inverse(g);
  const auto grad_aperture = fftshift<cplx>(g, nx, ny);

  for (std::size_t p = 0; p < grad_aperture.size(); ++p) {
    const cplx w = aperture_field[p];
    if (w == cplx{}) continue;
    abe_grad[p] += std::imag(std::conj(grad_aperture[p]) * w);
  }
}

std::vector<double> project_onto_basis(const ZernikePhaseBasis& basis, const ZernikeState& state,
                                       std::span<const double> abe_grad) {
  std::vector<double> grad(basis.size(), 0.0);
  for (int k = 0; k < basis.size(); ++k) {
    if (!state.trainable[k]) continue;
    const auto& map = basis.maps[k];
    double acc = 0.0;
    for (std::size_t p = 0; p < map.size(); ++p) acc += map[p] * abe_grad[p];
    grad[k] = acc;
  }
  return grad;
}

}  // namespace

void GridSpec::validate() const {
  if (nx < 8 || ny < 8 || nx % 2 || ny % 2)
    throw ValidationError("grid dimensions must be even and >= 8, got " + std::to_string(nx) + "x" +
                          std::to_string(ny));
  if (!(pixel_size > 0.0) || !(wavelength > 0.0)) throw ValidationError("pixel size and wavelength must be positive");
  if (!(numerical_aperture > 0.0) || !(numerical_aperture < refractive_index))
    throw ValidationError("numerical aperture must satisfy 0 < NA < n");
  if (cutoff_frequency() * pixel_size > 0.5)
    throw ValidationError("pupil disk exceeds the sampled band: need pixel_size <= wavelength / (2 NA)");
}

std::array<double, 2> GridSpec::frequency(int i, int j) const {
  return {(i - nx / 2) / (nx * pixel_size), (j - ny / 2) / (ny * pixel_size)};
}

std::array<double, 2> GridSpec::pupil_coords(int i, int j) const {
  const auto f = frequency(i, j);
  const double fc = cutoff_frequency();
  return {f[0] / fc, f[1] / fc};
}

void ViewSpec::validate() const {
  if (offsets.empty()) throw ValidationError("view spec has no views");
  if (!(sub_aperture_radius > 0.0) || sub_aperture_radius > 1.0)
    throw ValidationError("sub-aperture radius must be in (0, 1]");
  for (const auto& o : offsets) {
    if (std::hypot(o[0], o[1]) + sub_aperture_radius > 1.0 + 1e-12)
      throw ValidationError("sub-aperture at (" + std::to_string(o[0]) + ", " + std::to_string(o[1]) +
                            ") leaves the unit pupil");
  }
}

ViewSpec ViewSpec::rings(std::span<const int> counts, std::span<const double> radii, double sub_aperture_radius) {
  if (counts.size() != radii.size()) throw ValidationError("ring counts and radii differ in length");
  ViewSpec spec;
  spec.sub_aperture_radius = sub_aperture_radius;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    const int c = counts[r];
    if (radii[r] == 0.0) {
      for (int k = 0; k < c; ++k) spec.offsets.push_back({0.0, 0.0});
      continue;
    }
    // Stagger alternate rings by half a step so neighbours do not line up.
    const double phase = (r % 2 == 0) ? 0.5 : 0.0;
    for (int k = 0; k < c; ++k) {
      const double t = kTwoPi * (k + phase) / c;
      spec.offsets.push_back({radii[r] * std::cos(t), radii[r] * std::sin(t)});
    }
  }
  spec.validate();
  return spec;
}

ViewSpec ViewSpec::standard(int view_count) {
  if (view_count < 1) throw ValidationError("view count must be >= 1");
  if (view_count == 13) {
    const int c[] = {1, 4, 8};
    const double r[] = {0.0, 0.35, 0.65};
    return rings(c, r, 0.25);
  }
  if (view_count == 35) {
    const int c[] = {1, 6, 12, 16};
    const double r[] = {0.0, 0.27, 0.52, 0.77};
    return rings(c, r, 0.2);
  }
  if (view_count == 1) {
    const int c[] = {1};
    const double r[] = {0.0};
    return rings(c, r, 0.25);
  }
  const int c[] = {1, view_count - 1};
  const double r[] = {0.0, 0.55};
  return rings(c, r, 0.3);
}

ZernikeMode osa_mode(int j) {
  if (j < 0) throw ValidationError("Zernike index must be non-negative");
  int n = 0;
  while ((n + 1) * (n + 2) / 2 <= j) ++n;
  return {n, 2 * j - n * (n + 2)};
}

ZernikePhaseBasis zernike_basis(const GridSpec& grid, int order_count) {
  grid.validate();
  if (order_count < 1) throw ValidationError("Zernike order count must be >= 1");
  if (order_count > kMaxZernikeModes)
    throw ValidationError("Zernike order count " + std::to_string(order_count) + " exceeds " +
                          std::to_string(kMaxZernikeModes) + " (radial degree 10)");
  ZernikePhaseBasis basis;
  basis.grid = grid;
  basis.maps.assign(order_count, std::vector<double>(std::size_t(grid.nx) * grid.ny, 0.0));
  for (int j = 0; j < order_count; ++j) {
    const auto [n, m] = osa_mode(j);
    const int am = std::abs(m);
    const double norm = std::sqrt((m == 0 ? 1.0 : 2.0) * (n + 1));
    auto& map = basis.maps[j];
    for (int x = 0; x < grid.nx; ++x) {
      for (int y = 0; y < grid.ny; ++y) {
        const auto p = grid.pupil_coords(x, y);
        const double rho = std::hypot(p[0], p[1]);
        if (rho > 1.0) continue;
        const double theta = std::atan2(p[1], p[0]);
        const double angular = m > 0 ? std::cos(am * theta) : (m < 0 ? std::sin(am * theta) : 1.0);
        map[std::size_t(x) * grid.ny + y] = norm * radial_polynomial(n, am, rho) * angular;
      }
    }
  }
  return basis;
}

ZernikeState ZernikeState::zeros(int order_count) {
  ZernikeState s;
  s.coeffs.assign(order_count, 0.0);
  s.trainable.assign(order_count, true);
  if (order_count > 0) s.trainable[0] = false;
  return s;
}

std::vector<ComplexPupil> make_pupils(const GridSpec& grid, const ViewSpec& views, std::span<const double> depths) {
  grid.validate();
  views.validate();
  if (depths.empty()) throw ValidationError("depth list is empty");
  const double k_medium = grid.refractive_index / grid.wavelength;
  const double r2 = views.sub_aperture_radius * views.sub_aperture_radius;

  std::vector<ComplexPupil> pupils;
  pupils.reserve(views.count() * depths.size());
  for (int u = 0; u < views.count(); ++u) {
    const auto [du, dv] = views.offsets[u];
    for (double z : depths) {
      ComplexPupil pupil{u, z, grid.nx, grid.ny, std::vector<cplx>(std::size_t(grid.nx) * grid.ny)};
      for (int x = 0; x < grid.nx; ++x) {
        for (int y = 0; y < grid.ny; ++y) {
          const auto p = grid.pupil_coords(x, y);
          const double ex = p[0] - du, ey = p[1] - dv;
          if (ex * ex + ey * ey > r2) continue;
          const auto f = grid.frequency(x, y);
          const double kz = std::sqrt(std::max(0.0, k_medium * k_medium - f[0] * f[0] - f[1] * f[1]));
          pupil.field[std::size_t(x) * grid.ny + y] = std::polar(1.0, kTwoPi * z * kz);
        }
      }
      pupils.push_back(std::move(pupil));
    }
  }
  return pupils;
}

std::vector<double> aberration_phase(const ZernikePhaseBasis& basis, const ZernikeState& state) {
  check_state(basis, state);
  std::vector<double> abe(std::size_t(basis.grid.nx) * basis.grid.ny, 0.0);
  for (int k = 0; k < basis.size(); ++k) {
    const double c = state.coeffs[k];
    if (c == 0.0) continue;
    const auto& map = basis.maps[k];
    for (std::size_t p = 0; p < abe.size(); ++p) abe[p] += c * map[p];
  }
  return abe;
}

std::vector<double> synthesize_psf(const ComplexPupil& pupil, const ZernikePhaseBasis& basis,
                                   const ZernikeState& state) {
  check_pupil_grid(pupil, basis);
  const Fft2d fft(pupil.nx, pupil.ny);
  return forward_slice(pupil, aberration_phase(basis, state), fft).psf;
}

std::vector<double> psf_vjp(const ComplexPupil& pupil, const ZernikePhaseBasis& basis, const ZernikeState& state,
                            std::span<const double> upstream) {
  check_pupil_grid(pupil, basis);
  if (upstream.size() != pupil.field.size()) throw ValidationError("upstream gradient size mismatch");
  const Fft2d fft(pupil.nx, pupil.ny);
  const auto fwd = forward_slice(pupil, aberration_phase(basis, state), fft);
  std::vector<double> abe_grad(upstream.size(), 0.0);
  backward_slice(fwd.aperture_field, fwd.image_field, fwd.psf, fwd.total, upstream, abe_grad, fft);
  return project_onto_basis(basis, state, abe_grad);
}

PsfModel::PsfModel(std::vector<ComplexPupil> pupils, int views, int depths, ZernikePhaseBasis basis)
    : pupils_(std::move(pupils)),
      views_(views),
      depths_(depths),
      basis_(std::move(basis)),
      fft_(basis_.grid.nx, basis_.grid.ny) {
  if (views < 1 || depths < 1 || pupils_.size() != std::size_t(views) * depths)
    throw ValidationError("pupil list does not match " + std::to_string(views) + " views x " +
                          std::to_string(depths) + " depths");
  for (const auto& p : pupils_) check_pupil_grid(p, basis_);
}

PsfStack PsfModel::synthesize(const ZernikeState& state) {
  const auto abe = aberration_phase(basis_, state);
  const int nx = basis_.grid.nx, ny = basis_.grid.ny;
  PsfStack stack(views_, depths_, nx, ny);
  cache_.clear();
  cache_.reserve(pupils_.size());
  for (int u = 0; u < views_; ++u) {
    for (int z = 0; z < depths_; ++z) {
      auto fwd = forward_slice(pupils_[std::size_t(u) * depths_ + z], abe, fft_);
      std::copy(fwd.psf.begin(), fwd.psf.end(), stack.slice(u, z).begin());
      cache_.push_back({std::move(fwd.aperture_field), std::move(fwd.image_field), std::move(fwd.psf), fwd.total});
    }
  }
  last_state_ = state;
  return stack;
}

std::vector<double> PsfModel::vjp(const PsfStack& upstream) const {
  if (cache_.size() != pupils_.size()) throw ValidationError("PsfModel::vjp called before synthesize");
  if (upstream.views != views_ || upstream.depths != depths_ || upstream.nx != basis_.grid.nx ||
      upstream.ny != basis_.grid.ny)
    throw ValidationError("upstream PSF gradient has shape " + upstream.shape_str());
  std::vector<double> abe_grad(std::size_t(basis_.grid.nx) * basis_.grid.ny, 0.0);
  for (int u = 0; u < views_; ++u) {
    for (int z = 0; z < depths_; ++z) {
      const auto& c = cache_[std::size_t(u) * depths_ + z];
      backward_slice(c.aperture_field, c.image_field, c.psf, c.total, upstream.slice(u, z), abe_grad, fft_);
    }
  }
  return project_onto_basis(basis_, last_state_, abe_grad);
}

}  // namespace lfm
