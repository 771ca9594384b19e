#pragma once

#include <array>
#include <span>
#include <vector>

#include "lfm/arrays.hpp"
#include "lfm/fft.hpp"

namespace lfm {

/// Sampling and optical constants shared by the pupil and image grids.
///
/// The pupil grid is the DFT dual of the (nx, ny) image grid: pupil pixel (i, j)
/// sits at spatial frequency ((i - nx/2) / (nx * pixel_size), (j - ny/2) / (ny * pixel_size)).
/// Normalized pupil coordinates divide that frequency by the cutoff NA / wavelength,
/// so the objective aperture is the unit disk.
struct GridSpec {
  int nx = 64;
  int ny = 64;
  double pixel_size = 0.3;          // micrometers
  double wavelength = 0.92;         // micrometers
  double numerical_aperture = 1.05;
  double refractive_index = 1.33;

  /// Throws ValidationError when a field is out of range or the aperture does not fit the grid.
  void validate() const;
  double cutoff_frequency() const { return numerical_aperture / wavelength; }
  /// Normalized pupil coordinates of pupil pixel (i, j).
  std::array<double, 2> pupil_coords(int i, int j) const;
  /// Physical spatial frequency (cycles/um) of pupil pixel (i, j).
  std::array<double, 2> frequency(int i, int j) const;
  bool operator==(const GridSpec&) const = default;
};

/// Angular views as sub-apertures of the unit pupil.
struct ViewSpec {
  std::vector<std::array<double, 2>> offsets;  // (du, dv), normalized pupil units
  double sub_aperture_radius = 0.25;

  int count() const { return static_cast<int>(offsets.size()); }
  void validate() const;

  /// Concentric rings of sub-apertures: counts[r] views evenly spaced at radii[r].
  static ViewSpec rings(std::span<const int> counts, std::span<const double> radii, double sub_aperture_radius);
  /// Preset layouts. 13 and 35 views use one centre view plus two or three rings;
  /// any other count puts U - 1 views on a single ring around a centre view.
  static ViewSpec standard(int view_count);
};

/// OSA/ANSI single index j -> (radial degree n, azimuthal frequency m).
struct ZernikeMode {
  int n = 0;
  int m = 0;
};
ZernikeMode osa_mode(int j);
constexpr int kMaxZernikeModes = 66;  // radial degree <= 10

/// Unit-RMS Zernike phase maps over the pupil grid, zero outside the unit disk.
struct ZernikePhaseBasis {
  GridSpec grid;
  std::vector<std::vector<double>> maps;

  int size() const { return static_cast<int>(maps.size()); }
};

ZernikePhaseBasis zernike_basis(const GridSpec& grid, int order_count);

/// Learnable aberration coefficients in radians (RMS wavefront phase per mode).
struct ZernikeState {
  std::vector<double> coeffs;
  std::vector<bool> trainable;

  /// All-zero coefficients; every mode trainable except piston.
  static ZernikeState zeros(int order_count);
  int size() const { return static_cast<int>(coeffs.size()); }
};

/// Pupil field for one (view, depth): sub-aperture support times defocus phase.
struct ComplexPupil {
  int view = 0;
  double depth = 0.0;  // micrometers from the focal plane
  int nx = 0;
  int ny = 0;
  std::vector<cplx> field;
};

/// Pupils ordered view-major: index u * depths.size() + z.
std::vector<ComplexPupil> make_pupils(const GridSpec& grid, const ViewSpec& views, std::span<const double> depths);

/// Abe = sum_k Z_k * P_k over the pupil grid.
std::vector<double> aberration_phase(const ZernikePhaseBasis& basis, const ZernikeState& state);

/// Two-photon PSF |FFT(pupil * exp(-i Abe))|^4, centred and normalized to unit sum.
std::vector<double> synthesize_psf(const ComplexPupil& pupil, const ZernikePhaseBasis& basis,
                                   const ZernikeState& state);

/// Gradient of <upstream, synthesize_psf(...)> with respect to the coefficients.
/// Masked (non-trainable) entries are returned as exactly zero.
std::vector<double> psf_vjp(const ComplexPupil& pupil, const ZernikePhaseBasis& basis, const ZernikeState& state,
                            std::span<const double> upstream);

/// Batched PSF synthesis over every (view, depth) pupil with a shared aberration.
/// synthesize() caches the image-plane fields it needs for the next vjp().
class PsfModel {
 public:
  PsfModel(std::vector<ComplexPupil> pupils, int views, int depths, ZernikePhaseBasis basis);

  int views() const { return views_; }
  int depths() const { return depths_; }
  const ZernikePhaseBasis& basis() const { return basis_; }
  const std::vector<ComplexPupil>& pupils() const { return pupils_; }

  PsfStack synthesize(const ZernikeState& state);
  /// Requires a preceding synthesize(); returns dL/dP for upstream = dL/dPSF.
  std::vector<double> vjp(const PsfStack& upstream) const;

 private:
  struct SliceCache {
    std::vector<cplx> aperture_field;  // pupil * exp(-i Abe)
    std::vector<cplx> image_field;     // centred FFT of aperture_field
    std::vector<double> psf;
    double total = 0.0;
  };

  std::vector<ComplexPupil> pupils_;
  int views_;
  int depths_;
  ZernikePhaseBasis basis_;
  Fft2d fft_;
  ZernikeState last_state_;
  std::vector<SliceCache> cache_;
};

}  // namespace lfm
