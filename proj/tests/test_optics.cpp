#include <numbers>
#include <random>

#include "doctest.h"
#include "lfm/error.hpp"
#include "lfm/fft.hpp"
#include "lfm/optics.hpp"
#include "support.hpp"

using namespace lfm;

namespace {

GridSpec grid_of(int n, double pixel = 0.3) {
  GridSpec g;
  g.nx = g.ny = n;
  g.pixel_size = pixel;
  return g;
}

ComplexPupil single_pupil(const GridSpec& g, std::array<double, 2> offset, double radius, double z) {
  ViewSpec v;
  v.offsets = {offset};
  v.sub_aperture_radius = radius;
  const double depths[] = {z};
  return make_pupils(g, v, depths).front();
}

ZernikeState random_state(int k, std::mt19937_64& rng, double amp) {
  auto s = ZernikeState::zeros(k);
  for (double& c : s.coeffs) c = amp * std::uniform_real_distribution<double>(-1, 1)(rng);
  return s;
}

}  // namespace

TEST_CASE("OSA indices map to (n, m)") {
  const int expect[][2] = {{0, 0}, {1, -1}, {1, 1}, {2, -2}, {2, 0}, {2, 2}, {3, -3}, {3, -1}, {3, 1}, {3, 3}, {4, -4}};
  for (int j = 0; j < 11; ++j) {
    CHECK(osa_mode(j).n == expect[j][0]);
    CHECK(osa_mode(j).m == expect[j][1]);
  }
  CHECK(osa_mode(65).n == 10);
  CHECK(osa_mode(65).m == 10);
}

TEST_CASE("Zernike maps follow their closed forms") {
  const auto g = grid_of(64);
  const auto basis = zernike_basis(g, 5);
  for (int x = 0; x < 64; ++x)
    for (int y = 0; y < 64; ++y) {
      const auto p = g.pupil_coords(x, y);
      const double r = std::hypot(p[0], p[1]);
      const std::size_t i = std::size_t(x) * 64 + y;
      if (r > 1.0) {
        for (const auto& m : basis.maps) CHECK(m[i] == 0.0);
        continue;
      }
      CHECK(basis.maps[0][i] == 1.0);
      CHECK(basis.maps[1][i] == doctest::Approx(2.0 * p[1]).epsilon(1e-12));
      CHECK(basis.maps[2][i] == doctest::Approx(2.0 * p[0]).epsilon(1e-12));
      CHECK(basis.maps[3][i] == doctest::Approx(std::sqrt(6.0) * 2.0 * p[0] * p[1]).epsilon(1e-12));
      CHECK(basis.maps[4][i] == doctest::Approx(std::sqrt(3.0) * (2.0 * r * r - 1.0)).epsilon(1e-12));
    }
  // Tilt is odd, so it vanishes at the pupil centre.
  CHECK(basis.maps[1][32 * 64 + 32] == 0.0);
}

TEST_CASE("Zernike maps are orthonormal over the disk on a 512 grid") {
  const auto basis = zernike_basis(grid_of(512), 15);
  std::vector<double> diag(15);
  long inside = 0;
  for (double v : basis.maps[0]) inside += v != 0.0;
  for (int j = 0; j < 15; ++j) {
    diag[j] = dot(basis.maps[j], basis.maps[j]);
    CHECK(diag[j] / inside == doctest::Approx(1.0).epsilon(1e-2));
  }
  for (int j = 0; j < 15; ++j)
    for (int k = j + 1; k < 15; ++k) CHECK(std::abs(dot(basis.maps[j], basis.maps[k])) / std::sqrt(diag[j] * diag[k]) < 1e-2);
  CHECK_THROWS_AS(zernike_basis(grid_of(64), 67), ValidationError);
  CHECK_NOTHROW(zernike_basis(grid_of(64), 66));
}

TEST_CASE("grid and view validation") {
  CHECK_THROWS_AS(grid_of(7).validate(), ValidationError);
  CHECK_THROWS_AS(grid_of(6).validate(), ValidationError);
  CHECK_THROWS_AS(grid_of(64, 0.5).validate(), ValidationError);  // aperture wider than the band
  auto g = grid_of(64);
  g.numerical_aperture = 1.4;
  CHECK_THROWS_AS(g.validate(), ValidationError);
  ViewSpec v;
  v.offsets = {{0.8, 0.0}};
  v.sub_aperture_radius = 0.3;
  CHECK_THROWS_AS(v.validate(), ValidationError);
  for (int n : {1, 3, 5, 13, 35}) {
    const auto s = ViewSpec::standard(n);
    CHECK(s.count() == n);
    CHECK_NOTHROW(s.validate());
  }
}

TEST_CASE("pupils: focus is a real disk, defocus is odd in z, support is centred on the offset") {
  const auto g = grid_of(64);
  const auto focus = single_pupil(g, {0, 0}, 0.5, 0.0);
  for (const auto& c : focus.field) {
    CHECK(c.imag() == 0.0);
    CHECK((c.real() == 0.0 || c.real() == 1.0));
  }
  const auto up = single_pupil(g, {0, 0}, 0.5, 2.0), down = single_pupil(g, {0, 0}, 0.5, -2.0);
  for (std::size_t i = 0; i < up.field.size(); ++i) CHECK(std::abs(up.field[i] - std::conj(down.field[i])) < 1e-14);

  const std::array<double, 2> off{0.35, -0.4};
  const auto side = single_pupil(g, off, 0.3, 2.0);
  double sx = 0, sy = 0, n = 0;
  for (int x = 0; x < 64; ++x)
    for (int y = 0; y < 64; ++y) {
      if (side.field[std::size_t(x) * 64 + y] == cplx(0.0)) continue;
      const auto p = g.pupil_coords(x, y);
      CHECK(std::hypot(p[0] - off[0], p[1] - off[1]) <= 0.3);
      sx += p[0];
      sy += p[1];
      n += 1;
    }
  const double pixel = 1.0 / (64 * g.pixel_size * g.cutoff_frequency());
  CHECK(std::abs(sx / n - off[0]) < pixel);
  CHECK(std::abs(sy / n - off[1]) < pixel);
}

TEST_CASE("PSFs are nonnegative, unit-sum, and piston invariant") {
  std::mt19937_64 rng(11);
  const auto g = grid_of(32);
  const auto basis = zernike_basis(g, 15);
  for (int trial = 0; trial < 5; ++trial) {
    const auto pupil = single_pupil(g, {0.3, 0.1}, 0.4, 1.5);
    auto s = random_state(15, rng, 0.5);
    const auto psf = synthesize_psf(pupil, basis, s);
    double sum = 0.0;
    for (double v : psf) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    s.coeffs[0] = 3.7;
    CHECK(testing::max_abs_diff(psf, synthesize_psf(pupil, basis, s)) < 1e-12);
  }
}

TEST_CASE("in-focus on-axis PSF peaks at the centre and defocus is symmetric in z") {
  const auto g = grid_of(32);
  const auto basis = zernike_basis(g, 3);
  const auto zero = ZernikeState::zeros(3);
  const auto psf = synthesize_psf(single_pupil(g, {0, 0}, 0.6, 0.0), basis, zero);
  CHECK(std::max_element(psf.begin(), psf.end()) - psf.begin() == 16 * 32 + 16);
  const auto a = synthesize_psf(single_pupil(g, {0, 0}, 0.6, 3.0), basis, zero);
  const auto b = synthesize_psf(single_pupil(g, {0, 0}, 0.6, -3.0), basis, zero);
  CHECK(testing::max_abs_diff(a, b) < 1e-9);
}

TEST_CASE("x tilt translates the PSF by an amount proportional to the coefficient") {
  const auto g = grid_of(32);
  const auto basis = zernike_basis(g, 3);
  const auto pupil = single_pupil(g, {0, 0}, 0.7, 1.0);
  const auto flat = synthesize_psf(pupil, basis, ZernikeState::zeros(3));
  // Z_2 = 2 rho cos(theta) = 2 fx / fc, so each pi * fc * pixel of coefficient is a one-pixel shift.
  const double per_pixel = std::numbers::pi * g.cutoff_frequency() * g.pixel_size;
  for (int k : {1, 2, 3}) {
    auto s = ZernikeState::zeros(3);
    s.coeffs[2] = k * per_pixel;
    const auto want = circshifted<double>(flat, 32, 32, -k, 0);
    CHECK(testing::max_abs_diff(synthesize_psf(pupil, basis, s), want) < 1e-12);
  }
}

TEST_CASE("psf_vjp matches central finite differences") {
  std::mt19937_64 rng(12);
  const auto g = grid_of(32);
  const auto basis = zernike_basis(g, 15);
  const auto pupil = single_pupil(g, {0.2, -0.3}, 0.5, 2.0);
  const auto state = random_state(15, rng, 0.4);
  const auto up = testing::random_vector(32 * 32, rng);
  const auto grad = psf_vjp(pupil, basis, state, up);
  CHECK(grad[0] == 0.0);
  for (int k = 1; k < 15; ++k) {
    auto f = [&](double d) {
      auto s = state;
      s.coeffs[k] += d;
      return dot(synthesize_psf(pupil, basis, s), up);
    };
    CHECK(testing::rel_err(grad[k], testing::central_diff(f, 1e-4)) < 1e-5);
  }
  const auto none = psf_vjp(pupil, basis, ZernikeState::zeros(15), std::vector<double>(32 * 32, 0.0));
  for (double v : none) CHECK(v == 0.0);
}

TEST_CASE("PsfModel batches synthesize_psf and psf_vjp") {
  std::mt19937_64 rng(13);
  const auto g = grid_of(16, 0.4);
  const auto views = ViewSpec::standard(3);
  const double depths[] = {-2.0, 0.0, 2.0};
  const auto pupils = make_pupils(g, views, depths);
  const auto basis = zernike_basis(g, 10);
  PsfModel model(pupils, 3, 3, basis);
  const auto state = random_state(10, rng, 0.3);
  const auto stack = model.synthesize(state);
  PsfStack up(3, 3, 16, 16);
  up.data = testing::random_vector(up.data.size(), rng);
  const auto grad = model.vjp(up);
  std::vector<double> expect(10, 0.0);
  for (int u = 0; u < 3; ++u)
    for (int z = 0; z < 3; ++z) {
      const auto& p = pupils[u * 3 + z];
      CHECK(testing::max_abs_diff(stack.slice(u, z), synthesize_psf(p, basis, state)) < 1e-15);
      const auto gz = psf_vjp(p, basis, state, up.slice(u, z));
      for (int k = 0; k < 10; ++k) expect[k] += gz[k];
    }
  CHECK(testing::vec_rel_err(grad, expect) < 1e-12);
}

TEST_CASE("an empty aperture is rejected") {
  const auto g = grid_of(16, 0.4);
  auto pupil = single_pupil(g, {0, 0}, 0.5, 0.0);
  std::fill(pupil.field.begin(), pupil.field.end(), cplx(0.0));
  CHECK_THROWS_WITH_AS(synthesize_psf(pupil, zernike_basis(g, 3), ZernikeState::zeros(3)),
                       doctest::Contains("empty aperture"), ValidationError);
}
