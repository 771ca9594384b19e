#include <random>

#include "doctest.h"
#include "lfm/error.hpp"
#include "lfm/fft.hpp"
#include "lfm/forward.hpp"
#include "support.hpp"

using namespace lfm;
using testing::rel_err;

namespace {

// Direct-space circular convolution with the kernel origin at (nx/2, ny/2).
LightFieldStack direct_project(const IntensityVolume& vol, const PsfStack& psfs) {
  const int nx = vol.shape.nx, ny = vol.shape.ny;
  LightFieldStack lf(psfs.views, nx, ny);
  for (int u = 0; u < psfs.views; ++u)
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        double acc = 0.0;
        for (int z = 0; z < vol.shape.nz; ++z)
          for (int a = 0; a < nx; ++a)
            for (int b = 0; b < ny; ++b) {
              const int px = ((x - a + nx / 2) % nx + nx) % nx;
              const int py = ((y - b + ny / 2) % ny + ny) % ny;
              acc += vol.at(a, b, z) * psfs.slice(u, z)[std::size_t(px) * ny + py];
            }
        lf.at(u, x, y) = acc;
      }
  return lf;
}

}  // namespace

TEST_CASE("fft matches a naive DFT and inverse is its adjoint") {
  std::mt19937_64 rng(1);
  const int nx = 8, ny = 6;
  const auto img = testing::random_vector(nx * ny, rng);
  auto spec = to_complex(img);
  Fft2d fft(nx, ny);
  fft.forward(spec);
  const auto ref = testing::naive_dft(img, nx, ny);
  for (std::size_t i = 0; i < spec.size(); ++i) CHECK(std::abs(spec[i] - ref[i]) < 1e-12);

  fft.inverse(spec);
  for (std::size_t i = 0; i < spec.size(); ++i) CHECK(std::abs(spec[i] / double(nx * ny) - img[i]) < 1e-13);
}

TEST_CASE("fftshift and ifftshift are inverse and centre the origin") {
  std::vector<int> v(8 * 4);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = int(i);
  const auto s = fftshift<int>(v, 8, 4);
  CHECK(s[4 * 4 + 2] == 0);
  CHECK(ifftshift<int>(s, 8, 4) == v);
}

TEST_CASE("delta PSFs make project a sum over depth and the adjoint a broadcast") {
  std::mt19937_64 rng(2);
  const auto vol = testing::random_volume({8, 8, 3}, rng);
  const auto psfs = delta_psfs(2, 3, 8, 8);
  const auto lf = project(vol, psfs);
  for (int u = 0; u < 2; ++u)
    for (int x = 0; x < 8; ++x)
      for (int y = 0; y < 8; ++y) CHECK(lf.at(u, x, y) == doctest::Approx(vol.at(x, y, 0) + vol.at(x, y, 1) + vol.at(x, y, 2)).epsilon(1e-13));

  const auto meas = testing::random_lf(2, 8, 8, rng);
  const auto back = project_adjoint(meas, psfs);
  for (int z = 0; z < 3; ++z)
    for (int x = 0; x < 8; ++x)
      for (int y = 0; y < 8; ++y) CHECK(back.at(x, y, z) == doctest::Approx(meas.at(0, x, y) + meas.at(1, x, y)).epsilon(1e-13));
}

TEST_CASE("a single voxel projects to its PSF shifted to the voxel") {
  std::mt19937_64 rng(3);
  const auto psfs = testing::random_psfs(2, 3, 16, 12, rng);
  IntensityVolume vol({16, 12, 3});
  const int x0 = 3, y0 = 10, z0 = 1;
  vol.at(x0, y0, z0) = 2.5;
  const auto lf = project(vol, psfs);
  for (int u = 0; u < 2; ++u) {
    const auto expect = circshifted<double>(psfs.slice(u, z0), 16, 12, x0 - 8, y0 - 6);
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(std::abs(lf.view(u)[i] - 2.5 * expect[i]) < 1e-13);
  }
}

TEST_CASE("FFT projection matches direct convolution on 8x8x3 with two views") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto vol = testing::random_volume({8, 8, 3}, rng);
    const auto psfs = testing::random_psfs(2, 3, 8, 8, rng);
    CHECK(testing::vec_rel_err(project(vol, psfs).data, direct_project(vol, psfs).data) < 1e-10);
  }
}

TEST_CASE("project and project_adjoint pass the dot-product test") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto vol = testing::random_volume({8, 8, 3}, rng, -1, 1);
    const auto lf = testing::random_lf(2, 8, 8, rng, -1, 1);
    const auto psfs = testing::random_psfs(2, 3, 8, 8, rng);
    CHECK(rel_err(dot(project(vol, psfs).data, lf.data), dot(vol.data, project_adjoint(lf, psfs).data)) < 1e-10);
  }
  const auto psfs = testing::random_psfs(2, 3, 8, 8, rng);
  const auto zero = project_adjoint(LightFieldStack(2, 8, 8), psfs);
  CHECK(std::all_of(zero.data.begin(), zero.data.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("projection is linear and flux preserving") {
  std::mt19937_64 rng(6);
  const auto a = testing::random_volume({16, 16, 4}, rng);
  const auto b = testing::random_volume({16, 16, 4}, rng);
  const auto psfs = testing::random_psfs(3, 4, 16, 16, rng);
  IntensityVolume mix(a.shape);
  for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = 0.7 * a.data[i] - 1.3 * b.data[i];
  const auto pa = project(a, psfs), pb = project(b, psfs), pm = project(mix, psfs);
  std::vector<double> combo(pa.data.size());
  for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = 0.7 * pa.data[i] - 1.3 * pb.data[i];
  CHECK(testing::vec_rel_err(pm.data, combo) < 1e-10);

  double total = 0.0;
  for (double v : a.data) total += v;
  for (int u = 0; u < 3; ++u) {
    double flux = 0.0;
    for (double v : pa.view(u)) flux += v;
    CHECK(rel_err(flux, total) < 1e-9);
  }
}

TEST_CASE("Projector psf_gradient matches finite differences") {
  std::mt19937_64 rng(7);
  const auto vol = testing::random_volume({8, 8, 2}, rng);
  auto psfs = testing::random_psfs(2, 2, 8, 8, rng);
  const auto up = testing::random_lf(2, 8, 8, rng, -1, 1);
  Projector proj(psfs);
  proj.forward(vol);
  const auto grad = proj.psf_gradient(up);
  for (std::size_t i = 0; i < psfs.data.size(); i += 7) {
    auto f = [&](double d) {
      auto p = psfs;
      p.data[i] += d;
      return dot(project(vol, p).data, up.data);
    };
    CHECK(rel_err(grad.data[i], testing::central_diff(f, 1e-3)) < 1e-8);
  }
}

TEST_CASE("shape mismatches name both shapes") {
  const auto psfs = delta_psfs(2, 3, 8, 8);
  try {
    project(IntensityVolume({8, 8, 4}), psfs);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(8, 8, 4)") != std::string::npos);
    CHECK(msg.find("(2, 3, 8, 8)") != std::string::npos);
  }
  CHECK_THROWS_AS(project_adjoint(LightFieldStack(3, 8, 8), psfs), ValidationError);
}

TEST_CASE("downsample is a block mean and downsample_vjp its adjoint") {
  std::mt19937_64 rng(8);
  const auto vol = testing::random_volume({4, 4, 2}, rng);
  CHECK(downsample(vol, 1).data == vol.data);
  const auto d = downsample(vol, 2);
  REQUIRE(d.shape == VolumeShape{2, 2, 1});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double mean = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c) mean += vol.at(2 * x + a, 2 * y + b, c);
      CHECK(rel_err(d.at(x, y, 0), mean / 8.0) < 1e-12);
    }

  const auto seven = downsample(IntensityVolume({4, 6, 2}, 7.0), 2);
  for (double v : seven.data) CHECK(v == 7.0);

  const auto ones = downsample_vjp(IntensityVolume({2, 2, 1}, 1.0), 2);
  for (double v : ones.data) CHECK(v == 0.125);

  for (int trial = 0; trial < 10; ++trial) {
    const auto fine = testing::random_volume({6, 4, 4}, rng, -1, 1);
    const auto coarse = testing::random_volume({3, 2, 2}, rng, -1, 1);
    CHECK(rel_err(dot(downsample(fine, 2).data, coarse.data), dot(fine.data, downsample_vjp(coarse, 2).data)) < 1e-12);
  }
  CHECK_THROWS_AS(downsample(IntensityVolume({5, 4, 2}), 2), ValidationError);
}
