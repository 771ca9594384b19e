#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "lfm/arrays.hpp"

namespace testing {

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline lfm::IntensityVolume random_volume(lfm::VolumeShape s, std::mt19937_64& rng, double lo = 0.0,
                                          double hi = 1.0) {
  lfm::IntensityVolume v(s);
  v.data = random_vector(s.size(), rng, lo, hi);
  return v;
}

inline lfm::LightFieldStack random_lf(int u, int nx, int ny, std::mt19937_64& rng, double lo = 0.0,
                                      double hi = 1.0) {
  lfm::LightFieldStack lf(u, nx, ny);
  lf.data = random_vector(lf.data.size(), rng, lo, hi);
  return lf;
}

/// Random nonnegative PSFs, each slice normalized to unit sum.
inline lfm::PsfStack random_psfs(int u, int z, int nx, int ny, std::mt19937_64& rng) {
  lfm::PsfStack p(u, z, nx, ny);
  p.data = random_vector(p.data.size(), rng, 0.0, 1.0);
  for (int a = 0; a < u; ++a)
    for (int b = 0; b < z; ++b) {
      auto s = p.slice(a, b);
      double sum = 0.0;
      for (double v : s) sum += v;
      for (double& v : s) v /= sum;
    }
  return p;
}

inline bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Relative error of two vectors in the max norm.
inline double vec_rel_err(std::span<const double> a, std::span<const double> b) {
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  return scale == 0.0 ? 0.0 : max_abs_diff(a, b) / scale;
}

/// O(N^2) 2D DFT, row-major (nx, ny), negative exponent.
inline std::vector<std::complex<double>> naive_dft(std::span<const double> img, int nx, int ny) {
  std::vector<std::complex<double>> out(img.size());
  for (int kx = 0; kx < nx; ++kx)
    for (int ky = 0; ky < ny; ++ky) {
      std::complex<double> acc = 0.0;
      for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) {
          const double ph = -2.0 * std::numbers::pi * (double(kx) * x / nx + double(ky) * y / ny);
          acc += img[std::size_t(x) * ny + y] * std::polar(1.0, ph);
        }
      out[std::size_t(kx) * ny + ky] = acc;
    }
  return out;
}

/// Fourth-order central difference of f at step h.
template <typename F>
double central_diff(F&& f, double h) {
  return (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h);
}

}  // namespace testing
