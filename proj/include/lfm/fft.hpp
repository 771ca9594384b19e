#pragma once

#include <complex>
#include <span>
#include <vector>

namespace lfm {

using cplx = std::complex<double>;

/// In-place unnormalized 2D DFT on an (nx, ny) row-major complex grid.
///
/// forward() computes X[k] = sum_n x[n] exp(-2 pi i k.n / N); inverse() is the
/// conjugate transform without the 1/N factor, i.e. the exact adjoint of forward().
class Fft2d {
 public:
  Fft2d(int nx, int ny);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;
  Fft2d(Fft2d&& other) noexcept;
  Fft2d& operator=(Fft2d&& other) noexcept;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return std::size_t(nx_) * ny_; }

  void forward(std::span<cplx> data) const;
  void inverse(std::span<cplx> data) const;

 private:
  int nx_ = 0;
  int ny_ = 0;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// dst[(x + sx) mod nx, (y + sy) mod ny] = src[x, y].
template <typename T>
void circshift(std::span<const T> src, std::span<T> dst, int nx, int ny, int sx, int sy) {
  sx = ((sx % nx) + nx) % nx;
  sy = ((sy % ny) + ny) % ny;
  for (int x = 0; x < nx; ++x) {
    const int tx = (x + sx) % nx;
    for (int y = 0; y < ny; ++y) {
      dst[std::size_t(tx) * ny + (y + sy) % ny] = src[std::size_t(x) * ny + y];
    }
  }
}

template <typename T>
std::vector<T> circshifted(std::span<const T> src, int nx, int ny, int sx, int sy) {
  std::vector<T> out(src.size());
  circshift<T>(src, out, nx, ny, sx, sy);
  return out;
}

/// Moves the zero-frequency / origin sample from index 0 to (nx/2, ny/2).
template <typename T>
std::vector<T> fftshift(std::span<const T> src, int nx, int ny) {
  return circshifted<T>(src, nx, ny, nx / 2, ny / 2);
}

template <typename T>
std::vector<T> ifftshift(std::span<const T> src, int nx, int ny) {
  return circshifted<T>(src, nx, ny, -(nx / 2), -(ny / 2));
}

std::vector<cplx> to_complex(std::span<const double> real);

}  // namespace lfm
