#include "lfm/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <utility>

#include "lfm/error.hpp"

namespace lfm {

namespace {
// FFTW's planner is not re-entrant.
std::mutex planner_mutex;
}  // namespace

Fft2d::Fft2d(int nx, int ny) : nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) throw ValidationError("FFT grid must be at least 1x1");
  std::lock_guard lock(planner_mutex);
  auto* scratch = fftw_alloc_complex(size());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_2d(nx, ny, scratch, scratch, FFTW_FORWARD, flags);
  inverse_plan_ = fftw_plan_dft_2d(nx, ny, scratch, scratch, FFTW_BACKWARD, flags);
  fftw_free(scratch);
}

Fft2d::~Fft2d() {
  std::lock_guard lock(planner_mutex);
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

Fft2d::Fft2d(Fft2d&& other) noexcept
    : nx_(other.nx_),
      ny_(other.ny_),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      inverse_plan_(std::exchange(other.inverse_plan_, nullptr)) {}

Fft2d& Fft2d::operator=(Fft2d&& other) noexcept {
  if (this != &other) {
    std::swap(nx_, other.nx_);
    std::swap(ny_, other.ny_);
    std::swap(forward_plan_, other.forward_plan_);
    std::swap(inverse_plan_, other.inverse_plan_);
  }
  return *this;
}

void Fft2d::forward(std::span<cplx> data) const {
  if (data.size() != size()) throw ValidationError("FFT buffer size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), p, p);
}

void Fft2d::inverse(std::span<cplx> data) const {
  if (data.size() != size()) throw ValidationError("FFT buffer size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), p, p);
}

std::vector<cplx> to_complex(std::span<const double> real) {
  return std::vector<cplx>(real.begin(), real.end());
}

}  // namespace lfm
