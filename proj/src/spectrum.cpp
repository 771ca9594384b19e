#include "lfm/spectrum.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "lfm/error.hpp"
#include "lfm/fft.hpp"

namespace lfm {

std::vector<std::uint8_t> spectrum_image(std::span<const double> image, int nx, int ny) {
  if (nx < 1 || ny < 1 || image.size() != std::size_t(nx) * ny) throw ValidationError("spectrum: image size mismatch");
  auto spec = to_complex(image);
  Fft2d(nx, ny).forward(spec);
  const auto centred = fftshift<cplx>(spec, nx, ny);
  std::vector<double> mag(centred.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::log1p(std::abs(centred[i]));
  const double top = *std::max_element(mag.begin(), mag.end());
  std::vector<std::uint8_t> out(mag.size(), 0);
  if (top > 0.0)
    for (std::size_t i = 0; i < mag.size(); ++i) out[i] = static_cast<std::uint8_t>(std::lround(255.0 * mag[i] / top));
  return out;
}

void write_png_gray(const std::filesystem::path& path, std::span<const std::uint8_t> pixels, int rows, int cols) {
  if (rows < 1 || cols < 1 || pixels.size() != std::size_t(rows) * cols) throw ValidationError("PNG size mismatch");
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw ValidationError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng error while writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, cols, rows, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < rows; ++r) png_write_row(png, const_cast<png_bytep>(pixels.data() + std::size_t(r) * cols));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void spectrum_plot(std::span<const double> image, int nx, int ny, const std::filesystem::path& path) {
  write_png_gray(path, spectrum_image(image, nx, ny), nx, ny);
}

}  // namespace lfm
