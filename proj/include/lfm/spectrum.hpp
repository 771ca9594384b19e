#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lfm {

/// Centred log-magnitude spectrum log(1 + |F|) of an (nx, ny) image, scaled to 0..255.
/// Row x of the output corresponds to frequency index x - nx/2.
std::vector<std::uint8_t> spectrum_image(std::span<const double> image, int nx, int ny);

/// 8-bit grayscale PNG, `rows` x `cols`, row-major.
void write_png_gray(const std::filesystem::path& path, std::span<const std::uint8_t> pixels, int rows, int cols);

/// spectrum_image() written to a PNG.
void spectrum_plot(std::span<const double> image, int nx, int ny, const std::filesystem::path& path);

}  // namespace lfm
