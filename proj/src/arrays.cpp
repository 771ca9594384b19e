#include "lfm/arrays.hpp"

#include <numeric>

#include "lfm/error.hpp"

namespace lfm {

std::string VolumeShape::str() const {
  return "(" + std::to_string(nx) + ", " + std::to_string(ny) + ", " + std::to_string(nz) + ")";
}

std::vector<double> IntensityVolume::slice(int z) const {
  std::vector<double> out(shape.slice_size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = data[p * shape.nz + z];
  return out;
}

void IntensityVolume::set_slice(int z, std::span<const double> image) {
  if (image.size() != shape.slice_size()) throw ValidationError("slice size mismatch");
  for (std::size_t p = 0; p < image.size(); ++p) data[p * shape.nz + z] = image[p];
}

void IntensityVolume::add_to_slice(int z, std::span<const double> image) {
  if (image.size() != shape.slice_size()) throw ValidationError("slice size mismatch");
  for (std::size_t p = 0; p < image.size(); ++p) data[p * shape.nz + z] += image[p];
}

std::string LightFieldStack::shape_str() const {
  return "(" + std::to_string(views) + ", " + std::to_string(nx) + ", " + std::to_string(ny) + ")";
}

std::string PsfStack::shape_str() const {
  return "(" + std::to_string(views) + ", " + std::to_string(depths) + ", " + std::to_string(nx) +
         ", " + std::to_string(ny) + ")";
}

PsfStack delta_psfs(int views, int depths, int nx, int ny) {
  PsfStack psfs(views, depths, nx, ny);
  for (int u = 0; u < views; ++u)
    for (int z = 0; z < depths; ++z) psfs.slice(u, z)[std::size_t(nx / 2) * ny + ny / 2] = 1.0;
  return psfs;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("dot: length mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace lfm
