#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lfm {

struct VolumeShape {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t size() const { return std::size_t(nx) * ny * nz; }
  std::size_t slice_size() const { return std::size_t(nx) * ny; }
  bool operator==(const VolumeShape&) const = default;
  std::string str() const;
};

/// Sample estimate I(x, y, z), row-major with z fastest.
struct IntensityVolume {
  VolumeShape shape;
  std::array<double, 3> voxel_size{1.0, 1.0, 1.0};  // micrometers
  std::vector<double> data;

  IntensityVolume() = default;
  explicit IntensityVolume(VolumeShape s, double fill = 0.0) : shape(s), data(s.size(), fill) {}

  std::size_t index(int x, int y, int z) const { return (std::size_t(x) * shape.ny + y) * shape.nz + z; }
  double& at(int x, int y, int z) { return data[index(x, y, z)]; }
  double at(int x, int y, int z) const { return data[index(x, y, z)]; }

  /// Copies depth plane z out as an (nx, ny) row-major image.
  std::vector<double> slice(int z) const;
  void set_slice(int z, std::span<const double> image);
  void add_to_slice(int z, std::span<const double> image);
};

/// Multi-view measurements LF(u, x, y), row-major.
struct LightFieldStack {
  int views = 0;
  int nx = 0;
  int ny = 0;
  std::vector<double> data;

  LightFieldStack() = default;
  LightFieldStack(int u, int x, int y, double fill = 0.0)
      : views(u), nx(x), ny(y), data(std::size_t(u) * x * y, fill) {}

  std::size_t view_size() const { return std::size_t(nx) * ny; }
  std::span<double> view(int u) { return {data.data() + u * view_size(), view_size()}; }
  std::span<const double> view(int u) const { return {data.data() + u * view_size(), view_size()}; }
  double& at(int u, int x, int y) { return data[u * view_size() + std::size_t(x) * ny + y]; }
  double at(int u, int x, int y) const { return data[u * view_size() + std::size_t(x) * ny + y]; }
  std::string shape_str() const;
};

/// Per-view, per-depth point spread functions PSF(u, z, x, y), row-major.
/// The optical axis sits at pixel (nx/2, ny/2) of every slice.
struct PsfStack {
  int views = 0;
  int depths = 0;
  int nx = 0;
  int ny = 0;
  std::vector<double> data;

  PsfStack() = default;
  PsfStack(int u, int z, int x, int y, double fill = 0.0)
      : views(u), depths(z), nx(x), ny(y), data(std::size_t(u) * z * x * y, fill) {}

  std::size_t slice_size() const { return std::size_t(nx) * ny; }
  std::span<double> slice(int u, int z) {
    return {data.data() + (std::size_t(u) * depths + z) * slice_size(), slice_size()};
  }
  std::span<const double> slice(int u, int z) const {
    return {data.data() + (std::size_t(u) * depths + z) * slice_size(), slice_size()};
  }
  std::string shape_str() const;
};

/// Delta PSFs at every (u, z): the identity kernel under the centered convention.
PsfStack delta_psfs(int views, int depths, int nx, int ny);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace lfm
