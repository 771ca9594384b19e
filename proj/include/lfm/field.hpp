#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lfm/arrays.hpp"

namespace lfm {

/// Dense learnable feature grid at super-sampled resolution, row-major (x, y, z, c).
struct FeatureVolume {
  VolumeShape shape;  // super-sampled (sX, sY, sZ)
  int channels = 3;
  int scale = 2;
  std::vector<double> data;

  FeatureVolume() = default;
  FeatureVolume(VolumeShape s, int c, int sc) : shape(s), channels(c), scale(sc), data(s.size() * c, 0.0) {}

  std::size_t voxel_offset(int x, int y, int z) const {
    return ((std::size_t(x) * shape.ny + y) * shape.nz + z) * channels;
  }
  double& at(int x, int y, int z, int c) { return data[voxel_offset(x, y, z) + c]; }
  double at(int x, int y, int z, int c) const { return data[voxel_offset(x, y, z) + c]; }
};

/// Two affine layers, each followed by leaky ReLU: C -> H -> 1.
struct Decoder {
  int inputs = 3;
  int hidden = 32;
  double slope = 0.01;
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;

  Decoder() = default;
  Decoder(int in, int h, double a = 0.01) : inputs(in), hidden(h), slope(a), w1(std::size_t(in) * h), b1(h), w2(h) {}

  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + 1; }
  /// Parameters in the order w1, b1, w2, b2.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);
  void validate() const;
};

inline double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }
/// Derivative with the negative-side slope at exactly zero.
inline double leaky_relu_grad(double x, double slope) { return x > 0.0 ? 1.0 : slope; }

/// Per-voxel intensity at the feature grid's resolution.
IntensityVolume decode(const FeatureVolume& features, const Decoder& decoder);

struct FieldGradient {
  FeatureVolume features;
  Decoder decoder;  // same layout as the decoder; holds dL/dparam
};

FieldGradient decode_vjp(const FeatureVolume& features, const Decoder& decoder, const IntensityVolume& upstream);

struct FieldInit {
  FeatureVolume features;
  Decoder decoder;
};

/// Features ~ U(0, 1e-2); weights ~ U(-sqrt(1/fan_in), sqrt(1/fan_in)); biases zero.
/// `shape` is the measurement-resolution volume; the grid is scale times larger per axis.
FieldInit init_field(VolumeShape shape, int channels, int scale, std::uint64_t seed, int hidden = 32,
                     double slope = 0.01);

}  // namespace lfm
