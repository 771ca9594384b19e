#include "lfm/field.hpp"

#include <cmath>
#include <random>

#include "lfm/error.hpp"

namespace lfm {

std::vector<double> Decoder::flatten() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  p.insert(p.end(), w1.begin(), w1.end());
  p.insert(p.end(), b1.begin(), b1.end());
  p.insert(p.end(), w2.begin(), w2.end());
  p.push_back(b2);
  return p;
}

void Decoder::unflatten(std::span<const double> params) {
  if (params.size() != parameter_count()) throw ValidationError("decoder parameter count mismatch");
  auto it = params.begin();
  std::copy_n(it, w1.size(), w1.begin());
  it += w1.size();
  std::copy_n(it, b1.size(), b1.begin());
  it += b1.size();
  std::copy_n(it, w2.size(), w2.begin());
  it += w2.size();
  b2 = *it;
}

void Decoder::validate() const {
  if (inputs < 1 || hidden < 1) throw ValidationError("decoder widths must be >= 1");
  if (w1.size() != std::size_t(inputs) * hidden || b1.size() != std::size_t(hidden) ||
      w2.size() != std::size_t(hidden))
    throw ValidationError("decoder parameter arrays do not match its widths");
}

namespace {

void check_widths(const FeatureVolume& features, const Decoder& decoder) {
  decoder.validate();
  if (features.channels != decoder.inputs)
    throw ValidationError("feature channels (" + std::to_string(features.channels) +
                          ") differ from decoder input width (" + std::to_string(decoder.inputs) + ")");
  if (features.data.size() != features.shape.size() * features.channels)
    throw ValidationError("feature array size does not match its shape");
}

}  // namespace

IntensityVolume decode(const FeatureVolume& features, const Decoder& decoder) {
  check_widths(features, decoder);
  const int C = decoder.inputs, H = decoder.hidden;
  const double a = decoder.slope;
  IntensityVolume out(features.shape);
  std::vector<double> act(H);
  const double* v = features.data.data();
  for (std::size_t i = 0; i < out.data.size(); ++i, v += C) {
    double o = decoder.b2;
    for (int j = 0; j < H; ++j) {
      const double* w = decoder.w1.data() + std::size_t(j) * C;
      double h = decoder.b1[j];
      for (int c = 0; c < C; ++c) h += w[c] * v[c];
      o += decoder.w2[j] * leaky_relu(h, a);
    }
    out.data[i] = leaky_relu(o, a);
  }
  return out;
}

FieldGradient decode_vjp(const FeatureVolume& features, const Decoder& decoder, const IntensityVolume& upstream) {
  check_widths(features, decoder);
  if (upstream.shape != features.shape)
    throw ValidationError("upstream shape " + upstream.shape.str() + " differs from feature grid " +
                          features.shape.str());
  const int C = decoder.inputs, H = decoder.hidden;
  const double a = decoder.slope;
  FieldGradient g{FeatureVolume(features.shape, C, features.scale), Decoder(C, H, a)};
  std::vector<double> pre(H);
  const double* v = features.data.data();
  double* gv = g.features.data.data();
  for (std::size_t i = 0; i < upstream.data.size(); ++i, v += C, gv += C) {
    const double gi = upstream.data[i];
    if (gi == 0.0) continue;
    double o = decoder.b2;
    for (int j = 0; j < H; ++j) {
      const double* w = decoder.w1.data() + std::size_t(j) * C;
      double h = decoder.b1[j];
      for (int c = 0; c < C; ++c) h += w[c] * v[c];
      pre[j] = h;
      o += decoder.w2[j] * leaky_relu(h, a);
    }
    const double go = gi * leaky_relu_grad(o, a);
    g.decoder.b2 += go;
    for (int j = 0; j < H; ++j) {
      const double h = pre[j];
      g.decoder.w2[j] += go * leaky_relu(h, a);
      const double gh = go * decoder.w2[j] * leaky_relu_grad(h, a);
      g.decoder.b1[j] += gh;
      const double* w = decoder.w1.data() + std::size_t(j) * C;
      double* gw = g.decoder.w1.data() + std::size_t(j) * C;
      for (int c = 0; c < C; ++c) {
        gw[c] += gh * v[c];
        gv[c] += gh * w[c];
      }
    }
  }
  return g;
}

FieldInit init_field(VolumeShape shape, int channels, int scale, std::uint64_t seed, int hidden, double slope) {
  if (shape.nx < 1 || shape.ny < 1 || shape.nz < 1) throw ValidationError("field shape must be positive");
  if (channels < 1 || hidden < 1) throw ValidationError("channel count and hidden width must be >= 1");
  if (scale < 1) throw ValidationError("super-sampling scale must be >= 1");
  std::mt19937_64 rng(seed);
  const VolumeShape super{shape.nx * scale, shape.ny * scale, shape.nz * scale};
  FieldInit init{FeatureVolume(super, channels, scale), Decoder(channels, hidden, slope)};
  std::uniform_real_distribution<double> feature_dist(0.0, 1e-2);
  for (double& f : init.features.data) f = feature_dist(rng);
  const double bound1 = std::sqrt(1.0 / channels);
  std::uniform_real_distribution<double> w1_dist(-bound1, bound1);
  for (double& w : init.decoder.w1) w = w1_dist(rng);
  const double bound2 = std::sqrt(1.0 / hidden);
  std::uniform_real_distribution<double> w2_dist(-bound2, bound2);
  for (double& w : init.decoder.w2) w = w2_dist(rng);
  return init;
}

}  // namespace lfm
