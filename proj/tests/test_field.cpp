#include <random>

#include "doctest.h"
#include "lfm/error.hpp"
#include "lfm/field.hpp"
#include "support.hpp"

using namespace lfm;

namespace {

Decoder random_decoder(int c, int h, std::mt19937_64& rng) {
  Decoder d(c, h, 0.01);
  d.w1 = testing::random_vector(d.w1.size(), rng);
  d.b1 = testing::random_vector(d.b1.size(), rng, -0.2, 0.2);
  d.w2 = testing::random_vector(d.w2.size(), rng);
  d.b2 = 0.1;
  return d;
}

FeatureVolume random_features(VolumeShape s, int c, std::mt19937_64& rng) {
  FeatureVolume f(s, c, 1);
  f.data = testing::random_vector(f.data.size(), rng);
  return f;
}

double scalar_decode(const Decoder& d, const FeatureVolume& f, int x, int y, int z) {
  double out = d.b2;
  for (int j = 0; j < d.hidden; ++j) {
    double h = d.b1[j];
    for (int c = 0; c < d.inputs; ++c) h += d.w1[j * d.inputs + c] * f.at(x, y, z, c);
    out += d.w2[j] * (h > 0 ? h : d.slope * h);
  }
  return out > 0 ? out : d.slope * out;
}

}  // namespace

TEST_CASE("decode degenerate decoders") {
  FeatureVolume f({2, 2, 2}, 3, 1);
  std::fill(f.data.begin(), f.data.end(), 0.4);
  Decoder d(3, 8, 0.01);
  for (double v : decode(f, d).data) CHECK(v == 0.0);
  d.b2 = -1.0;
  for (double v : decode(f, d).data) CHECK(v == doctest::Approx(-0.01).epsilon(1e-15));
}

TEST_CASE("decode matches a voxel-at-a-time evaluation") {
  std::mt19937_64 rng(21);
  const auto f = random_features({4, 4, 2}, 3, rng);
  const auto d = random_decoder(3, 32, rng);
  const auto vol = decode(f, d);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      for (int z = 0; z < 2; ++z) CHECK(testing::rel_err(vol.at(x, y, z), scalar_decode(d, f, x, y, z)) < 1e-12);
  Decoder wrong(4, 32);
  CHECK_THROWS_AS(decode(f, wrong), ValidationError);
}

TEST_CASE("changing one voxel's features changes only that voxel") {
  std::mt19937_64 rng(22);
  auto f = random_features({3, 3, 3}, 3, rng);
  const auto d = random_decoder(3, 16, rng);
  const auto before = decode(f, d);
  f.at(1, 2, 0, 1) += 0.5;
  const auto after = decode(f, d);
  for (std::size_t i = 0; i < before.data.size(); ++i)
    if (i != before.index(1, 2, 0)) CHECK(before.data[i] == after.data[i]);
  CHECK(before.at(1, 2, 0) != after.at(1, 2, 0));
}

TEST_CASE("decode_vjp matches finite differences") {
  std::mt19937_64 rng(23);
  const auto f = random_features({3, 2, 2}, 3, rng);
  const auto d = random_decoder(3, 8, rng);
  IntensityVolume up(f.shape);
  up.data = testing::random_vector(up.data.size(), rng);
  const auto g = decode_vjp(f, d, up);
  const double h = 1e-5;

  for (std::size_t i = 0; i < f.data.size(); ++i) {
    auto fn = [&](double e) {
      auto p = f;
      p.data[i] += e;
      return dot(decode(p, d).data, up.data);
    };
    CHECK(testing::rel_err(g.features.data[i], testing::central_diff(fn, h)) < 1e-5);
  }
  const auto params = d.flatten();
  const auto analytic = g.decoder.flatten();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto fn = [&](double e) {
      auto p = params;
      p[i] += e;
      Decoder q = d;
      q.unflatten(p);
      return dot(decode(f, q).data, up.data);
    };
    CHECK(testing::rel_err(analytic[i], testing::central_diff(fn, h)) < 1e-5);
  }

  const auto zero = decode_vjp(f, d, IntensityVolume(f.shape));
  for (double v : zero.features.data) CHECK(v == 0.0);
  for (double v : zero.decoder.flatten()) CHECK(v == 0.0);
}

TEST_CASE("negative pre-activations scale the feature gradient by slope squared") {
  FeatureVolume f({2, 1, 1}, 1, 1);
  f.data = {-0.3, -2.0};
  Decoder d(1, 1, 0.05);
  d.w1 = {1.0};
  d.w2 = {1.0};
  const auto out = decode(f, d);
  CHECK(out.data[0] == doctest::Approx(0.05 * 0.05 * -0.3).epsilon(1e-14));
  const auto g = decode_vjp(f, d, IntensityVolume({2, 1, 1}, 1.0));
  for (double v : g.features.data) CHECK(v == doctest::Approx(0.05 * 0.05).epsilon(1e-14));
  CHECK(leaky_relu_grad(0.0, 0.05) == 0.05);
}

TEST_CASE("init_field is deterministic, bounded and seed dependent") {
  const VolumeShape s{6, 4, 3};
  const auto a = init_field(s, 3, 2, 5), b = init_field(s, 3, 2, 5), c = init_field(s, 3, 2, 6);
  CHECK(a.features.shape == VolumeShape{12, 8, 6});
  CHECK(a.features.data == b.features.data);
  CHECK(a.decoder.flatten() == b.decoder.flatten());
  CHECK(a.features.data != c.features.data);
  CHECK(a.decoder.flatten() != c.decoder.flatten());
  for (double v : a.features.data) CHECK((v >= 0.0 && v < 1e-2));
  for (double w : a.decoder.w1) CHECK(std::abs(w) <= std::sqrt(1.0 / 3));
  for (double w : a.decoder.w2) CHECK(std::abs(w) <= std::sqrt(1.0 / 32));
  for (double v : a.decoder.b1) CHECK(v == 0.0);
  CHECK(a.decoder.b2 == 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto init = init_field(s, 3, 2, seed);
    const auto vol = decode(init.features, init.decoder);
    for (double v : vol.data) CHECK(std::abs(v) < 1.0);
  }
}
