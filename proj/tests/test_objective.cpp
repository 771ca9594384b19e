#include <random>

#include "doctest.h"
#include "lfm/error.hpp"
#include "lfm/fft.hpp"
#include "lfm/objective.hpp"
#include "support.hpp"

using namespace lfm;
using testing::rel_err;

namespace {

double loop_mse(const LightFieldStack& a, const LightFieldStack& b) {
  double s = 0.0;
  for (int u = 0; u < a.views; ++u)
    for (int x = 0; x < a.nx; ++x)
      for (int y = 0; y < a.ny; ++y) s += (a.at(u, x, y) - b.at(u, x, y)) * (a.at(u, x, y) - b.at(u, x, y));
  return s;
}

double loop_amplitude(const LightFieldStack& a, const LightFieldStack& b) {
  double s = 0.0;
  for (int u = 0; u < a.views; ++u) {
    const auto fa = testing::naive_dft(a.view(u), a.nx, a.ny), fb = testing::naive_dft(b.view(u), b.nx, b.ny);
    for (std::size_t i = 0; i < fa.size(); ++i) s += (std::abs(fa[i]) - std::abs(fb[i])) * (std::abs(fa[i]) - std::abs(fb[i]));
  }
  return s / (a.nx * a.ny);
}

template <typename Loss>
void check_lf_gradient(const LightFieldStack& sim, const LightFieldStack& meas, Loss&& loss) {
  const auto g = loss(sim, meas).gradient;
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    auto f = [&](double d) {
      auto s = sim;
      s.data[i] += d;
      return loss(s, meas).value;
    };
    CHECK(rel_err(g.data[i], testing::central_diff(f, 1e-4)) < 1e-5);
  }
}

}  // namespace

TEST_CASE("mse loss") {
  std::mt19937_64 rng(31);
  const auto a = testing::random_lf(2, 4, 4, rng), b = testing::random_lf(2, 4, 4, rng);
  CHECK(mse_loss(a, a).value == 0.0);
  auto c = a;
  c.at(1, 2, 3) += 0.25;
  CHECK(mse_loss(c, a).value == 0.0625);
  const auto r = mse_loss(a, b);
  CHECK(rel_err(r.value, loop_mse(a, b)) < 1e-12);
  for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(r.gradient.data[i] == 2.0 * (a.data[i] - b.data[i]));
  CHECK_THROWS_AS(mse_loss(a, LightFieldStack(2, 4, 5)), ValidationError);
}

TEST_CASE("complex FFT loss equals mse by Parseval") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = testing::random_lf(3, 8, 6, rng, -1, 1), b = testing::random_lf(3, 8, 6, rng, -1, 1);
    const auto f = fft_loss(a, b, FftVariant::Complex);
    const auto m = mse_loss(a, b);
    CHECK(rel_err(f.value, m.value) < 1e-10);
    CHECK(testing::vec_rel_err(f.gradient.data, m.gradient.data) < 1e-10);
  }
}

TEST_CASE("amplitude FFT loss ignores circular translation and matches a DFT loop") {
  std::mt19937_64 rng(33);
  const auto a = testing::random_lf(2, 8, 8, rng);
  LightFieldStack shifted(2, 8, 8);
  for (int u = 0; u < 2; ++u) {
    const auto moved = circshifted<double>(a.view(u), 8, 8, 3, -2);
    std::copy(moved.begin(), moved.end(), shifted.view(u).begin());
  }
  CHECK(fft_loss(shifted, a, FftVariant::Amplitude).value < 1e-20);
  CHECK(fft_loss(shifted, a, FftVariant::Complex).value > 1.0);
  for (auto v : {FftVariant::Complex, FftVariant::Amplitude}) CHECK(fft_loss(a, a, v).value == 0.0);

  const auto b = testing::random_lf(2, 8, 8, rng);
  CHECK(rel_err(fft_loss(a, b, FftVariant::Amplitude).value, loop_amplitude(a, b)) < 1e-12);
}

TEST_CASE("FFT loss gradients match finite differences") {
  std::mt19937_64 rng(34);
  const auto a = testing::random_lf(2, 4, 6, rng, -1, 1), b = testing::random_lf(2, 4, 6, rng, -1, 1);
  for (auto v : {FftVariant::Complex, FftVariant::Amplitude})
    check_lf_gradient(a, b, [v](const LightFieldStack& s, const LightFieldStack& m) { return fft_loss(s, m, v); });
  CHECK(parse_fft_variant("amplitude") == FftVariant::Amplitude);
  CHECK(parse_fft_variant("complex") == FftVariant::Complex);
  CHECK_THROWS_AS(parse_fft_variant("log"), ValidationError);
}

TEST_CASE("amplitude gradient is zero where the simulated spectrum vanishes") {
  // A zero simulation has |F(sim)| = 0 everywhere: the subgradient is taken as 0.
  std::mt19937_64 rng(35);
  const auto meas = testing::random_lf(1, 4, 4, rng);
  const auto r = fft_loss(LightFieldStack(1, 4, 4), meas, FftVariant::Amplitude);
  for (double g : r.gradient.data) CHECK(g == 0.0);
  CHECK(rel_err(r.value, loop_amplitude(LightFieldStack(1, 4, 4), meas)) < 1e-12);
}

TEST_CASE("axial total variation") {
  std::mt19937_64 rng(36);
  IntensityVolume flat({4, 4, 3});
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      for (int z = 0; z < 3; ++z) flat.at(x, y, z) = x + 10 * y;
  CHECK(ztv_loss(flat).value == 0.0);

  IntensityVolume two({4, 4, 2});
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) two.at(x, y, 1) = 1.0;
  CHECK(ztv_loss(two).value == 16.0);

  const auto v = testing::random_volume({4, 4, 3}, rng, -1, 1);
  double loop = 0.0;
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      for (int z = 1; z < 3; ++z) loop += std::abs(v.at(x, y, z) - v.at(x, y, z - 1));
  const auto r = ztv_loss(v);
  CHECK(rel_err(r.value, loop) < 1e-12);
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    auto f = [&](double d) {
      auto w = v;
      w.data[i] += d;
      return ztv_loss(w).value;
    };
    CHECK(rel_err(r.gradient.data[i], testing::central_diff(f, 1e-6)) < 1e-5);
  }
  CHECK_THROWS_AS(ztv_loss(IntensityVolume({4, 4, 1})), ValidationError);
}

TEST_CASE("positivity loss") {
  std::mt19937_64 rng(37);
  CHECK(pos_loss(testing::random_volume({3, 3, 3}, rng, 0, 1)).value == 0.0);
  IntensityVolume one({2, 2, 2});
  one.at(1, 0, 1) = -2.5;
  const auto r1 = pos_loss(one);
  CHECK(r1.value == 2.5);
  CHECK(r1.gradient.at(1, 0, 1) == -1.0);
  CHECK(r1.gradient.at(0, 0, 0) == 0.0);

  const auto v = testing::random_volume({4, 4, 3}, rng, -1, 1);
  double loop = 0.0;
  for (double x : v.data) loop += x < 0 ? -x : 0.0;
  CHECK(rel_err(pos_loss(v).value, loop) < 1e-12);
}

TEST_CASE("total loss composes the weighted terms") {
  std::mt19937_64 rng(38);
  const auto sim = testing::random_lf(2, 8, 8, rng), meas = testing::random_lf(2, 8, 8, rng);
  const auto vol = testing::random_volume({8, 8, 3}, rng, -0.5, 1);
  const LossWeights w;
  for (auto variant : {FftVariant::Complex, FftVariant::Amplitude}) {
    const auto t = total_loss(sim, meas, vol, w, variant);
    const double mse = mse_loss(sim, meas).value, fft = fft_loss(sim, meas, variant).value;
    const double ztv = ztv_loss(vol).value, pos = pos_loss(vol).value;
    CHECK(t.report.mse == mse);
    CHECK(t.report.fft == fft);
    CHECK(t.report.pixel_count == 64);
    CHECK(rel_err(t.report.total, mse + w.alpha * fft + w.beta * ztv + w.gamma * pos) < 1e-12);
  }

  const auto zero = total_loss(LightFieldStack(2, 8, 8), LightFieldStack(2, 8, 8), IntensityVolume({8, 8, 3}), w,
                               FftVariant::Amplitude);
  CHECK(zero.report.total == 0.0);
  CHECK(zero.report.mse == 0.0);
  CHECK(zero.report.fft == 0.0);
  CHECK(zero.report.ztv == 0.0);
  CHECK(zero.report.pos == 0.0);

  const auto bare = total_loss(sim, meas, vol, {0.0, 0.0, 0.0}, FftVariant::Amplitude);
  CHECK(bare.report.total == bare.report.mse);

  CHECK_THROWS_AS(total_loss(sim, meas, vol, {-1.0, 0.0, 0.0}, FftVariant::Amplitude), ValidationError);
}

TEST_CASE("loss CSV rows") {
  CHECK(loss_csv_header() == "iteration,mse,fft,ztv,pos,total");
  LossReport r{1.5, 0.25, 2.0, 0.0, 1.75, 64};
  CHECK(loss_csv_row(7, r).rfind("7,1.5,0.25,2,0,1.75", 0) == 0);
}
