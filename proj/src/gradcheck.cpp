#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "lfm/error.hpp"
#include "lfm/recon.hpp"

namespace lfm {

bool GradCheckReport::passed(double tolerance) const {
  return std::all_of(groups.begin(), groups.end(),
                     [&](const GradCheckGroup& g) { return g.skipped || g.max_rel_error < tolerance; });
}

std::string GradCheckReport::str() const {
  std::string out;
  char line[160];
  for (const auto& g : groups) {
    if (g.skipped)
      std::snprintf(line, sizeof line, "%-10s skipped\n", g.name.c_str());
    else
      std::snprintf(line, sizeof line, "%-10s checked=%-6d max_rel_error=%.3e\n", g.name.c_str(), g.checked,
                    g.max_rel_error);
    out += line;
  }
  std::snprintf(line, sizeof line, "elapsed %.2f s\n", seconds);
  out += line;
  return out;
}

namespace {

struct Scene {
  LightFieldStack measurement;
  std::vector<ComplexPupil> pupils;
  ZernikePhaseBasis basis;
  ReconState state;
};

// Decoder and features are drawn so that every pre-activation stays at least a
// fixed margin away from the leaky-ReLU kink, and decoded voxels alternate sign
// between depth planes (so the axial-TV and positivity kinks are avoided too).
void draw_smooth_field(ReconState& state, VolumeShape shape, const ReconConfig& config, std::mt19937_64& rng) {
  const int C = config.channels, H = config.hidden, s = config.scale;
  const double a = config.slope;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  state.features = FeatureVolume({shape.nx * s, shape.ny * s, shape.nz * s}, C, s);
  const auto& fs = state.features.shape;
  for (int x = 0; x < fs.nx; ++x)
    for (int y = 0; y < fs.ny; ++y)
      for (int z = 0; z < fs.nz; ++z)
        for (int c = 0; c < C; ++c) state.features.at(x, y, z, c) = ((z / s) % 2 == 0) ? uniform(0.7, 1.0) : uniform(0.1, 0.3);

  Decoder& d = state.decoder;
  d = Decoder(C, H, a);
  for (int j = 0; j < H; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    for (int c = 0; c < C; ++c) d.w1[std::size_t(j) * C + c] = sign * uniform(0.2, 1.0);
    d.b1[j] = sign * uniform(0.05, 0.3);
  }

  // Output pre-activation is affine in the features within this sign pattern;
  // redraw w2 until the two feature clusters map to separated intervals.
  const double bound = std::sqrt(1.0 / H);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (double& w : d.w2) w = (unit(rng) < 0.5 ? -1.0 : 1.0) * uniform(0.05, bound);
    d.b2 = 0.0;
    double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
    for (int x = 0; x < fs.nx; ++x)
      for (int y = 0; y < fs.ny; ++y)
        for (int z = 0; z < fs.nz; ++z) {
          double o = 0.0;
          for (int j = 0; j < H; ++j) {
            double h = d.b1[j];
            for (int c = 0; c < C; ++c) h += d.w1[std::size_t(j) * C + c] * state.features.at(x, y, z, c);
            o += d.w2[j] * leaky_relu(h, a);
          }
          const int cluster = (z / s) % 2;
          lo[cluster] = std::min(lo[cluster], o);
          hi[cluster] = std::max(hi[cluster], o);
        }
    constexpr double kGap = 0.05;
    if (hi[1] + kGap < lo[0]) {
      d.b2 = -0.5 * (hi[1] + lo[0]);
      return;
    }
    if (hi[0] + kGap < lo[1]) {
      d.b2 = -0.5 * (hi[0] + lo[1]);
      return;
    }
  }
  throw std::runtime_error("gradient_check: could not draw a kink-free decoder");
}

Scene make_scene(const ReconConfig& config, std::uint64_t seed, const GradCheckOptions& opt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GridSpec grid;
  grid.nx = opt.nx;
  grid.ny = opt.ny;
  grid.pixel_size = 0.4;
  const auto views = ViewSpec::standard(opt.views);
  std::vector<double> depths(opt.nz);
  for (int z = 0; z < opt.nz; ++z) depths[z] = 2.0 * (z - 0.5 * (opt.nz - 1));

  Scene scene;
  scene.basis = zernike_basis(grid, config.zernike_order);
  scene.pupils = make_pupils(grid, views, depths);

  // Measurement from a random volume under a random aberration.
  IntensityVolume truth({grid.nx, grid.ny, opt.nz});
  for (double& v : truth.data) v = unit(rng);
  auto true_aberration = ZernikeState::zeros(scene.basis.size());
  for (int k = 1; k < scene.basis.size(); ++k) true_aberration.coeffs[k] = 0.4 * (unit(rng) - 0.5);
  PsfModel model(scene.pupils, views.count(), opt.nz, scene.basis);
  scene.measurement = project(truth, model.synthesize(true_aberration));

  draw_smooth_field(scene.state, truth.shape, config, rng);
  scene.state.zernike = ZernikeState::zeros(scene.basis.size());
  for (double& c : scene.state.zernike.coeffs) c = 0.6 * (unit(rng) - 0.5);
  return scene;
}

struct Accumulator {
  GradCheckGroup group;
  std::vector<std::pair<double, double>> pairs;  // (analytic, numeric)

  void finish() {
    double scale = 0.0;
    for (const auto& [a, f] : pairs) scale = std::max(scale, std::abs(f));
    const double floor = std::max(1e-3 * scale, 1e-300);
    for (const auto& [a, f] : pairs)
      group.max_rel_error = std::max(group.max_rel_error, std::abs(a - f) / std::max({std::abs(f), std::abs(a), floor}));
    group.checked = static_cast<int>(pairs.size());
  }
};

}  // namespace

GradCheckReport gradient_check(const ReconConfig& config, std::uint64_t seed, const GradCheckOptions& options) {
  config.validate();
  if (options.nx > 16 || options.ny > 16 || options.nz > 3 || options.views > 3 || options.nz < 2)
    throw ValidationError("gradient check scenes are limited to 16x16x3 with at most 3 views and at least 2 planes");
  const auto start = std::chrono::steady_clock::now();
  auto scene = make_scene(config, seed, options);
  ReconObjective objective(scene.measurement, scene.pupils, scene.basis, config.weights, config.fft_variant,
                           config.dao_enabled, config.scale);

  ReconObjective::Gradients grads;
  objective.evaluate(scene.state, &grads);
  const double h = options.step;

  // Fourth-order central stencil: a larger step keeps cancellation error well
  // below the tolerance without paying for it in truncation error.
  auto central = [&](auto&& perturb) {
    auto at = [&](double d) {
      ReconState shifted = scene.state;
      perturb(shifted, d);
      return objective.evaluate(shifted).total;
    };
    return (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
  };

  GradCheckReport report;

  Accumulator features{{"features"}, {}};
  {
    std::vector<std::size_t> idx(scene.state.features.data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (options.feature_samples > 0 && std::size_t(options.feature_samples) < idx.size()) {
      std::mt19937_64 pick(seed ^ 0x9e3779b97f4a7c15ULL);
      std::shuffle(idx.begin(), idx.end(), pick);
      idx.resize(options.feature_samples);
      std::sort(idx.begin(), idx.end());
    }
    for (auto i : idx) {
      const double f = central([i](ReconState& s, double d) { s.features.data[i] += d; });
      features.pairs.emplace_back(grads.features[i], f);
    }
  }
  features.finish();
  report.groups.push_back(features.group);

  Accumulator decoder{{"decoder"}, {}};
  {
    const auto analytic = grads.decoder.flatten();
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double f = central([i](ReconState& s, double d) {
        auto p = s.decoder.flatten();
        p[i] += d;
        s.decoder.unflatten(p);
      });
      decoder.pairs.emplace_back(analytic[i], f);
    }
  }
  decoder.finish();
  report.groups.push_back(decoder.group);

  Accumulator zernike{{"zernike"}, {}};
  if (!config.dao_enabled) {
    zernike.group.skipped = true;
  } else {
    for (int k = 0; k < scene.basis.size(); ++k) {
      if (!scene.state.zernike.trainable[k]) continue;
      const double f = central([k](ReconState& s, double d) { s.zernike.coeffs[k] += d; });
      zernike.pairs.emplace_back(grads.zernike[k], f);
    }
    zernike.finish();
  }
  report.groups.push_back(zernike.group);

  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace lfm
