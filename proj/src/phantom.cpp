#include "lfm/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "lfm/error.hpp"

namespace lfm {

PhantomKind parse_phantom_kind(std::string_view name) {
  if (name == "beads") return PhantomKind::Beads;
  if (name == "bars") return PhantomKind::Bars;
  if (name == "filaments") return PhantomKind::Filaments;
  throw ValidationError("unknown phantom kind '" + std::string(name) + "' (expected beads|bars|filaments)");
}

std::string to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::Beads: return "beads";
    case PhantomKind::Bars: return "bars";
    case PhantomKind::Filaments: return "filaments";
  }
  return "?";
}

void PhantomSpec::validate() const {
  if (count < 0) throw ValidationError("phantom count must be non-negative");
  if (!(radius > 0.0)) throw ValidationError("phantom radius must be positive");
  if (margin < 0) throw ValidationError("phantom margin must be non-negative");
  if (!(intensity_min >= 0.0 && intensity_min <= intensity_max && intensity_max <= 1.0))
    throw ValidationError("phantom intensities must satisfy 0 <= min <= max <= 1");
  for (int p : pitches)
    if (p < 2) throw ValidationError("bar pitch must be >= 2 voxels");
}

namespace {

using Point = std::array<double, 3>;

// Lateral interior [lo, hi] in which a Gaussian of the given sigma stays clear of the margin.
std::pair<double, double> interior(int n, int margin, double sigma) {
  const double pad = margin + std::ceil(3.0 * sigma);
  return {pad, n - 1 - pad};
}

void splat(IntensityVolume& vol, const Point& c, double sigma, double amplitude) {
  const auto& s = vol.shape;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int x = std::max(0, int(std::floor(c[0])) - r); x <= std::min(s.nx - 1, int(std::ceil(c[0])) + r); ++x)
    for (int y = std::max(0, int(std::floor(c[1])) - r); y <= std::min(s.ny - 1, int(std::ceil(c[1])) + r); ++y)
      for (int z = std::max(0, int(std::floor(c[2])) - r); z <= std::min(s.nz - 1, int(std::ceil(c[2])) + r); ++z) {
        const double d2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]) + (z - c[2]) * (z - c[2]);
        if (d2 > 9.0 * sigma * sigma) continue;
        auto& v = vol.at(x, y, z);
        v = std::max(v, amplitude * std::exp(-d2 * inv));
      }
}

IntensityVolume beads(const PhantomSpec& spec, VolumeShape shape, std::mt19937_64& rng) {
  IntensityVolume vol(shape);
  const auto [xlo, xhi] = interior(shape.nx, spec.margin, spec.radius);
  const auto [ylo, yhi] = interior(shape.ny, spec.margin, spec.radius);
  if (spec.count > 0 && (xhi < xlo || yhi < ylo))
    throw ValidationError("volume " + shape.str() + " too small for beads with margin " + std::to_string(spec.margin));
  std::uniform_real_distribution<double> ux(xlo, xhi), uy(ylo, yhi), uz(0.0, shape.nz - 1.0),
      amp(spec.intensity_min, spec.intensity_max);
  for (int b = 0; b < spec.count; ++b) {
    const Point c{ux(rng), uy(rng), uz(rng)};
    splat(vol, c, spec.radius, amp(rng));
  }
  return vol;
}

// USAF-style groups: three bars of width pitch/2 and length 5 widths, groups laid
// out left to right along x at decreasing pitch, all centred on the middle row.
IntensityVolume bars(const PhantomSpec& spec, VolumeShape shape) {
  IntensityVolume vol(shape);
  std::vector<int> planes = spec.planes;
  if (planes.empty()) planes.push_back(shape.nz / 2);
  for (int z : planes)
    if (z < 0 || z >= shape.nz) throw ValidationError("bar plane " + std::to_string(z) + " outside the volume");

  int width_needed = 0;
  int max_length = 0;
  for (std::size_t g = 0; g < spec.pitches.size(); ++g) {
    const int p = spec.pitches[g];
    const int w = std::max(1, p / 2);
    width_needed += 2 * p + w + (g + 1 < spec.pitches.size() ? std::max(p, 4) : 0);
    max_length = std::max(max_length, 5 * w);
  }
  if (width_needed > shape.nx - 2 * spec.margin || max_length > shape.ny - 2 * spec.margin)
    throw ValidationError("volume " + shape.str() + " too small for bar pitches with margin " +
                          std::to_string(spec.margin));

  int x0 = spec.margin + (shape.nx - 2 * spec.margin - width_needed) / 2;
  const int yc = shape.ny / 2;
  for (std::size_t g = 0; g < spec.pitches.size(); ++g) {
    const int p = spec.pitches[g];
    const int w = std::max(1, p / 2);
    const int len = 5 * w;
    for (int bar = 0; bar < 3; ++bar)
      for (int x = x0 + bar * p; x < x0 + bar * p + w; ++x)
        for (int y = yc - len / 2; y < yc - len / 2 + len; ++y)
          for (int z : planes) vol.at(x, y, z) = spec.intensity_max;
    x0 += 2 * p + w + std::max(p, 4);
  }
  return vol;
}

double segment_distance2(const Point& p, const Point& a, const Point& b) {
  Point ab{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  Point ap{p[0] - a[0], p[1] - a[1], p[2] - a[2]};
  const double len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
  double t = len2 > 0 ? (ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = ap[i] - t * ab[i];
    d2 += d * d;
  }
  return d2;
}

IntensityVolume filaments(const PhantomSpec& spec, VolumeShape shape, std::mt19937_64& rng) {
  IntensityVolume vol(shape);
  const auto [xlo, xhi] = interior(shape.nx, spec.margin, spec.radius);
  const auto [ylo, yhi] = interior(shape.ny, spec.margin, spec.radius);
  if (spec.count > 0 && (xhi < xlo || yhi < ylo))
    throw ValidationError("volume " + shape.str() + " too small for filaments with margin " +
                          std::to_string(spec.margin));
  const double lo[3] = {xlo, ylo, 0.0}, hi[3] = {xhi, yhi, shape.nz - 1.0};
  std::uniform_real_distribution<double> unit(0.0, 1.0), amp(spec.intensity_min, spec.intensity_max);
  std::normal_distribution<double> turn(0.0, 0.35);
  constexpr int kSegments = 8;
  const double step = 0.12 * std::min(xhi - xlo, yhi - ylo) + 1.0;
  const double inv = 1.0 / (2.0 * spec.radius * spec.radius);
  const double reach2 = 9.0 * spec.radius * spec.radius;

  for (int f = 0; f < spec.count; ++f) {
    std::vector<Point> pts{{lo[0] + unit(rng) * (hi[0] - lo[0]), lo[1] + unit(rng) * (hi[1] - lo[1]),
                            lo[2] + unit(rng) * (hi[2] - lo[2])}};
    double theta = 2.0 * std::numbers::pi * unit(rng);
    double dz = 0.3 * (unit(rng) - 0.5);
    for (int s = 0; s < kSegments; ++s) {
      theta += turn(rng);
      dz = std::clamp(dz + 0.1 * turn(rng), -0.3, 0.3);
      Point next{pts.back()[0] + step * std::cos(theta), pts.back()[1] + step * std::sin(theta),
                 pts.back()[2] + step * dz};
      for (int i = 0; i < 3; ++i) {
        // Reflect off the interior box.
        if (next[i] < lo[i]) next[i] = std::min(hi[i], 2 * lo[i] - next[i]);
        if (next[i] > hi[i]) next[i] = std::max(lo[i], 2 * hi[i] - next[i]);
      }
      pts.push_back(next);
    }
    const double a = amp(rng);
    for (int x = 0; x < shape.nx; ++x)
      for (int y = 0; y < shape.ny; ++y)
        for (int z = 0; z < shape.nz; ++z) {
          double best = reach2;
          for (std::size_t s = 0; s + 1 < pts.size(); ++s)
            best = std::min(best, segment_distance2({double(x), double(y), double(z)}, pts[s], pts[s + 1]));
          if (best >= reach2) continue;
          auto& v = vol.at(x, y, z);
          v = std::max(v, a * std::exp(-best * inv));
        }
  }
  return vol;
}

}  // namespace

IntensityVolume make_phantom(const PhantomSpec& spec, VolumeShape shape) {
  spec.validate();
  if (shape.nx < 1 || shape.ny < 1 || shape.nz < 1) throw ValidationError("phantom shape must be positive");
  std::mt19937_64 rng(spec.seed);
  switch (spec.kind) {
    case PhantomKind::Beads: return beads(spec, shape, rng);
    case PhantomKind::Bars: return bars(spec, shape);
    case PhantomKind::Filaments: return filaments(spec, shape, rng);
  }
  throw ValidationError("unknown phantom kind");
}

}  // namespace lfm
