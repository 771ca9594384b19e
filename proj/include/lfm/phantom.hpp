#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lfm/arrays.hpp"

namespace lfm {

enum class PhantomKind { Beads, Bars, Filaments };

PhantomKind parse_phantom_kind(std::string_view name);
std::string to_string(PhantomKind kind);

/// Synthetic test objects. Geometry is in voxels; values land in [0, 1].
struct PhantomSpec {
  PhantomKind kind = PhantomKind::Beads;
  int count = 12;                  // beads or filaments
  double radius = 1.2;             // Gaussian sigma of a bead / filament cross-section
  std::vector<int> pitches{8, 4, 2};  // bars: one three-bar group per pitch
  std::vector<int> planes;         // bars: depth planes to draw on; empty = centre plane
  double intensity_min = 0.5;
  double intensity_max = 1.0;
  int margin = 8;                  // zero border on the lateral faces
  std::uint64_t seed = 0;

  void validate() const;
};

IntensityVolume make_phantom(const PhantomSpec& spec, VolumeShape shape);

}  // namespace lfm
