#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"
#include "lfm/optics.hpp"
#include "lfm/recon.hpp"

namespace lfm {

/// Optical description needed to rebuild pupils: grid, views and depth planes.
struct ImagingSetup {
  GridSpec grid;
  ViewSpec views = ViewSpec::standard(13);
  std::vector<double> depths{-5.0, -3.0, -1.0, 1.0, 3.0, 5.0};

  void validate() const;
  std::vector<ComplexPupil> pupils() const { return make_pupils(grid, views, depths); }
};

void to_json(nlohmann::json& j, const GridSpec& g);
void from_json(const nlohmann::json& j, GridSpec& g);
void to_json(nlohmann::json& j, const ViewSpec& v);
void from_json(const nlohmann::json& j, ViewSpec& v);
void to_json(nlohmann::json& j, const ImagingSetup& s);
void from_json(const nlohmann::json& j, ImagingSetup& s);
void to_json(nlohmann::json& j, const ZernikeState& z);
void from_json(const nlohmann::json& j, ZernikeState& z);
/// Keys mirror the ReconConfig field names; unknown keys are rejected.
void to_json(nlohmann::json& j, const ReconConfig& c);
void from_json(const nlohmann::json& j, ReconConfig& c);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace lfm
