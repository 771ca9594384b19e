#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "lfm/arrays.hpp"
#include "lfm/recon.hpp"

namespace lfm {

/// Raw array container.
///
/// Layout (little-endian):
///   bytes 0..3    magic "PNRV"
///   bytes 4..5    u16 version (1)
///   bytes 6..7    u16 dtype (1 = f32, 2 = f64)
///   bytes 8..11   u32 rank (1..4)
///   bytes 12..27  4 x u32 dims (unused trailing dims are 0)
///   bytes 28..    payload, row-major, product(dims) elements
/// A UTF-8 JSON sidecar lives next to the file at "<path>.json".
enum class DType : std::uint16_t { F32 = 1, F64 = 2 };

constexpr std::uint16_t kRawVersion = 1;
constexpr std::size_t kRawHeaderBytes = 28;

struct RawArray {
  std::vector<std::uint32_t> dims;
  DType dtype = DType::F32;
  std::vector<double> values;  // f32 payloads are widened exactly on read
};

std::filesystem::path sidecar_path(const std::filesystem::path& path);

void write_raw(const std::filesystem::path& path, const RawArray& array, const nlohmann::json& sidecar);
RawArray read_raw(const std::filesystem::path& path);
/// Empty object when the sidecar does not exist.
nlohmann::json read_sidecar(const std::filesystem::path& path);

void write_volume(const std::filesystem::path& path, const IntensityVolume& vol, const nlohmann::json& extra = {},
                  DType dtype = DType::F32);
IntensityVolume read_volume(const std::filesystem::path& path);

void write_light_field(const std::filesystem::path& path, const LightFieldStack& lf, const nlohmann::json& extra = {},
                       DType dtype = DType::F32);
LightFieldStack read_light_field(const std::filesystem::path& path);

void write_psf_stack(const std::filesystem::path& path, const PsfStack& psfs, const nlohmann::json& extra = {},
                     DType dtype = DType::F32);
PsfStack read_psf_stack(const std::filesystem::path& path);

/// Features, decoder and Zernike state in one f64 file; the sidecar lists the segment layout.
void write_checkpoint(const std::filesystem::path& path, const ReconState& state, const nlohmann::json& extra = {});
ReconState read_checkpoint(const std::filesystem::path& path);

}  // namespace lfm
