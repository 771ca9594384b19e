#include "lfm/raw_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

#include "lfm/config.hpp"
#include "lfm/error.hpp"

namespace lfm {

using nlohmann::json;

namespace {

template <typename T>
void put_le(std::vector<unsigned char>& buf, T value) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= U(p[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

std::size_t element_bytes(DType t) {
  switch (t) {
    case DType::F32: return 4;
    case DType::F64: return 8;
  }
  throw ValidationError("unknown dtype code");
}

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t a, std::uint32_t b) { return a * b; });
}

void expect_rank(const RawArray& a, std::size_t rank, const std::filesystem::path& path) {
  if (a.dims.size() != rank)
    throw ValidationError(path.string() + ": expected a rank-" + std::to_string(rank) + " array, found rank " +
                          std::to_string(a.dims.size()));
}

// A sidecar that names a different kind means the wrong file was passed; no sidecar is accepted.
void expect_kind(const json& meta, const char* kind, const std::filesystem::path& path) {
  if (meta.contains("kind") && meta.at("kind") != kind)
    throw ValidationError(path.string() + ": expected a " + kind + " file, sidecar says " + meta.at("kind").dump());
}

json with_kind(const json& extra, const char* kind) {
  json j = extra.is_object() ? extra : json::object();
  j["kind"] = kind;
  if (!j.contains("units")) j["units"] = "um";
  return j;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

void write_raw(const std::filesystem::path& path, const RawArray& array, const json& sidecar) {
  if (array.dims.empty() || array.dims.size() > 4) throw ValidationError("raw arrays have rank 1..4");
  if (element_count(array.dims) != array.values.size())
    throw ValidationError("raw array payload does not match its dims");
  std::vector<unsigned char> buf;
  buf.reserve(kRawHeaderBytes + array.values.size() * element_bytes(array.dtype));
  buf.insert(buf.end(), {'P', 'N', 'R', 'V'});
  put_le<std::uint16_t>(buf, kRawVersion);
  put_le<std::uint16_t>(buf, static_cast<std::uint16_t>(array.dtype));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(array.dims.size()));
  for (std::size_t i = 0; i < 4; ++i) put_le<std::uint32_t>(buf, i < array.dims.size() ? array.dims[i] : 0u);
  for (double v : array.values) {
    if (array.dtype == DType::F32)
      put_le<float>(buf, static_cast<float>(v));
    else
      put_le<double>(buf, v);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw ValidationError("write failed: " + path.string());
  json meta = sidecar.is_object() ? sidecar : json::object();
  meta["dtype"] = array.dtype == DType::F32 ? "f32le" : "f64le";
  meta["dims"] = array.dims;
  if (!meta.contains("provenance")) meta["provenance"] = "lfmrecon";
  write_json_file(sidecar_path(path), meta);
}

RawArray read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kRawHeaderBytes || std::memcmp(buf.data(), "PNRV", 4) != 0)
    throw ValidationError(path.string() + ": not a raw volume file (bad magic)");
  const auto version = get_le<std::uint16_t>(buf.data() + 4);
  if (version != kRawVersion) throw ValidationError(path.string() + ": unsupported version " + std::to_string(version));
  const auto code = get_le<std::uint16_t>(buf.data() + 6);
  if (code != 1 && code != 2) throw ValidationError(path.string() + ": unknown dtype code " + std::to_string(code));
  RawArray a;
  a.dtype = static_cast<DType>(code);
  const auto rank = get_le<std::uint32_t>(buf.data() + 8);
  if (rank < 1 || rank > 4) throw ValidationError(path.string() + ": rank must be 1..4");
  for (std::uint32_t i = 0; i < rank; ++i) a.dims.push_back(get_le<std::uint32_t>(buf.data() + 12 + 4 * i));
  const std::size_t count = element_count(a.dims);
  const std::size_t width = element_bytes(a.dtype);
  if (buf.size() != kRawHeaderBytes + count * width)
    throw ValidationError(path.string() + ": payload length " + std::to_string(buf.size() - kRawHeaderBytes) +
                          " != " + std::to_string(count * width));
  a.values.resize(count);
  const unsigned char* p = buf.data() + kRawHeaderBytes;
  for (std::size_t i = 0; i < count; ++i, p += width)
    a.values[i] = a.dtype == DType::F32 ? double(get_le<float>(p)) : get_le<double>(p);
  return a;
}

json read_sidecar(const std::filesystem::path& path) {
  const auto side = sidecar_path(path);
  if (!std::filesystem::exists(side)) return json::object();
  return read_json_file(side);
}

void write_volume(const std::filesystem::path& path, const IntensityVolume& vol, const json& extra, DType dtype) {
  const auto& s = vol.shape;
  json meta = with_kind(extra, "volume");
  meta["axes"] = "XYZ";
  meta["voxel_size"] = vol.voxel_size;
  write_raw(path, {{std::uint32_t(s.nx), std::uint32_t(s.ny), std::uint32_t(s.nz)}, dtype, vol.data}, meta);
}

IntensityVolume read_volume(const std::filesystem::path& path) {
  auto a = read_raw(path);
  expect_rank(a, 3, path);
  const auto meta = read_sidecar(path);
  expect_kind(meta, "volume", path);
  IntensityVolume vol({int(a.dims[0]), int(a.dims[1]), int(a.dims[2])});
  vol.data = std::move(a.values);
  if (meta.contains("voxel_size")) vol.voxel_size = meta.at("voxel_size").get<std::array<double, 3>>();
  return vol;
}

void write_light_field(const std::filesystem::path& path, const LightFieldStack& lf, const json& extra, DType dtype) {
  json meta = with_kind(extra, "light_field");
  meta["axes"] = "UXY";
  write_raw(path, {{std::uint32_t(lf.views), std::uint32_t(lf.nx), std::uint32_t(lf.ny)}, dtype, lf.data}, meta);
}

LightFieldStack read_light_field(const std::filesystem::path& path) {
  auto a = read_raw(path);
  expect_rank(a, 3, path);
  expect_kind(read_sidecar(path), "light_field", path);
  LightFieldStack lf(int(a.dims[0]), int(a.dims[1]), int(a.dims[2]));
  lf.data = std::move(a.values);
  return lf;
}

void write_psf_stack(const std::filesystem::path& path, const PsfStack& psfs, const json& extra, DType dtype) {
  json meta = with_kind(extra, "psf_stack");
  meta["axes"] = "UZXY";
  write_raw(path,
            {{std::uint32_t(psfs.views), std::uint32_t(psfs.depths), std::uint32_t(psfs.nx), std::uint32_t(psfs.ny)},
             dtype,
             psfs.data},
            meta);
}

PsfStack read_psf_stack(const std::filesystem::path& path) {
  auto a = read_raw(path);
  expect_rank(a, 4, path);
  expect_kind(read_sidecar(path), "psf_stack", path);
  PsfStack psfs(int(a.dims[0]), int(a.dims[1]), int(a.dims[2]), int(a.dims[3]));
  psfs.data = std::move(a.values);
  return psfs;
}

void write_checkpoint(const std::filesystem::path& path, const ReconState& state, const json& extra) {
  const auto& f = state.features;
  const auto& d = state.decoder;
  std::vector<double> payload = f.data;
  const auto dec = d.flatten();
  payload.insert(payload.end(), dec.begin(), dec.end());
  payload.insert(payload.end(), state.zernike.coeffs.begin(), state.zernike.coeffs.end());
  for (bool t : state.zernike.trainable) payload.push_back(t ? 1.0 : 0.0);

  // Optimizer moments follow, one (m, v) pair per group that has taken steps.
  json optimizer = json::object();
  const std::pair<const char*, const AdamMoments*> groups[] = {{"features", &state.optimizer.features},
                                                                {"decoder", &state.optimizer.decoder},
                                                                {"zernike", &state.optimizer.zernike}};
  for (const auto& [name, moments] : groups) {
    if (moments->empty()) continue;
    optimizer[name] = {{"steps", moments->steps}, {"count", moments->m.size()}};
    payload.insert(payload.end(), moments->m.begin(), moments->m.end());
    payload.insert(payload.end(), moments->v.begin(), moments->v.end());
  }

  json meta = with_kind(extra, "checkpoint");
  if (!optimizer.empty()) meta["optimizer"] = optimizer;
  meta["feature_shape"] = {f.shape.nx, f.shape.ny, f.shape.nz};
  meta["channels"] = f.channels;
  meta["scale"] = f.scale;
  meta["hidden"] = d.hidden;
  meta["slope"] = d.slope;
  meta["zernike_order"] = state.zernike.size();
  meta["segments"] = json::array({json{{"name", "features"}, {"count", f.data.size()}},
                                  json{{"name", "decoder"}, {"count", dec.size()}},
                                  json{{"name", "zernike_coeffs"}, {"count", state.zernike.coeffs.size()}},
                                  json{{"name", "zernike_trainable"}, {"count", state.zernike.trainable.size()}}});
  write_raw(path, {{std::uint32_t(payload.size())}, DType::F64, payload}, meta);
}

ReconState read_checkpoint(const std::filesystem::path& path) {
  const auto a = read_raw(path);
  expect_rank(a, 1, path);
  const auto meta = read_sidecar(path);
  if (meta.value("kind", "") != "checkpoint") throw ValidationError(path.string() + ": sidecar is not a checkpoint");
  ReconState s;
  try {
    const auto shape = meta.at("feature_shape").get<std::array<int, 3>>();
    const int channels = meta.at("channels").get<int>();
    s.features = FeatureVolume({shape[0], shape[1], shape[2]}, channels, meta.at("scale").get<int>());
    s.decoder = Decoder(channels, meta.at("hidden").get<int>(), meta.at("slope").get<double>());
    const int k = meta.at("zernike_order").get<int>();
    std::size_t expected = s.features.data.size() + s.decoder.parameter_count() + 2 * std::size_t(k);
    const json optimizer = meta.value("optimizer", json::object());
    for (const auto& [name, group] : optimizer.items()) expected += 2 * group.at("count").get<std::size_t>();
    if (a.values.size() != expected)
      throw ValidationError(path.string() + ": checkpoint payload has " + std::to_string(a.values.size()) +
                            " values, sidecar implies " + std::to_string(expected));
    auto it = a.values.begin();
    std::copy_n(it, s.features.data.size(), s.features.data.begin());
    it += s.features.data.size();
    s.decoder.unflatten({&*it, s.decoder.parameter_count()});
    it += s.decoder.parameter_count();
    s.zernike.coeffs.assign(it, it + k);
    it += k;
    for (int i = 0; i < k; ++i, ++it) s.zernike.trainable.push_back(*it != 0.0);
    const std::pair<const char*, AdamMoments*> groups[] = {
        {"features", &s.optimizer.features}, {"decoder", &s.optimizer.decoder}, {"zernike", &s.optimizer.zernike}};
    for (const auto& [name, moments] : groups) {
      if (!optimizer.contains(name)) continue;
      const auto& group = optimizer.at(name);
      const auto n = group.at("count").get<std::size_t>();
      moments->steps = group.at("steps").get<long long>();
      moments->m.assign(it, it + n);
      it += n;
      moments->v.assign(it, it + n);
      it += n;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": malformed checkpoint sidecar: " + e.what());
  }
  return s;
}

}  // namespace lfm
