#include "lfm/config.hpp"

#include <fstream>
#include <set>

#include "lfm/error.hpp"

namespace lfm {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ValidationError(std::string("unknown ") + what + " key '" + key + "'");
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

void ImagingSetup::validate() const {
  grid.validate();
  views.validate();
  if (depths.empty()) throw ValidationError("imaging setup has no depth planes");
}

void to_json(json& j, const GridSpec& g) {
  j = json{{"nx", g.nx},
           {"ny", g.ny},
           {"pixel_size", g.pixel_size},
           {"wavelength", g.wavelength},
           {"numerical_aperture", g.numerical_aperture},
           {"refractive_index", g.refractive_index}};
}

void from_json(const json& j, GridSpec& g) {
  reject_unknown(j, {"nx", "ny", "pixel_size", "wavelength", "numerical_aperture", "refractive_index"}, "grid");
  read_opt(j, "nx", g.nx);
  read_opt(j, "ny", g.ny);
  read_opt(j, "pixel_size", g.pixel_size);
  read_opt(j, "wavelength", g.wavelength);
  read_opt(j, "numerical_aperture", g.numerical_aperture);
  read_opt(j, "refractive_index", g.refractive_index);
}

void to_json(json& j, const ViewSpec& v) {
  j = json{{"offsets", v.offsets}, {"sub_aperture_radius", v.sub_aperture_radius}};
}

void from_json(const json& j, ViewSpec& v) {
  reject_unknown(j, {"offsets", "sub_aperture_radius", "count"}, "views");
  if (j.contains("count")) {
    int n = 0;
    read_opt(j, "count", n);
    v = ViewSpec::standard(n);
  }
  read_opt(j, "offsets", v.offsets);
  read_opt(j, "sub_aperture_radius", v.sub_aperture_radius);
}

void to_json(json& j, const ImagingSetup& s) { j = json{{"grid", s.grid}, {"views", s.views}, {"depths", s.depths}}; }

void from_json(const json& j, ImagingSetup& s) {
  reject_unknown(j, {"grid", "views", "depths"}, "imaging setup");
  if (j.contains("grid")) s.grid = j.at("grid").get<GridSpec>();
  if (j.contains("views")) s.views = j.at("views").get<ViewSpec>();
  read_opt(j, "depths", s.depths);
}

void to_json(json& j, const ZernikeState& z) {
  std::vector<int> mask(z.trainable.begin(), z.trainable.end());
  j = json{{"coeffs", z.coeffs}, {"trainable", mask}};
}

void from_json(const json& j, ZernikeState& z) {
  reject_unknown(j, {"coeffs", "trainable"}, "zernike");
  read_opt(j, "coeffs", z.coeffs);
  std::vector<int> mask;
  read_opt(j, "trainable", mask);
  if (mask.empty()) {
    z.trainable = ZernikeState::zeros(static_cast<int>(z.coeffs.size())).trainable;
  } else {
    if (mask.size() != z.coeffs.size()) throw ValidationError("zernike trainable mask length mismatch");
    z.trainable.assign(mask.begin(), mask.end());
  }
}

void to_json(json& j, const ReconConfig& c) {
  j = json{{"iterations", c.iterations},
           {"warmstart_iterations", c.warmstart_iterations},
           {"field_lr", c.field_lr},
           {"decoder_lr", c.decoder_lr},
           {"zernike_lr", c.zernike_lr},
           {"beta1", c.adam.beta1},
           {"beta2", c.adam.beta2},
           {"epsilon", c.adam.epsilon},
           {"alpha", c.weights.alpha},
           {"beta", c.weights.beta},
           {"gamma", c.weights.gamma},
           {"fft_variant", to_string(c.fft_variant)},
           {"dao_enabled", c.dao_enabled},
           {"dao_warmup_fraction", c.dao_warmup_fraction},
           {"zernike_order", c.zernike_order},
           {"scale", c.scale},
           {"channels", c.channels},
           {"hidden", c.hidden},
           {"slope", c.slope},
           {"seed", c.seed}};
}

void from_json(const json& j, ReconConfig& c) {
  reject_unknown(j,
                 {"iterations", "warmstart_iterations", "field_lr", "decoder_lr", "zernike_lr", "beta1", "beta2",
                  "epsilon", "alpha", "beta", "gamma", "fft_variant", "dao_enabled", "dao_warmup_fraction",
                  "zernike_order", "scale", "channels", "hidden", "slope", "seed"},
                 "config");
  read_opt(j, "iterations", c.iterations);
  read_opt(j, "warmstart_iterations", c.warmstart_iterations);
  read_opt(j, "field_lr", c.field_lr);
  read_opt(j, "decoder_lr", c.decoder_lr);
  read_opt(j, "zernike_lr", c.zernike_lr);
  read_opt(j, "beta1", c.adam.beta1);
  read_opt(j, "beta2", c.adam.beta2);
  read_opt(j, "epsilon", c.adam.epsilon);
  read_opt(j, "alpha", c.weights.alpha);
  read_opt(j, "beta", c.weights.beta);
  read_opt(j, "gamma", c.weights.gamma);
  if (j.contains("fft_variant")) c.fft_variant = parse_fft_variant(j.at("fft_variant").get<std::string>());
  read_opt(j, "dao_enabled", c.dao_enabled);
  read_opt(j, "dao_warmup_fraction", c.dao_warmup_fraction);
  read_opt(j, "zernike_order", c.zernike_order);
  read_opt(j, "scale", c.scale);
  read_opt(j, "channels", c.channels);
  read_opt(j, "hidden", c.hidden);
  read_opt(j, "slope", c.slope);
  read_opt(j, "seed", c.seed);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace lfm
