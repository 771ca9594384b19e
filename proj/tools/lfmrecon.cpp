// lfmrecon: command-line front end for phantom generation, PSF synthesis,
// projection, reconstruction, the RLD baseline and evaluation.
//
// Exit codes: 0 success, 1 failed check / unexpected error, 2 invalid input,
// 3 numerical divergence.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lfm/config.hpp"
#include "lfm/error.hpp"
#include "lfm/metrics.hpp"
#include "lfm/phantom.hpp"
#include "lfm/raw_io.hpp"
#include "lfm/recon.hpp"
#include "lfm/spectrum.hpp"

namespace {

using nlohmann::json;
using namespace lfm;

constexpr int kExitFailedCheck = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("cannot parse " + what + " '" + s + "'");
}

int parse_int(const std::string& s, const std::string& what) {
  const double v = parse_number(s, what);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ValidationError(what + " must be an integer, got '" + s + "'");
  return static_cast<int>(v);
}

/// "NXxNY" or "NXxNYxNZ".
std::vector<int> parse_dims(const std::string& text, std::size_t count) {
  const auto parts = split(text, 'x');
  if (parts.size() != count)
    throw ValidationError("expected " + std::to_string(count) + " dimensions like 64x64" +
                          (count == 3 ? "x6" : "") + ", got '" + text + "'");
  std::vector<int> dims;
  for (const auto& p : parts) dims.push_back(parse_int(p, "dimension"));
  return dims;
}

/// "4=1.0,5=-0.2" onto a zero state of `order` modes.
ZernikeState parse_zernike(const std::string& text, int order) {
  auto state = ZernikeState::zeros(order);
  for (const auto& term : split(text, ',')) {
    const auto eq = term.find('=');
    if (eq == std::string::npos) throw ValidationError("Zernike terms look like j=value, got '" + term + "'");
    const int j = parse_int(term.substr(0, eq), "Zernike index");
    if (j < 0 || j >= order)
      throw ValidationError("Zernike index " + std::to_string(j) + " outside 0.." + std::to_string(order - 1));
    state.coeffs[j] = parse_number(term.substr(eq + 1), "Zernike coefficient");
  }
  return state;
}

bool parse_switch(const std::string& s) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw ValidationError("expected on|off, got '" + s + "'");
}

/// A PSF sidecar keeps the optics under "imaging"; a bare setup file is accepted too.
ImagingSetup load_setup(const std::filesystem::path& path, std::optional<ZernikeState>* zernike = nullptr) {
  const json doc = read_json_file(path);
  const json& node = doc.contains("imaging") ? doc.at("imaging") : doc;
  ImagingSetup setup;
  try {
    setup = node.get<ImagingSetup>();
    if (zernike && doc.contains("zernike")) *zernike = doc.at("zernike").get<ZernikeState>();
  } catch (const json::exception& e) {
    throw ValidationError("malformed imaging setup in " + path.string() + ": " + e.what());
  }
  setup.validate();
  return setup;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

struct PhantomArgs {
  std::string kind = "beads";
  std::string shape = "64x64x6";
  std::uint64_t seed = 0;
  int count = -1;
  std::string pitches;
  std::string out;
};

int run_phantom(const PhantomArgs& a) {
  PhantomSpec spec;
  spec.kind = parse_phantom_kind(a.kind);
  spec.seed = a.seed;
  if (a.count >= 0) spec.count = a.count;
  if (!a.pitches.empty()) {
    spec.pitches.clear();
    for (const auto& p : split(a.pitches, ',')) spec.pitches.push_back(parse_int(p, "pitch"));
  }
  const auto d = parse_dims(a.shape, 3);
  const auto vol = make_phantom(spec, {d[0], d[1], d[2]});
  write_volume(a.out, vol, {{"phantom", {{"kind", to_string(spec.kind)}, {"seed", spec.seed}, {"count", spec.count}}}});
  std::cout << "wrote " << to_string(spec.kind) << " phantom " << vol.shape.str() << " to " << a.out << "\n";
  return 0;
}

struct PsfArgs {
  std::string grid = "64x64";
  double pixel = 0.3;
  int views = 13;
  std::string depths = "-5,-3,-1,1,3,5";
  std::string zernike;
  int order = 45;
  std::string out;
};

int run_psf(const PsfArgs& a) {
  ImagingSetup setup;
  const auto g = parse_dims(a.grid, 2);
  setup.grid.nx = g[0];
  setup.grid.ny = g[1];
  setup.grid.pixel_size = a.pixel;
  setup.views = ViewSpec::standard(a.views);
  setup.depths.clear();
  for (const auto& d : split(a.depths, ',')) setup.depths.push_back(parse_number(d, "depth"));
  setup.validate();
  if (a.order < 1 || a.order > kMaxZernikeModes) throw ValidationError("--order must lie in 1..66");
  const auto zernike = parse_zernike(a.zernike, a.order);
  PsfModel model(setup.pupils(), setup.views.count(), int(setup.depths.size()), zernike_basis(setup.grid, a.order));
  const auto psfs = model.synthesize(zernike);
  write_psf_stack(a.out, psfs, {{"imaging", setup}, {"zernike", zernike}}, DType::F64);
  std::cout << "wrote PSF stack " << psfs.shape_str() << " to " << a.out << "\n";
  return 0;
}

int run_project(const std::string& volume, const std::string& psf, const std::string& out) {
  const auto vol = read_volume(volume);
  const auto psfs = read_psf_stack(psf);
  const auto lf = project(vol, psfs);
  json extra;
  const json psf_meta = read_sidecar(psf);
  if (psf_meta.contains("imaging")) extra["imaging"] = psf_meta.at("imaging");
  write_light_field(out, lf, extra, DType::F64);
  std::cout << "wrote light field " << lf.shape_str() << " to " << out << "\n";
  return 0;
}

struct ReconArgs {
  std::string lf;
  std::string psf_config;
  std::string config;
  std::string dao;
  std::string fft_variant;
  std::string warmstart;
  int iterations = 0;
  std::string out;
  std::string trace_csv;
  std::string checkpoint;
  int checkpoint_every = 0;
};

int run_reconstruct(const ReconArgs& a) {
  ReconConfig config;
  if (!a.config.empty()) {
    try {
      config = read_json_file(a.config).get<ReconConfig>();
    } catch (const json::exception& e) {
      throw ValidationError("malformed config " + a.config + ": " + e.what());
    }
  }
  if (!a.dao.empty()) config.dao_enabled = parse_switch(a.dao);
  if (!a.fft_variant.empty()) config.fft_variant = parse_fft_variant(a.fft_variant);
  if (a.iterations > 0) {
    if (a.warmstart.empty())
      config.iterations = a.iterations;
    else
      config.warmstart_iterations = a.iterations;
  }
  config.validate();
  if (a.checkpoint_every < 0) throw ValidationError("--checkpoint-every must be >= 0");
  if (a.checkpoint_every > 0 && a.checkpoint.empty()) throw ValidationError("--checkpoint-every needs --checkpoint");

  std::optional<ZernikeState> known;
  const auto setup = load_setup(a.psf_config, &known);
  const auto lf = read_light_field(a.lf);
  const auto pupils = setup.pupils();
  const auto basis = zernike_basis(setup.grid, config.zernike_order);

  std::ofstream trace;
  if (!a.trace_csv.empty()) {
    trace.open(a.trace_csv);
    if (!trace) throw ValidationError("cannot write " + a.trace_csv);
    trace << loss_csv_header() << "\n";
  }
  const IterationObserver observer = [&](int it, const LossReport& r, const ReconState& state) {
    if (trace.is_open()) trace << loss_csv_row(it, r) << "\n" << std::flush;
    if (a.checkpoint_every > 0 && it > 0 && it % a.checkpoint_every == 0)
      write_checkpoint(a.checkpoint, state, {{"iteration", it}});
  };

  ReconState start;
  int iterations = config.iterations;
  if (!a.warmstart.empty()) {
    start = read_checkpoint(a.warmstart);
    start.optimizer = {};  // fine-tuning a new frame, same as reconstruct_warmstart
    iterations = config.warmstart_iterations;
  } else {
    const VolumeShape shape{setup.grid.nx, setup.grid.ny, int(setup.depths.size())};
    auto init = init_field(shape, config.channels, config.scale, config.seed, config.hidden, config.slope);
    start = {std::move(init.features), std::move(init.decoder), ZernikeState::zeros(basis.size())};
    // With DAO off, an aberration recorded in the PSF config is the fixed, known optics.
    // With DAO on the estimate always starts from zero.
    if (known && !config.dao_enabled) {
      if (known->size() > basis.size())
        throw ValidationError("PSF config carries more Zernike modes than zernike_order");
      for (int k = 0; k < known->size(); ++k) start.zernike.coeffs[k] = known->coeffs[k];
    }
  }
  const auto result = reconstruct_from_state(lf, std::move(start), pupils, basis, config, iterations, observer);

  write_volume(a.out, result.volume,
               {{"zernike_estimate", result.zernike_estimate},
                {"iterations", iterations},
                {"final_loss", result.loss_trace.back().total},
                {"wall_time_s", result.wall_time},
                {"config", config}});
  if (!a.checkpoint.empty()) write_checkpoint(a.checkpoint, result.state, {{"iteration", iterations}});
  std::printf("reconstructed %s in %.2f s over %d iterations, final loss %.6e\n", result.volume.shape.str().c_str(),
              result.wall_time, iterations, result.loss_trace.back().total);
  if (!result.nonmonotone_windows.empty())
    std::printf("warning: loss rose across %zu of the 50-iteration windows\n", result.nonmonotone_windows.size());
  return 0;
}

int run_rld(const std::string& lf_path, const std::string& psf_path, int iterations, const std::string& out) {
  RldOptions options;
  options.iterations = iterations;
  const auto vol = rld(read_light_field(lf_path), read_psf_stack(psf_path), options);
  write_volume(out, vol, {{"rld_iterations", iterations}});
  std::cout << "wrote RLD estimate " << vol.shape.str() << " to " << out << "\n";
  return 0;
}

int run_metrics(const std::string& recon_path, const std::string& ref_path, const std::string& csv,
                std::optional<double> peak) {
  const auto recon = read_volume(recon_path);
  const auto ref = read_volume(ref_path);
  const double p = psnr(recon, ref, peak);
  const double used_peak = peak ? *peak : *std::max_element(ref.data.begin(), ref.data.end());
  const bool can_ssim = ref.shape.nx >= 11 && ref.shape.ny >= 11;
  const double s = can_ssim ? ssim(recon, ref) : std::numeric_limits<double>::quiet_NaN();
  const double hb_recon = high_band_energy(recon), hb_ref = high_band_energy(ref);

  std::ostringstream report;
  report.precision(10);
  report << "metric,value,normalization\n";
  report << "psnr_db," << p << ",peak=" << used_peak << (peak ? " (user)" : " (reference max)")
         << "; mean over all voxels; no crop\n";
  report << "ssim," << s << ",11x11 gaussian sigma=1.5; K1=0.01 K2=0.03; range=reference max; valid region; "
         << "mean over z-slices\n";
  report << "high_band_recovery," << (hb_ref > 0 ? hb_recon / hb_ref : std::numeric_limits<double>::quiet_NaN())
         << ",spectral energy at >= 0.5 Nyquist summed over z-slices; recon / reference\n";
  std::cout << report.str();
  if (!csv.empty()) write_text(csv, report.str());
  return 0;
}

int run_spectrum(const std::string& image, const std::string& out, int plane) {
  const auto meta = read_sidecar(image);
  const auto raw = read_raw(image);
  std::vector<double> pixels;
  int nx = 0, ny = 0;
  if (raw.dims.size() == 2) {
    nx = int(raw.dims[0]);
    ny = int(raw.dims[1]);
    pixels = raw.values;
  } else if (meta.value("kind", "") == "light_field") {
    const auto lf = read_light_field(image);
    const int u = plane < 0 ? 0 : plane;
    if (u >= lf.views) throw ValidationError("--plane exceeds the view count");
    nx = lf.nx;
    ny = lf.ny;
    pixels.assign(lf.view(u).begin(), lf.view(u).end());
  } else {
    const auto vol = read_volume(image);
    const int z = plane < 0 ? vol.shape.nz / 2 : plane;
    if (z >= vol.shape.nz) throw ValidationError("--plane exceeds the depth count");
    nx = vol.shape.nx;
    ny = vol.shape.ny;
    pixels = vol.slice(z);
  }
  spectrum_plot(pixels, nx, ny, out);
  std::printf("wrote %dx%d spectrum to %s (high-band ratio %.6e)\n", nx, ny, out.c_str(),
              high_band_ratio(pixels, nx, ny));
  return 0;
}

int run_gradcheck(std::uint64_t seed, const std::string& dao) {
  ReconConfig config;
  if (!dao.empty()) config.dao_enabled = parse_switch(dao);
  const auto report = gradient_check(config, seed);
  std::cout << report.str();
  const bool ok = report.passed(1e-5);
  std::cout << (ok ? "gradient check passed" : "gradient check FAILED") << " (tolerance 1e-5)\n";
  return ok ? 0 : kExitFailedCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Light-field reconstruction workbench"};
  app.require_subcommand(1);

  PhantomArgs ph;
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic volume");
  phantom->add_option("--kind", ph.kind, "beads | bars | filaments")->capture_default_str();
  phantom->add_option("--shape", ph.shape, "NXxNYxNZ")->capture_default_str();
  phantom->add_option("--seed", ph.seed)->capture_default_str();
  phantom->add_option("--count", ph.count, "beads or filaments (default 12)");
  phantom->add_option("--pitches", ph.pitches, "bar pitches in voxels, e.g. 8,4,2");
  phantom->add_option("--out", ph.out)->required();

  PsfArgs ps;
  auto* psf = app.add_subcommand("psf", "Synthesize a PSF stack; its sidecar doubles as --psf-config");
  psf->add_option("--grid", ps.grid, "NXxNY")->capture_default_str();
  psf->add_option("--pixel", ps.pixel, "pixel size in um")->capture_default_str();
  psf->add_option("--views", ps.views, "view count (13 and 35 are ring presets)")->capture_default_str();
  psf->add_option("--depths", ps.depths, "comma-separated depths in um")->capture_default_str();
  psf->add_option("--zernike", ps.zernike, "aberration as j=radians,... (OSA index)");
  psf->add_option("--order", ps.order, "number of Zernike modes")->capture_default_str();
  psf->add_option("--out", ps.out)->required();

  std::string pj_volume, pj_psf, pj_out;
  auto* proj = app.add_subcommand("project", "Forward-project a volume to a light field");
  proj->add_option("--volume", pj_volume)->required();
  proj->add_option("--psf", pj_psf)->required();
  proj->add_option("--out", pj_out)->required();

  ReconArgs ra;
  auto* recon = app.add_subcommand("reconstruct", "Joint volume / aberration reconstruction");
  recon->add_option("--lf", ra.lf)->required();
  recon->add_option("--psf-config", ra.psf_config, "PSF sidecar or imaging setup JSON")->required();
  recon->add_option("--config", ra.config, "ReconConfig JSON");
  recon->add_option("--dao", ra.dao, "on | off");
  recon->add_option("--fft-variant", ra.fft_variant, "complex | amplitude");
  recon->add_option("--warmstart", ra.warmstart, "checkpoint to fine-tune from");
  recon->add_option("--iters", ra.iterations, "override the (warm-start) iteration count");
  recon->add_option("--out", ra.out)->required();
  recon->add_option("--trace-csv", ra.trace_csv);
  recon->add_option("--checkpoint", ra.checkpoint, "final (and periodic) checkpoint path");
  recon->add_option("--checkpoint-every", ra.checkpoint_every, "iterations between checkpoints");

  std::string rl_lf, rl_psf, rl_out;
  int rl_iters = 200;
  auto* rl = app.add_subcommand("rld", "Richardson-Lucy baseline");
  rl->add_option("--lf", rl_lf)->required();
  rl->add_option("--psf", rl_psf)->required();
  rl->add_option("--iters", rl_iters)->capture_default_str();
  rl->add_option("--out", rl_out)->required();

  std::string mt_recon, mt_ref, mt_csv;
  std::optional<double> mt_peak;
  auto* metrics = app.add_subcommand("metrics", "PSNR / SSIM / high-band recovery against a reference");
  metrics->add_option("--recon", mt_recon)->required();
  metrics->add_option("--reference", mt_ref)->required();
  metrics->add_option("--report-csv", mt_csv);
  metrics->add_option("--peak", mt_peak, "PSNR peak (default: reference max)");

  std::string sp_image, sp_out;
  int sp_plane = -1;
  auto* spectrum = app.add_subcommand("spectrum", "Log-magnitude spectrum PNG of one image plane");
  spectrum->add_option("--image", sp_image)->required();
  spectrum->add_option("--out", sp_out)->required();
  spectrum->add_option("--plane", sp_plane, "z-slice or view index (default: centre slice / view 0)");

  std::uint64_t gc_seed = 0;
  std::string gc_dao;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  gc->add_option("--seed", gc_seed)->capture_default_str();
  gc->add_option("--dao", gc_dao, "on | off");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*phantom) return run_phantom(ph);
    if (*psf) return run_psf(ps);
    if (*proj) return run_project(pj_volume, pj_psf, pj_out);
    if (*recon) return run_reconstruct(ra);
    if (*rl) return run_rld(rl_lf, rl_psf, rl_iters, rl_out);
    if (*metrics) return run_metrics(mt_recon, mt_ref, mt_csv, mt_peak);
    if (*spectrum) return run_spectrum(sp_image, sp_out, sp_plane);
    if (*gc) return run_gradcheck(gc_seed, gc_dao);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailedCheck;
  }
  return kExitFailedCheck;
}
