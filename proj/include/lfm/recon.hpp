#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lfm/adam.hpp"
#include "lfm/arrays.hpp"
#include "lfm/field.hpp"
#include "lfm/forward.hpp"
#include "lfm/objective.hpp"
#include "lfm/optics.hpp"

namespace lfm {

struct ReconConfig {
  int iterations = 2000;
  int warmstart_iterations = 200;
  double field_lr = 1e-2;
  double decoder_lr = 1e-3;
  double zernike_lr = 1e-2;
  AdamSettings adam;
  LossWeights weights;
  FftVariant fft_variant = FftVariant::Amplitude;
  bool dao_enabled = true;
  /// Zernike updates start after this fraction of the iterations.
  double dao_warmup_fraction = 0.1;
  int zernike_order = 45;
  int scale = 2;
  int channels = 3;
  int hidden = 32;
  double slope = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adam moments for each parameter group. Empty groups start fresh.
struct OptimizerState {
  AdamMoments features;
  AdamMoments decoder;
  AdamMoments zernike;
};

/// Everything the optimizer updates, including its own moments so that a
/// warm start resumes the optimization rather than restarting it.
struct ReconState {
  FeatureVolume features;
  Decoder decoder;
  ZernikeState zernike;
  OptimizerState optimizer{};
};

struct ReconResult {
  IntensityVolume volume;  // decoded, downsampled to measurement resolution
  ZernikeState zernike_estimate;
  std::vector<LossReport> loss_trace;  // one report per iteration, before its update
  double wall_time = 0.0;              // seconds
  ReconState state;
  /// Start indices i with trace[i + 50].total > trace[i].total.
  std::vector<int> nonmonotone_windows;
};

/// Called once per iteration after the loss is evaluated and before the update.
using IterationObserver = std::function<void(int iteration, const LossReport& report, const ReconState& state)>;

/// Differentiable composition decode -> downsample -> PSF synthesis -> project -> loss.
class ReconObjective {
 public:
  struct Gradients {
    std::vector<double> features;
    Decoder decoder;
    std::vector<double> zernike;  // empty when the aberration is fixed
  };

  ReconObjective(LightFieldStack measurement, std::vector<ComplexPupil> pupils, ZernikePhaseBasis basis,
                 LossWeights weights, FftVariant variant, bool optimize_zernike, int scale);

  /// Loss at `state`; fills `grads` and `volume` when non-null.
  LossReport evaluate(const ReconState& state, Gradients* grads = nullptr, IntensityVolume* volume = nullptr);

  /// The simulated light field at `state`.
  LightFieldStack simulate(const ReconState& state);
  IntensityVolume volume(const ReconState& state) const;

  const LightFieldStack& measurement() const { return measurement_; }
  void set_measurement(LightFieldStack lf);
  VolumeShape volume_shape() const;
  int basis_size() const { return model_.basis().size(); }
  bool optimizes_zernike() const { return optimize_zernike_; }
  const PsfStack& current_psfs() const { return psfs_; }

 private:
  void update_psfs(const ZernikeState& zernike);

  LightFieldStack measurement_;
  PsfModel model_;
  Projector projector_;
  PsfStack psfs_;
  std::optional<std::vector<double>> psf_coeffs_;
  LossWeights weights_;
  FftVariant variant_;
  bool optimize_zernike_;
  int scale_;
  std::array<double, 3> voxel_size_{1.0, 1.0, 1.0};
};

/// Cold-start joint reconstruction of volume, decoder and (optionally) aberration.
ReconResult reconstruct(const LightFieldStack& measurement, const std::vector<ComplexPupil>& pupils,
                        const ZernikePhaseBasis& basis, const ReconConfig& config,
                        const IterationObserver& observer = {});

/// Fine-tunes a previous result on a new frame for config.warmstart_iterations.
ReconResult reconstruct_warmstart(const LightFieldStack& measurement, const ReconResult& previous,
                                  const std::vector<ComplexPupil>& pupils, const ZernikePhaseBasis& basis,
                                  const ReconConfig& config, const IterationObserver& observer = {});

/// Same as reconstruct_warmstart, starting from an explicit state (e.g. a checkpoint).
ReconResult reconstruct_from_state(const LightFieldStack& measurement, ReconState state,
                                   const std::vector<ComplexPupil>& pupils, const ZernikePhaseBasis& basis,
                                   const ReconConfig& config, int iterations, const IterationObserver& observer = {});

struct RldOptions {
  int iterations = 200;
  std::optional<IntensityVolume> init;  // default: uniform, flux-matched
  double epsilon = 1e-12;
  std::function<void(int iteration, const IntensityVolume& estimate)> observer;
};

/// Multi-view Richardson-Lucy: I <- I * A^T(meas / A I) / A^T(1).
IntensityVolume rld(const LightFieldStack& measurement, const PsfStack& psfs, const RldOptions& options = {});

struct GradCheckGroup {
  std::string name;
  bool skipped = false;
  int checked = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double seconds = 0.0;
  bool passed(double tolerance = 1e-5) const;
  std::string str() const;
};

struct GradCheckOptions {
  int nx = 16;
  int ny = 16;
  int nz = 3;
  int views = 3;
  int feature_samples = 512;  // <= 0 checks every feature entry
  double step = 1e-3;
};

/// Compares full-chain analytic gradients against central finite differences
/// on a small random scene built from `seed`.
GradCheckReport gradient_check(const ReconConfig& config, std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace lfm
