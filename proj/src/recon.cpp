#include "lfm/recon.hpp"

#include <chrono>
#include <cmath>

#include "lfm/error.hpp"

namespace lfm {

void ReconConfig::validate() const {
  if (iterations < 1) throw ValidationError("iterations must be >= 1");
  if (warmstart_iterations < 1) throw ValidationError("warmstart_iterations must be >= 1");
  if (!(field_lr > 0.0) || !(decoder_lr > 0.0) || !(zernike_lr > 0.0))
    throw ValidationError("learning rates must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0))
    throw ValidationError("Adam moments must lie in [0, 1) and epsilon must be positive");
  if (!(dao_warmup_fraction >= 0.0 && dao_warmup_fraction <= 1.0))
    throw ValidationError("dao_warmup_fraction must lie in [0, 1]");
  if (zernike_order < 1 || zernike_order > kMaxZernikeModes)
    throw ValidationError("zernike_order must lie in [1, " + std::to_string(kMaxZernikeModes) + "]");
  if (scale < 1 || channels < 1 || hidden < 1) throw ValidationError("scale, channels and hidden must be >= 1");
  if (!(slope >= 0.0 && slope < 1.0)) throw ValidationError("leaky ReLU slope must lie in [0, 1)");
  weights.validate();
}

namespace {

PsfModel make_model(std::vector<ComplexPupil> pupils, ZernikePhaseBasis basis) {
  if (pupils.empty()) throw ValidationError("no pupils given");
  const int views = pupils.back().view + 1;
  const int depths = static_cast<int>(pupils.size()) / views;
  return PsfModel(std::move(pupils), views, depths, std::move(basis));
}

}  // namespace

ReconObjective::ReconObjective(LightFieldStack measurement, std::vector<ComplexPupil> pupils, ZernikePhaseBasis basis,
                               LossWeights weights, FftVariant variant, bool optimize_zernike, int scale)
    : measurement_(std::move(measurement)),
      model_(make_model(std::move(pupils), std::move(basis))),
      projector_(delta_psfs(model_.views(), model_.depths(), model_.basis().grid.nx, model_.basis().grid.ny)),
      weights_(weights),
      variant_(variant),
      optimize_zernike_(optimize_zernike),
      scale_(scale) {
  weights_.validate();
  if (scale_ < 1) throw ValidationError("super-sampling scale must be >= 1");
  set_measurement(measurement_);
  const auto& grid = model_.basis().grid;
  voxel_size_ = {grid.pixel_size, grid.pixel_size, 1.0};
  if (model_.depths() > 1)
    voxel_size_[2] = std::abs(model_.pupils()[1].depth - model_.pupils()[0].depth);
}

void ReconObjective::set_measurement(LightFieldStack lf) {
  const auto& grid = model_.basis().grid;
  if (lf.views != model_.views() || lf.nx != grid.nx || lf.ny != grid.ny)
    throw ValidationError("measurement shape " + lf.shape_str() + " does not match " +
                          std::to_string(model_.views()) + " views on a " + std::to_string(grid.nx) + "x" +
                          std::to_string(grid.ny) + " grid");
  for (double v : lf.data)
    if (!std::isfinite(v)) throw ValidationError("measurement contains non-finite values");
  measurement_ = std::move(lf);
}

VolumeShape ReconObjective::volume_shape() const {
  return {model_.basis().grid.nx, model_.basis().grid.ny, model_.depths()};
}

void ReconObjective::update_psfs(const ZernikeState& zernike) {
  if (psf_coeffs_ && *psf_coeffs_ == zernike.coeffs) return;
  psfs_ = model_.synthesize(zernike);
  projector_.set_psfs(psfs_);
  psf_coeffs_ = zernike.coeffs;
}

IntensityVolume ReconObjective::volume(const ReconState& state) const {
  auto vol = downsample(decode(state.features, state.decoder), scale_);
  vol.voxel_size = voxel_size_;
  return vol;
}

LightFieldStack ReconObjective::simulate(const ReconState& state) {
  update_psfs(state.zernike);
  return projector_.forward(volume(state));
}

LossReport ReconObjective::evaluate(const ReconState& state, Gradients* grads, IntensityVolume* volume_out) {
  const auto expected = volume_shape();
  const VolumeShape super{expected.nx * scale_, expected.ny * scale_, expected.nz * scale_};
  if (state.features.shape != super)
    throw ValidationError("feature grid " + state.features.shape.str() + " does not match expected " + super.str());

  const auto super_vol = decode(state.features, state.decoder);
  auto vol = downsample(super_vol, scale_);
  vol.voxel_size = voxel_size_;
  update_psfs(state.zernike);
  const auto sim = projector_.forward(vol);
  auto loss = total_loss(sim, measurement_, vol, weights_, variant_);

  if (grads) {
    auto grad_vol = projector_.adjoint(loss.lf_gradient);
    for (std::size_t i = 0; i < grad_vol.data.size(); ++i) grad_vol.data[i] += loss.volume_gradient.data[i];
    auto field_grad = decode_vjp(state.features, state.decoder, downsample_vjp(grad_vol, scale_));
    grads->features = std::move(field_grad.features.data);
    grads->decoder = std::move(field_grad.decoder);
    if (optimize_zernike_)
      grads->zernike = model_.vjp(projector_.psf_gradient(loss.lf_gradient));
    else
      grads->zernike.clear();
  }
  if (volume_out) *volume_out = std::move(vol);
  return loss.report;
}

namespace {

ReconResult run(ReconObjective& objective, ReconState state, const ReconConfig& config, int iterations,
                const IterationObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  // Moments live in the state, so observers and checkpoints always see them current.
  const Adam feature_opt(0, config.field_lr, config.adam);
  const Adam decoder_opt(0, config.decoder_lr, config.adam);
  const Adam zernike_opt(0, config.zernike_lr, config.adam);
  auto& moments = state.optimizer;
  // Zernike updates wait until the volume has had a share of the cold-start budget,
  // counted in optimizer steps, so resuming a checkpoint continues the same schedule
  // and a short fine-tune from fresh moments keeps the aberration it inherited.
  const long long warmup = static_cast<long long>(std::ceil(config.dao_warmup_fraction * config.iterations));

  ReconResult result;
  result.loss_trace.reserve(iterations);
  ReconObjective::Gradients grads;
  for (int it = 0; it < iterations; ++it) {
    const auto report = objective.evaluate(state, &grads);
    if (!std::isfinite(report.total)) throw DivergenceError(it);
    result.loss_trace.push_back(report);
    if (observer) observer(it, report, state);

    feature_opt.step(state.features.data, grads.features, moments.features);
    auto params = state.decoder.flatten();
    decoder_opt.step(params, grads.decoder.flatten(), moments.decoder);
    state.decoder.unflatten(params);
    if (objective.optimizes_zernike() && moments.features.steps > warmup)
      zernike_opt.step(state.zernike.coeffs, grads.zernike, moments.zernike, &state.zernike.trainable);
  }

  result.volume = objective.volume(state);
  for (double v : result.volume.data)
    if (!std::isfinite(v)) throw DivergenceError(iterations);
  result.zernike_estimate = state.zernike;
  result.state = std::move(state);
  constexpr int kWindow = 50;
  for (int i = 0; i + kWindow < int(result.loss_trace.size()); ++i)
    if (result.loss_trace[i + kWindow].total > result.loss_trace[i].total) result.nonmonotone_windows.push_back(i);
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

ReconResult reconstruct(const LightFieldStack& measurement, const std::vector<ComplexPupil>& pupils,
                        const ZernikePhaseBasis& basis, const ReconConfig& config, const IterationObserver& observer) {
  config.validate();
  ReconObjective objective(measurement, pupils, basis, config.weights, config.fft_variant, config.dao_enabled,
                           config.scale);
  auto init = init_field(objective.volume_shape(), config.channels, config.scale, config.seed, config.hidden,
                         config.slope);
  ReconState state{std::move(init.features), std::move(init.decoder), ZernikeState::zeros(basis.size())};
  return run(objective, std::move(state), config, config.iterations, observer);
}

ReconResult reconstruct_from_state(const LightFieldStack& measurement, ReconState state,
                                   const std::vector<ComplexPupil>& pupils, const ZernikePhaseBasis& basis,
                                   const ReconConfig& config, int iterations, const IterationObserver& observer) {
  config.validate();
  if (iterations < 1) throw ValidationError("iterations must be >= 1");
  const int scale = state.features.scale;
  ReconObjective objective(measurement, pupils, basis, config.weights, config.fft_variant, config.dao_enabled,
                           scale);
  const auto shape = objective.volume_shape();
  const VolumeShape super{shape.nx * scale, shape.ny * scale, shape.nz * scale};
  if (state.features.shape != super || state.features.data.size() != super.size() * state.features.channels)
    throw ValidationError("previous feature grid " + state.features.shape.str() + " is incompatible with " +
                          super.str());
  state.decoder.validate();
  if (state.decoder.inputs != state.features.channels)
    throw ValidationError("previous decoder input width does not match its feature channels");
  if (state.zernike.size() != basis.size() || state.zernike.trainable.size() != state.zernike.coeffs.size())
    throw ValidationError("previous Zernike state has " + std::to_string(state.zernike.size()) +
                          " modes, basis has " + std::to_string(basis.size()));
  const std::pair<const AdamMoments*, std::size_t> groups[] = {{&state.optimizer.features, state.features.data.size()},
                                                                {&state.optimizer.decoder, state.decoder.parameter_count()},
                                                                {&state.optimizer.zernike, state.zernike.coeffs.size()}};
  for (const auto& [moments, size] : groups)
    if (!moments->empty() && (moments->m.size() != size || moments->v.size() != size))
      throw ValidationError("previous optimizer moments do not match the parameter count " + std::to_string(size));
  return run(objective, std::move(state), config, iterations, observer);
}

ReconResult reconstruct_warmstart(const LightFieldStack& measurement, const ReconResult& previous,
                                  const std::vector<ComplexPupil>& pupils, const ZernikePhaseBasis& basis,
                                  const ReconConfig& config, const IterationObserver& observer) {
  // A new frame gets a fresh optimizer: stale moments slow the adaptation down.
  ReconState state = previous.state;
  state.optimizer = {};
  return reconstruct_from_state(measurement, std::move(state), pupils, basis, config, config.warmstart_iterations,
                                observer);
}

}  // namespace lfm
