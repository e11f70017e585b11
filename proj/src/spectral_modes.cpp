#include "qfreq/spectral_modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qfreq/errors.hpp"
#include "qfreq/kernels.hpp"

namespace qfreq {
namespace {

constexpr double kLn2 = std::numbers::ln2;

void require_same_grid(const FrequencyGrid& a, const FrequencyGrid& b) {
  if (!(a == b)) throw Error(ErrorKind::kIncompatibleGrids, "modes live on different grids");
}

std::vector<cplx> scaled(std::span<const cplx> v, double s) {
  std::vector<cplx> out(v.begin(), v.end());
  for (auto& x : out) x *= s;
  return out;
}

}  // namespace

double omega_from_wavelength(double wavelength_m) {
  if (!(wavelength_m > 0.0)) throw Error(ErrorKind::kInvalidArgument, "wavelength must be positive");
  return 2.0 * kPi * kSpeedOfLight / wavelength_m;
}

double omega_span_from_wavelength(double span_m, double center_wavelength_m) {
  return 2.0 * kPi * kSpeedOfLight * span_m / (center_wavelength_m * center_wavelength_m);
}

double wavelength_span_from_omega(double span_rad_s, double center_wavelength_m) {
  return span_rad_s * center_wavelength_m * center_wavelength_m / (2.0 * kPi * kSpeedOfLight);
}

FrequencyGrid::FrequencyGrid(double omega_start, double omega_step, std::size_t n_points)
    : omega_start_(omega_start), omega_step_(omega_step), n_points_(n_points) {
  if (!(omega_step > 0.0) || !std::isfinite(omega_step)) {
    throw Error(ErrorKind::kInvalidArgument, "omega_step must be positive");
  }
  if (n_points < 2) throw Error(ErrorKind::kInvalidArgument, "grid needs at least 2 points");
}

FrequencyGrid make_grid(double center_omega, double span, std::size_t n_points) {
  if (!(span > 0.0)) throw Error(ErrorKind::kInvalidArgument, "grid span must be positive");
  if (n_points < 2) throw Error(ErrorKind::kInvalidArgument, "grid needs at least 2 points");
  const double step = span / static_cast<double>(n_points - 1);
  return FrequencyGrid(center_omega - 0.5 * span, step, n_points);
}

SpectralMode::SpectralMode(FrequencyGrid grid, std::vector<cplx> amplitude)
    : grid_(grid), amplitude_(std::move(amplitude)) {
  if (amplitude_.size() != grid_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "amplitude length does not match grid");
  }
}

double SpectralMode::norm() const {
  return std::sqrt(kernels::norm_sq(amplitude_) * grid_.omega_step());
}

SpectralMode normalize(const SpectralMode& mode) {
  const double n = mode.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::kDegenerateMask, "mode has zero norm");
  return SpectralMode(mode.grid(), scaled(mode.amplitude(), 1.0 / n));
}

ShaperMask make_mask(FrequencyGrid grid, std::vector<double> amplitude_transmission,
                     std::vector<double> phase) {
  if (amplitude_transmission.size() != grid.size() || phase.size() != grid.size()) {
    throw Error(ErrorKind::kInvalidArgument, "mask vectors must match grid length");
  }
  for (double t : amplitude_transmission) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "amplitude transmission outside [0,1]");
    }
  }
  return ShaperMask{grid, std::move(amplitude_transmission), std::move(phase)};
}

ShaperMask all_pass_mask(const FrequencyGrid& grid) {
  return make_mask(grid, std::vector<double>(grid.size(), 1.0), std::vector<double>(grid.size(), 0.0));
}

ShaperMask pi_phase_mask(const FrequencyGrid& grid, double cut_omega) {
  std::vector<double> phase(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.omega(k) >= cut_omega) phase[k] = kPi;
  }
  return make_mask(grid, std::vector<double>(grid.size(), 1.0), std::move(phase));
}

ShaperMask broadening_mask(const FrequencyGrid& grid, double center, double input_fwhm,
                           double output_fwhm, double clip_halfwidth) {
  if (!(output_fwhm > input_fwhm) || !(input_fwhm > 0.0) || !(clip_halfwidth > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "broadening mask needs 0 < input_fwhm < output_fwhm");
  }
  // Amplitude ratio of two Gaussians, pinned to 1 at the clip radius.
  const double k = 2.0 * kLn2 * (1.0 / (input_fwhm * input_fwhm) - 1.0 / (output_fwhm * output_fwhm));
  std::vector<double> amp(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = std::min(std::abs(grid.omega(i) - center), clip_halfwidth);
    amp[i] = std::exp(k * (x * x - clip_halfwidth * clip_halfwidth));
  }
  return make_mask(grid, std::move(amp), std::vector<double>(grid.size(), 0.0));
}

ShaperMask smooth_mask(const ShaperMask& mask, double resolution_fwhm) {
  if (!(resolution_fwhm > 0.0)) throw Error(ErrorKind::kInvalidArgument, "resolution must be positive");
  const auto& grid = mask.grid;
  const double sigma = resolution_fwhm / (2.0 * std::sqrt(2.0 * kLn2));
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(5.0 * sigma / grid.omega_step()));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double ksum = 0.0;
  for (std::ptrdiff_t j = -half; j <= half; ++j) {
    const double x = static_cast<double>(j) * grid.omega_step() / sigma;
    kernel[static_cast<std::size_t>(j + half)] = std::exp(-0.5 * x * x);
    ksum += kernel[static_cast<std::size_t>(j + half)];
  }
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  std::vector<double> amp(grid.size());
  std::vector<double> phase(grid.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    cplx acc{0.0, 0.0};
    for (std::ptrdiff_t j = -half; j <= half; ++j) {
      // Edge values are held constant outside the grid.
      const auto src = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i + j, 0, n - 1));
      acc += kernel[static_cast<std::size_t>(j + half)] *
             std::polar(mask.amplitude_transmission[src], mask.phase[src]);
    }
    acc /= ksum;
    amp[static_cast<std::size_t>(i)] = std::min(1.0, std::abs(acc));
    phase[static_cast<std::size_t>(i)] = std::arg(acc);
  }
  return make_mask(grid, std::move(amp), std::move(phase));
}

SpectralMode gaussian_mode(const FrequencyGrid& grid, double center, double fwhm, double chirp) {
  if (!(fwhm > 0.0)) throw Error(ErrorKind::kInvalidArgument, "fwhm must be positive");
  if (!grid.contains(center) || !(fwhm > 4.0 * grid.omega_step())) {
    throw Error(ErrorKind::kResolution, "Gaussian not resolvable on grid");
  }
  std::vector<cplx> amp(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid.omega(k) - center;
    const double envelope = std::exp(-2.0 * kLn2 * x * x / (fwhm * fwhm));
    amp[k] = chirp == 0.0 ? cplx(envelope, 0.0) : std::polar(envelope, 0.5 * chirp * x * x);
  }
  return normalize(SpectralMode(grid, std::move(amp)));
}

cplx inner_product(const SpectralMode& a, const SpectralMode& b) {
  require_same_grid(a.grid(), b.grid());
  return kernels::dot_conj(a.amplitude(), b.amplitude()) * a.grid().omega_step();
}

ShapedMode apply_mask(const SpectralMode& mode, const ShaperMask& mask) {
  require_same_grid(mode.grid(), mask.grid);
  std::vector<cplx> transfer(mode.size());
  for (std::size_t k = 0; k < transfer.size(); ++k) {
    transfer[k] = mask.phase[k] == 0.0 ? cplx(mask.amplitude_transmission[k], 0.0)
                                       : std::polar(mask.amplitude_transmission[k], mask.phase[k]);
  }
  std::vector<cplx> out(mode.size());
  kernels::multiply(mode.amplitude(), transfer, out);
  SpectralMode shaped(mode.grid(), std::move(out));
  const double before = mode.norm();
  const double after = shaped.norm();
  if (!(after > 0.0)) throw Error(ErrorKind::kDegenerateMask, "mask blocks the whole mode");
  return ShapedMode{normalize(shaped), (after * after) / (before * before)};
}

double lower_energy_fraction(const SpectralMode& mode, double cut_omega) {
  double below = 0.0;
  double total = 0.0;
  const auto amp = mode.amplitude();
  for (std::size_t k = 0; k < amp.size(); ++k) {
    const double w = std::norm(amp[k]);
    total += w;
    if (mode.grid().omega(k) < cut_omega) below += w;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::kDegenerateSplit, "mode has zero energy");
  return below / total;
}

double energy_quantile_cut(const SpectralMode& mode, double lower_fraction) {
  if (!(lower_fraction > 0.0 && lower_fraction < 1.0)) {
    throw Error(ErrorKind::kDegenerateSplit, "energy fraction must lie in (0,1)");
  }
  const auto amp = mode.amplitude();
  double total = 0.0;
  for (const auto& a : amp) total += std::norm(a);
  if (!(total > 0.0)) throw Error(ErrorKind::kDegenerateSplit, "mode has zero energy");
  // Cut between k and k+1 leaves points 0..k below.
  double running = 0.0;
  std::size_t best = 0;
  double best_err = 2.0;
  for (std::size_t k = 0; k + 1 < amp.size(); ++k) {
    running += std::norm(amp[k]);
    const double err = std::abs(running / total - lower_fraction);
    if (err < best_err) {
      best_err = err;
      best = k;
    }
  }
  const auto& g = mode.grid();
  return 0.5 * (g.omega(best) + g.omega(best + 1));
}

SpectralMode pi_step_mode(const SpectralMode& base, double cut_omega, double t_fraction, double phase_trim) {
  if (!(t_fraction > 0.0 && t_fraction < 1.0)) {
    throw Error(ErrorKind::kDegenerateSplit, "t_fraction must lie in (0,1), got " + std::to_string(t_fraction));
  }
  const auto& grid = base.grid();
  if (!grid.contains(cut_omega)) throw Error(ErrorKind::kInvalidArgument, "cut outside grid");
  const auto amp = base.amplitude();
  double e_hi = 0.0;
  double e_lo = 0.0;
  for (std::size_t k = 0; k < amp.size(); ++k) {
    (grid.omega(k) >= cut_omega ? e_hi : e_lo) += std::norm(amp[k]) * grid.omega_step();
  }
  if (!(e_hi > 1e-300) || !(e_lo > 1e-300)) {
    throw Error(ErrorKind::kDegenerateSplit, "cut leaves one side without energy");
  }
  const double w_hi = std::sqrt(t_fraction / e_hi);
  const cplx w_lo = -std::polar(std::sqrt((1.0 - t_fraction) / e_lo), phase_trim);
  std::vector<cplx> out(amp.size());
  for (std::size_t k = 0; k < amp.size(); ++k) {
    out[k] = amp[k] * (grid.omega(k) >= cut_omega ? w_hi : w_lo);
  }
  return normalize(SpectralMode(grid, std::move(out)));
}

SpectralMode delay_mode(const SpectralMode& mode, double path_delay) {
  if (path_delay == 0.0) return mode;
  const auto& grid = mode.grid();
  const double tau = path_delay / kSpeedOfLight;
  std::vector<cplx> phase(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) phase[k] = std::polar(1.0, grid.omega(k) * tau);
  std::vector<cplx> out(grid.size());
  kernels::multiply(mode.amplitude(), phase, out);
  return SpectralMode(grid, std::move(out));
}

namespace {

// Removes the projections of v onto each basis vector, twice.
void orthogonalize_against(std::vector<cplx>& v, const std::vector<SpectralMode>& basis, double step) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      const cplx c = kernels::dot_conj(b.amplitude(), v) * step;
      kernels::axpy(-c, b.amplitude(), v);
    }
  }
}

}  // namespace

std::vector<SpectralMode> gram_schmidt(std::span<const SpectralMode> modes) {
  std::vector<SpectralMode> out;
  out.reserve(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    if (!out.empty()) require_same_grid(out.front().grid(), m.grid());
    const double step = m.grid().omega_step();
    const double scale = m.norm();
    std::vector<cplx> v(m.amplitude().begin(), m.amplitude().end());
    orthogonalize_against(v, out, step);
    SpectralMode residual(m.grid(), std::move(v));
    if (!(scale > 0.0) || residual.norm() < 1e-10 * std::max(1.0, scale)) {
      throw Error(ErrorKind::kDependentModes, "mode " + std::to_string(i) + " is linearly dependent");
    }
    out.push_back(normalize(residual));
  }
  return out;
}

std::vector<SpectralMode> extend_orthonormal(std::vector<SpectralMode> basis,
                                             std::span<const SpectralMode> candidates, double tol) {
  for (const auto& m : candidates) {
    if (!basis.empty()) require_same_grid(basis.front().grid(), m.grid());
    const double scale = m.norm();
    std::vector<cplx> v(m.amplitude().begin(), m.amplitude().end());
    orthogonalize_against(v, basis, m.grid().omega_step());
    SpectralMode residual(m.grid(), std::move(v));
    if (scale > 0.0 && residual.norm() > tol * scale) basis.push_back(normalize(residual));
  }
  return basis;
}

double OverlapMatrix::deviation_from_identity() const {
  const auto n = entries.rows();
  return (entries - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

OverlapMatrix overlap_matrix(std::span<const SpectralMode> modes) {
  const auto n = static_cast<Eigen::Index>(modes.size());
  OverlapMatrix m{Eigen::MatrixXcd::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const cplx v = inner_product(modes[static_cast<std::size_t>(i)], modes[static_cast<std::size_t>(j)]);
      m.entries(i, j) = v;
      m.entries(j, i) = std::conj(v);
    }
  }
  return m;
}

double intensity_fwhm(const SpectralMode& mode) {
  const auto amp = mode.amplitude();
  const auto& grid = mode.grid();
  std::size_t peak = 0;
  for (std::size_t k = 1; k < amp.size(); ++k) {
    if (std::norm(amp[k]) > std::norm(amp[peak])) peak = k;
  }
  const double half = 0.5 * std::norm(amp[peak]);
  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double yi = std::norm(amp[inside]);
    const double yo = std::norm(amp[outside]);
    const double f = (yi - half) / (yi - yo);
    return grid.omega(inside) + f * (grid.omega(outside) - grid.omega(inside));
  };
  std::size_t lo = peak;
  while (lo > 0 && std::norm(amp[lo - 1]) >= half) --lo;
  std::size_t hi = peak;
  while (hi + 1 < amp.size() && std::norm(amp[hi + 1]) >= half) ++hi;
  if (lo == 0 || hi + 1 == amp.size()) {
    throw Error(ErrorKind::kResolution, "half-maximum not reached inside the grid");
  }
  return crossing(hi, hi + 1) - crossing(lo, lo - 1);
}

SpectralMode resample(const SpectralMode& mode, const FrequencyGrid& target) {
  const auto& src = mode.grid();
  const auto amp = mode.amplitude();
  std::vector<cplx> out(target.size(), cplx{0.0, 0.0});
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double x = (target.omega(k) - src.omega_start()) / src.omega_step();
    if (x < 0.0 || x > static_cast<double>(src.size() - 1)) continue;
    const auto i = std::min(static_cast<std::size_t>(x), src.size() - 2);
    const double f = x - static_cast<double>(i);
    out[k] = (1.0 - f) * amp[i] + f * amp[i + 1];
  }
  return SpectralMode(target, std::move(out));
}

}  // namespace qfreq
