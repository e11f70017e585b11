#pragma once

// Spectral mode functions on a uniform angular-frequency grid.
//
// All quantities are in SI angular frequency (rad/s); wavelength inputs are
// converted at the boundary with the helpers below. Inner products are
// Riemann sums weighted by the grid step, so a normalized mode satisfies
// sum |a_k|^2 * omega_step == 1.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qfreq {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

/// Angular frequency of a vacuum wavelength given in metres.
double omega_from_wavelength(double wavelength_m);
/// Converts a small wavelength interval around `center_wavelength_m` to the
/// equivalent angular-frequency interval (first-order Jacobian).
double omega_span_from_wavelength(double span_m, double center_wavelength_m);
double wavelength_span_from_omega(double span_rad_s, double center_wavelength_m);

class FrequencyGrid {
 public:
  FrequencyGrid(double omega_start, double omega_step, std::size_t n_points);

  double omega_start() const { return omega_start_; }
  double omega_step() const { return omega_step_; }
  std::size_t size() const { return n_points_; }
  double omega(std::size_t k) const { return omega_start_ + static_cast<double>(k) * omega_step_; }
  double omega_end() const { return omega(n_points_ - 1); }
  double center() const { return 0.5 * (omega_start_ + omega_end()); }
  bool contains(double omega_value) const {
    return omega_value >= omega_start_ && omega_value <= omega_end();
  }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  double omega_start_;
  double omega_step_;
  std::size_t n_points_;
};

/// Grid centred on `center_omega` covering [center - span/2, center + span/2].
FrequencyGrid make_grid(double center_omega, double span, std::size_t n_points);

class SpectralMode {
 public:
  SpectralMode(FrequencyGrid grid, std::vector<cplx> amplitude);

  const FrequencyGrid& grid() const { return grid_; }
  std::span<const cplx> amplitude() const { return amplitude_; }
  cplx operator[](std::size_t k) const { return amplitude_[k]; }
  std::size_t size() const { return amplitude_.size(); }

  /// sqrt(sum |a|^2 * omega_step)
  double norm() const;

 private:
  FrequencyGrid grid_;
  std::vector<cplx> amplitude_;
};

/// Throws degenerate-mask if the mode has zero norm.
SpectralMode normalize(const SpectralMode& mode);

struct ShaperMask {
  FrequencyGrid grid;
  std::vector<double> amplitude_transmission;
  std::vector<double> phase;
};

/// Validates lengths and the [0,1] transmission range.
ShaperMask make_mask(FrequencyGrid grid, std::vector<double> amplitude_transmission,
                     std::vector<double> phase);
ShaperMask all_pass_mask(const FrequencyGrid& grid);
/// pi phase on omega >= cut, unit amplitude.
ShaperMask pi_phase_mask(const FrequencyGrid& grid, double cut_omega);
/// Amplitude mask turning a Gaussian of intensity FWHM `input_fwhm` into one of
/// `output_fwhm` (> input) by attenuating the centre. The transmission rises
/// as an inverted Gaussian and saturates at 1 beyond |omega - center| =
/// clip_halfwidth.
ShaperMask broadening_mask(const FrequencyGrid& grid, double center, double input_fwhm,
                           double output_fwhm, double clip_halfwidth);
/// Convolves the complex transfer function with a Gaussian of the given
/// intensity FWHM, modelling finite shaper resolution.
ShaperMask smooth_mask(const ShaperMask& mask, double resolution_fwhm);

struct ShapedMode {
  SpectralMode mode;
  double transmitted_fraction;  // energy fraction before renormalization
};

/// Normalized Gaussian with intensity FWHM `fwhm` and quadratic spectral
/// phase chirp*(omega-center)^2/2 (chirp = group-delay dispersion in s^2).
SpectralMode gaussian_mode(const FrequencyGrid& grid, double center, double fwhm, double chirp);

cplx inner_product(const SpectralMode& a, const SpectralMode& b);

ShapedMode apply_mask(const SpectralMode& mode, const ShaperMask& mask);

/// Energy of `mode` on omega < cut divided by its total energy.
double lower_energy_fraction(const SpectralMode& mode, double cut_omega);

/// Cut placed midway between two grid points so that the energy below it is
/// as close as possible to `lower_fraction`. The spectral median is
/// energy_quantile_cut(mode, 0.5).
double energy_quantile_cut(const SpectralMode& mode, double lower_fraction);

/// Mode with weight t_fraction above the cut and (1 - t_fraction) below it,
/// the lower part carrying an extra pi phase. Exactly orthogonal to any mode
/// proportional to `base` on each side with the complementary weights; in
/// particular orthogonal to `base` itself when
/// t_fraction == lower_energy_fraction(base, cut_omega). `phase_trim` adds to
/// the pi step on the lower part.
SpectralMode pi_step_mode(const SpectralMode& base, double cut_omega, double t_fraction, double phase_trim = 0.0);

/// Multiplies by exp(i * omega * path_delay / c).
SpectralMode delay_mode(const SpectralMode& mode, double path_delay);

/// Modified Gram-Schmidt with one re-orthogonalization pass. Throws
/// dependent-modes when a residual norm drops below 1e-10.
std::vector<SpectralMode> gram_schmidt(std::span<const SpectralMode> modes);

/// Appends the normalized components of `candidates` orthogonal to the span of
/// `basis`, silently skipping candidates whose residual norm is below `tol`.
/// `basis` must already be orthonormal.
std::vector<SpectralMode> extend_orthonormal(std::vector<SpectralMode> basis,
                                             std::span<const SpectralMode> candidates,
                                             double tol = 1e-8);

struct OverlapMatrix {
  Eigen::MatrixXcd entries;

  /// max |entries - I|
  double deviation_from_identity() const;
};

OverlapMatrix overlap_matrix(std::span<const SpectralMode> modes);

/// Intensity FWHM of |mode|^2, linearly interpolated between grid points.
double intensity_fwhm(const SpectralMode& mode);

/// Linear interpolation of real and imaginary parts onto `target`; zero
/// outside the source grid. Not renormalized.
SpectralMode resample(const SpectralMode& mode, const FrequencyGrid& target);

}  // namespace qfreq
