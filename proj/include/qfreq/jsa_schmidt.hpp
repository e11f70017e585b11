#pragma once

// Joint spectral amplitudes of SPDC photon pairs and their Schmidt
// decomposition.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qfreq/spectral_modes.hpp"

namespace qfreq {

struct PumpModel {
  double center_omega;  // rad/s
  double fwhm;          // intensity FWHM, rad/s
  double chirp = 0.0;   // s^2

  /// Transform-limited Gaussian pulse of intensity FWHM `duration` (s).
  static PumpModel transform_limited(double center_omega, double duration, double chirp = 0.0);
};

enum class PhaseMatchingKind { kGaussianApprox, kSinc, kTabulated };

struct PhaseMatchingModel {
  PhaseMatchingKind kind = PhaseMatchingKind::kGaussianApprox;
  double width = 0.0;       // intensity FWHM across the ridge, rad/s
  double tilt_angle = 0.0;  // ridge direction measured from the signal axis, rad
  // kTabulated only: amplitude on (signal_grid x idler_grid).
  std::optional<Eigen::MatrixXcd> table;
};

class JointSpectralAmplitude {
 public:
  JointSpectralAmplitude(FrequencyGrid signal_grid, FrequencyGrid idler_grid, Eigen::MatrixXcd amplitude);

  const FrequencyGrid& signal_grid() const { return signal_grid_; }
  const FrequencyGrid& idler_grid() const { return idler_grid_; }
  const Eigen::MatrixXcd& amplitude() const { return amplitude_; }

  /// sqrt(sum |A|^2 dws dwi)
  double norm() const;

 private:
  FrequencyGrid signal_grid_;
  FrequencyGrid idler_grid_;
  Eigen::MatrixXcd amplitude_;
};

/// Normalizes; throws empty-jsa for an all-zero amplitude.
JointSpectralAmplitude normalize(const JointSpectralAmplitude& jsa);

/// Pump envelope times phase matching at one (signal, idler) frequency pair,
/// for the analytic phase-matching kinds. Degenerate centre: the ridge is
/// centred on omega_s = omega_i = pump.center_omega / 2.
cplx jsa_value(const PumpModel& pump, const PhaseMatchingModel& pm, double omega_s, double omega_i);

struct JsaBuild {
  JointSpectralAmplitude jsa;
  double clipped_fraction;  // pump-ridge energy estimated to fall outside the grids
};

JsaBuild build_jsa(const PumpModel& pump, const PhaseMatchingModel& pm, const FrequencyGrid& signal_grid,
                   const FrequencyGrid& idler_grid);

/// Interprets a measured intensity matrix as sqrt(JSI) with zero phase, or
/// with the supplied phase table.
JointSpectralAmplitude jsa_from_intensity(const FrequencyGrid& signal_grid, const FrequencyGrid& idler_grid,
                                          const Eigen::MatrixXd& intensity,
                                          const std::optional<Eigen::MatrixXd>& phase = std::nullopt);

struct SchmidtDecomposition {
  std::vector<double> coefficients;  // kept r_n, descending
  std::vector<SpectralMode> signal_modes;
  std::vector<SpectralMode> idler_modes;
  std::size_t n_kept = 0;
  double total_weight = 0.0;         // sum of all r_n^2 before truncation
  double truncation_remainder = 0.0; // sum of dropped r_n^2
  double reconstruction_residual = 0.0;  // Frobenius norm of A - sum_kept
  std::vector<double> all_coefficients;  // every singular value, for reports
};

/// SVD of the grid-weighted amplitude. Keeps max(n_kept, #{r_n >= threshold})
/// modes. Each signal mode is phased so its largest-magnitude sample is real
/// and positive; the paired idler mode absorbs the phase.
SchmidtDecomposition schmidt_decompose(const JointSpectralAmplitude& jsa, std::size_t n_kept,
                                       double threshold);

/// Number of modes to keep: smallest n with cumulative weight >= `cumulative`,
/// capped at `max_modes`.
std::size_t default_kept_modes(std::span<const double> coefficients, double cumulative = 0.9999,
                               std::size_t max_modes = 8);

double purity(const SchmidtDecomposition& d);
double schmidt_number(const SchmidtDecomposition& d);

/// Evaluates psi_{s,n}(omega) = (1/r_n) sum_i A(omega, omega_i) conj(psi_{i,n}(omega_i)) dwi
/// on a finer signal grid for analytic phase matching; tabulated JSAs fall
/// back to linear resampling. Results are normalized.
std::vector<SpectralMode> lift_signal_modes(const PumpModel& pump, const PhaseMatchingModel& pm,
                                            const SchmidtDecomposition& d, const FrequencyGrid& target);

struct ModeProjection {
  std::vector<cplx> coefficients;      // <basis_k | psi>
  double remainder_coefficient = 0.0;  // >= 0
  std::optional<SpectralMode> remainder_mode;  // empty when the remainder vanishes
};

/// Projects an arbitrary mode onto an orthonormal basis. Throws invalid-basis
/// if the basis overlap matrix deviates from identity by more than 1e-8.
ModeProjection project_onto(const SpectralMode& mode, std::span<const SpectralMode> basis);

ModeProjection project_mode(const SchmidtDecomposition& d, std::size_t n, std::span<const SpectralMode> basis);

}  // namespace qfreq
