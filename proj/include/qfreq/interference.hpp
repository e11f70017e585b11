#pragma once

// Heralded three-fold coincidence experiments between frequency bins: the
// beam-splitter-free HOM dip, induced emission, and programmable T:R mixing.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfreq/fock_space.hpp"
#include "qfreq/jsa_schmidt.hpp"
#include "qfreq/spectral_modes.hpp"

namespace qfreq {

struct DetectionModel {
  double herald_efficiency = 1.0;
  double long_arm_efficiency = 1.0;
  double short_arm_efficiency = 1.0;

  void validate() const;
};

enum class CoherentBase { kHeralded, kGaussian };

struct CoherentRecipe {
  CoherentBase base = CoherentBase::kHeralded;
  double center = 0.0;     // rad/s, kGaussian only (0 = grid centre)
  double bandwidth = 0.0;  // intensity FWHM, rad/s, kGaussian only
  double chirp = 0.0;      // s^2, kGaussian only
  // Coherent-mode weight above the cut. The cut is placed where the heralded
  // mode carries this fraction below it, so the heralded photon splits at the
  // complementary ratio.
  double split = 0.5;
  double delay_multiplier = 1.0;
  bool pi_shift = true;
  // Puts the coherent photons in an extra orthogonal (polarization-like)
  // mode that can never interfere with the heralded photon.
  bool distinguishable = false;
};

struct SourceSpec {
  PumpModel pump;
  PhaseMatchingModel phase_matching;
  FrequencyGrid signal_grid;
  FrequencyGrid idler_grid;
  std::size_t max_modes = 8;
  double cumulative_weight = 0.9999;
  std::optional<std::size_t> fixed_modes;  // overrides the cumulative rule
};

/// Schmidt structure lifted onto the experiment's mode grid.
struct PreparedSource {
  std::vector<double> coefficients;        // kept r_n; weight of dropped modes is ignored
  std::vector<SpectralMode> signal_modes;  // psi_{s,n} on the mode grid
  std::optional<SchmidtDecomposition> decomposition;
};

PreparedSource prepare_source(const SourceSpec& spec, const FrequencyGrid& mode_grid);
/// Single-mode source emitting into `mode`.
PreparedSource single_mode_source(const SpectralMode& mode);

struct ExperimentSpec {
  FrequencyGrid grid;
  std::optional<SourceSpec> source;
  cplx alpha = 0.0;
  double gamma = 0.0;
  CoherentRecipe coherent;
  std::optional<double> cut_omega;  // overrides the split-derived cut
  DetectionModel detection;
  int max_total_photons = 4;
  int coherent_order = 2;
  bool cross_schmidt_second_order = true;
  double baseline_delay = 120e-6;  // m; |delay| >= this counts as plateau
};

struct Experiment {
  ExperimentSpec spec;
  PreparedSource source;
};

Experiment prepare(const ExperimentSpec& spec);
Experiment prepare(const ExperimentSpec& spec, PreparedSource source);

/// Modes, cut and state of one delay point; exposed for inspection and tests.
struct PointSetup {
  SpectralMode heralded_mode;
  SpectralMode coherent_mode;
  double cut_omega;
  double coherent_t_fraction;  // weight of the coherent mode above the cut
  std::vector<SpectralMode> signal_basis;
  std::vector<std::string> signal_labels;
  std::vector<std::string> idler_labels;
  std::optional<std::string> coherent_label;  // set when distinguishable
  BinUnitary bins;
  std::optional<BinUnitary> coherent_bins;
  RegistryPtr registry;
};

PointSetup setup_point(const Experiment& exp, double delay);
/// Generated state in the signal-mode basis (before the bin change).
MultimodeFockState generated_state(const Experiment& exp, const PointSetup& setup);
/// Generated state rewritten onto the bin-adapted modes.
MultimodeFockState measured_state(const Experiment& exp, const PointSetup& setup);

struct PointResult {
  double coincidence;
  double herald;
};

struct DetectionProbabilities {
  double coincidence;  // herald AND long AND short
  double herald;
};

/// Threshold detection with binomial thinning per arm, normalized by the
/// state norm.
DetectionProbabilities detect(const MultimodeFockState& state, const PointSetup& setup,
                              const DetectionModel& detection);

PointResult run_point(const Experiment& exp, double delay);

struct ScanMetrics {
  double visibility = 0.0;
  double enhancement_ratio = 1.0;
  double baseline = 0.0;
  double extremum = 0.0;
  double classical_limit = 0.5;
  bool beats_classical_limit = false;
};

struct ScanResult {
  std::vector<double> axis;  // delays in metres, or t fractions
  std::vector<double> coincidence;
  std::vector<double> herald;
  std::vector<double> normalized;  // coincidence / baseline (or per-t baseline)
  std::vector<double> t_effective;  // mix scans: realised coherent weight above the cut
  std::vector<double> visibility;   // mix scans: 1 - C(0)/C(plateau) per t
  ScanMetrics metrics;
};

/// Evaluates points concurrently on `threads` workers; output ordering and
/// values do not depend on the thread count.
ScanResult hom_scan(const Experiment& exp, std::span<const double> delays, unsigned threads = 1);
/// Same scan with the pi shift disabled; reports the peak over the plateau.
ScanResult induced_emission_scan(const Experiment& exp, std::span<const double> delays, unsigned threads = 1);
/// Per-t visibility from a zero-delay point and a plateau point.
ScanResult mix_scan(const Experiment& exp, std::span<const double> t_fractions, unsigned threads = 1);

/// <n(n-1)> / <n>^2 of the heralded signal field with the coherent beam off.
double heralded_g2(const Experiment& exp);
/// Bisection for gamma in (0, 0.45) giving heralded_g2 == target.
double calibrate_gain_for_g2(const Experiment& exp, double target);
/// |alpha| with |alpha|^2 = ratio * (herald probability of the pair source alone).
double balanced_alpha(const Experiment& exp, double ratio = 1.0);

double classical_limit();

}  // namespace qfreq
