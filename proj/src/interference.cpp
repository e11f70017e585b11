#include "qfreq/interference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>

#include "qfreq/errors.hpp"

namespace qfreq {
namespace {

constexpr const char* kCoherentPolLabel = "coherent-pol";

double click(int photons, double efficiency) {
  if (photons == 0) return 0.0;
  if (efficiency == 1.0) return 1.0;
  return 1.0 - std::pow(1.0 - efficiency, photons);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers, striding so each
// index is computed exactly once; results land by index.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct StepSetting {
  double t_fraction;
  double phase_trim;
};

// Weight above the cut and extra step phase that make
// pi_step_mode(base, cut, t, trim) orthogonal to `target`. For target == base
// this is t = lower_energy_fraction(base, cut) with no trim.
StepSetting orthogonalizing_step(const SpectralMode& target, const SpectralMode& base, double cut) {
  cplx over_hi{0.0, 0.0}, over_lo{0.0, 0.0};
  double e_hi = 0.0, e_lo = 0.0;
  for (std::size_t k = 0; k < base.size(); ++k) {
    const cplx o = std::conj(target[k]) * base[k];
    const double e = std::norm(base[k]);
    if (base.grid().omega(k) >= cut) {
      over_hi += o;
      e_hi += e;
    } else {
      over_lo += o;
      e_lo += e;
    }
  }
  if (!(e_hi > 0.0 && e_lo > 0.0)) throw Error(ErrorKind::kDegenerateSplit, "coherent base lies in one bin");
  // <target|g1> = sqrt(t) a - e^{i trim} sqrt(1 - t) b
  const cplx a = over_hi / std::sqrt(e_hi);
  const cplx b = over_lo / std::sqrt(e_lo);
  const double t = std::norm(b) / (std::norm(a) + std::norm(b));
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::kDegenerateSplit, "coherent base does not overlap both bins");
  return StepSetting{t, std::arg(a) - std::arg(b)};
}

void require_strictly_monotone(std::span<const double> axis) {
  if (axis.empty()) throw Error(ErrorKind::kInvalidArgument, "empty scan axis");
  bool inc = true;
  bool dec = true;
  for (std::size_t i = 1; i < axis.size(); ++i) {
    inc = inc && axis[i] > axis[i - 1];
    dec = dec && axis[i] < axis[i - 1];
  }
  if (!inc && !dec) throw Error(ErrorKind::kInvalidArgument, "scan axis must be strictly monotone");
}

void fill_metrics(ScanResult& r, std::span<const std::size_t> plateau, bool peak) {
  if (plateau.empty()) {
    throw Error(ErrorKind::kCannotNormalize, "scan has no plateau point beyond the baseline delay");
  }
  double baseline = 0.0;
  for (auto i : plateau) baseline += r.coincidence[i];
  baseline /= static_cast<double>(plateau.size());
  const auto [lo, hi] = std::minmax_element(r.coincidence.begin(), r.coincidence.end());
  auto& m = r.metrics;
  m.baseline = baseline;
  m.extremum = peak ? *hi : *lo;
  if (baseline == 0.0) {
    if (*hi != 0.0) throw Error(ErrorKind::kCannotNormalize, "zero baseline with nonzero coincidences");
    m.visibility = 0.0;
    m.enhancement_ratio = 1.0;
    r.normalized.assign(r.coincidence.size(), 1.0);
  } else {
    m.visibility = (baseline - *lo) / baseline;
    m.enhancement_ratio = *hi / baseline;
    r.normalized.clear();
    for (double c : r.coincidence) r.normalized.push_back(c / baseline);
  }
  m.classical_limit = classical_limit();
  m.beats_classical_limit = m.visibility > m.classical_limit;
}

ScanResult delay_scan(const Experiment& exp, std::span<const double> delays, unsigned threads, bool peak) {
  require_strictly_monotone(delays);
  ScanResult r;
  r.axis.assign(delays.begin(), delays.end());
  r.coincidence.resize(delays.size());
  r.herald.resize(delays.size());
  parallel_for(delays.size(), threads, [&](std::size_t i) {
    const auto p = run_point(exp, delays[i]);
    r.coincidence[i] = p.coincidence;
    r.herald[i] = p.herald;
  });
  std::vector<std::size_t> plateau;
  const double edge = exp.spec.baseline_delay * (1.0 - 1e-12);
  for (std::size_t i = 0; i < delays.size(); ++i) {
    if (std::abs(delays[i]) >= edge) plateau.push_back(i);
  }
  fill_metrics(r, plateau, peak);
  return r;
}

}  // namespace

void DetectionModel::validate() const {
  for (double e : {herald_efficiency, long_arm_efficiency, short_arm_efficiency}) {
    if (!(e > 0.0 && e <= 1.0)) throw Error(ErrorKind::kInvalidArgument, "efficiencies must lie in (0,1]");
  }
}

PreparedSource prepare_source(const SourceSpec& spec, const FrequencyGrid& mode_grid) {
  const auto built = build_jsa(spec.pump, spec.phase_matching, spec.signal_grid, spec.idler_grid);
  const std::size_t cap = spec.fixed_modes.value_or(spec.max_modes);
  auto d = schmidt_decompose(built.jsa, std::max<std::size_t>(cap, 1), std::numeric_limits<double>::infinity());
  const std::size_t keep =
      spec.fixed_modes ? *spec.fixed_modes : default_kept_modes(d.all_coefficients, spec.cumulative_weight, cap);
  if (keep < d.n_kept) {
    d.coefficients.resize(keep);
    d.signal_modes.resize(keep, d.signal_modes.front());
    d.idler_modes.resize(keep, d.idler_modes.front());
    d.n_kept = keep;
    d.truncation_remainder = 0.0;
    for (std::size_t n = keep; n < d.all_coefficients.size(); ++n) {
      d.truncation_remainder += d.all_coefficients[n] * d.all_coefficients[n];
    }
    d.reconstruction_residual = std::sqrt(d.truncation_remainder);
  }
  PreparedSource src;
  src.coefficients = d.coefficients;
  src.signal_modes = lift_signal_modes(spec.pump, spec.phase_matching, d, mode_grid);
  src.decomposition = std::move(d);
  return src;
}

PreparedSource single_mode_source(const SpectralMode& mode) {
  PreparedSource src;
  src.coefficients = {1.0};
  src.signal_modes = {normalize(mode)};
  return src;
}

Experiment prepare(const ExperimentSpec& spec) {
  if (!spec.source) throw Error(ErrorKind::kInvalidArgument, "experiment has no source description");
  return prepare(spec, prepare_source(*spec.source, spec.grid));
}

Experiment prepare(const ExperimentSpec& spec, PreparedSource source) {
  spec.detection.validate();
  if (source.signal_modes.empty() || source.signal_modes.size() != source.coefficients.size()) {
    throw Error(ErrorKind::kInvalidArgument, "source needs one coefficient per Schmidt mode");
  }
  if (!(source.signal_modes.front().grid() == spec.grid)) {
    throw Error(ErrorKind::kIncompatibleGrids, "source modes are not on the experiment grid");
  }
  if (!(spec.baseline_delay > 0.0)) throw Error(ErrorKind::kInvalidArgument, "baseline delay must be positive");
  return Experiment{spec, std::move(source)};
}

PointSetup setup_point(const Experiment& exp, double delay) {
  const auto& spec = exp.spec;
  const auto& rec = spec.coherent;
  const SpectralMode& heralded = exp.source.signal_modes.front();
  const double cut = spec.cut_omega ? *spec.cut_omega : energy_quantile_cut(heralded, rec.split);

  SpectralMode base = heralded;
  if (rec.base == CoherentBase::kGaussian) {
    base = gaussian_mode(spec.grid, rec.center != 0.0 ? rec.center : spec.grid.center(), rec.bandwidth, rec.chirp);
  }
  SpectralMode shaped = base;
  double t_fraction = 1.0 - lower_energy_fraction(base, cut);
  if (rec.pi_shift) {
    if (rec.base == CoherentBase::kHeralded) {
      t_fraction = lower_energy_fraction(base, cut);
      shaped = pi_step_mode(base, cut, t_fraction);
    } else {
      const auto step = orthogonalizing_step(heralded, base, cut);
      t_fraction = step.t_fraction;
      shaped = pi_step_mode(base, cut, step.t_fraction, step.phase_trim);
    }
  }
  SpectralMode coherent = delay_mode(shaped, delay * rec.delay_multiplier);

  // Signal basis: g1, then g2 and each Schmidt mode's component outside the
  // span so far. A candidate already in the span (g2 == g1 without the pi
  // shift, psi_0 == g2) adds nothing.
  std::vector<SpectralMode> basis;
  std::vector<std::string> signal_labels;
  auto append = [&](const SpectralMode& m, const std::string& label) {
    const std::size_t before = basis.size();
    basis = extend_orthonormal(std::move(basis), std::span<const SpectralMode>(&m, 1), 1e-8);
    if (basis.size() > before) signal_labels.push_back(label);
  };
  if (!rec.distinguishable) append(coherent, "signal-g1");
  append(heralded, "signal-g2");
  for (std::size_t n = 0; n < exp.source.signal_modes.size(); ++n) {
    append(exp.source.signal_modes[n], "signal-e-" + std::to_string(n));
  }

  std::vector<std::string> idler_labels;
  for (std::size_t n = 0; n < exp.source.signal_modes.size(); ++n) idler_labels.push_back("idler-" + std::to_string(n));

  auto bins = build_bin_unitary(basis, cut, signal_labels, "bin");
  std::optional<BinUnitary> coherent_bins;
  std::optional<std::string> coherent_label;
  if (rec.distinguishable) {
    coherent_label = kCoherentPolLabel;
    const std::vector<SpectralMode> single{coherent};
    const std::vector<std::string> label{kCoherentPolLabel};
    coherent_bins = build_bin_unitary(single, cut, label, "pol");
  }

  std::vector<std::string> labels = signal_labels;
  if (coherent_label) labels.push_back(*coherent_label);
  labels.insert(labels.end(), idler_labels.begin(), idler_labels.end());
  labels.insert(labels.end(), bins.change.to_labels.begin(), bins.change.to_labels.end());
  if (coherent_bins) {
    labels.insert(labels.end(), coherent_bins->change.to_labels.begin(), coherent_bins->change.to_labels.end());
  }

  return PointSetup{heralded,
                    coherent,
                    cut,
                    t_fraction,
                    std::move(basis),
                    std::move(signal_labels),
                    std::move(idler_labels),
                    coherent_label,
                    std::move(bins),
                    std::move(coherent_bins),
                    make_registry(std::move(labels))};
}

MultimodeFockState generated_state(const Experiment& exp, const PointSetup& setup) {
  const auto& spec = exp.spec;
  const std::string& coherent_label = setup.coherent_label ? *setup.coherent_label : setup.signal_labels.front();
  auto state = weak_coherent(setup.registry, coherent_label, spec.alpha, spec.coherent_order, spec.max_total_photons);

  for (std::size_t n = 0; n < exp.source.signal_modes.size(); ++n) {
    SqueezerSpec sq;
    sq.gain = spec.gamma * exp.source.coefficients[n];
    sq.schmidt_index = n;
    sq.signal_labels = setup.signal_labels;
    sq.signal_projection = project_onto(exp.source.signal_modes[n], setup.signal_basis);
    if (sq.signal_projection.remainder_coefficient > 1e-6) {
      throw Error(ErrorKind::kNumeric, "Schmidt mode " + std::to_string(n) + " not captured by the signal basis");
    }
    // The basis spans every Schmidt mode by construction; what is left is round-off.
    sq.signal_projection.remainder_coefficient = 0.0;
    sq.signal_projection.remainder_mode.reset();
    sq.idler_label = setup.idler_labels[n];
    state = apply_squeezer(state, sq);
  }

  if (!spec.cross_schmidt_second_order && setup.idler_labels.size() > 1) {
    std::vector<std::size_t> idlers;
    for (const auto& l : setup.idler_labels) idlers.push_back(setup.registry->index_of(l));
    MultimodeFockState filtered(state.registry(), state.max_total_photons());
    filtered.add_truncated_weight(state.truncated_weight());
    for (const auto& [occ, amp] : state.terms()) {
      int occupied = 0;
      for (auto i : idlers) occupied += occ[i] > 0 ? 1 : 0;
      if (occupied <= 1) filtered.add(occ, amp);
    }
    state = std::move(filtered);
  }
  return state;
}

MultimodeFockState measured_state(const Experiment& exp, const PointSetup& setup) {
  auto state = change_basis(generated_state(exp, setup), setup.bins.change);
  if (setup.coherent_bins) state = change_basis(state, setup.coherent_bins->change);
  return state;
}

DetectionProbabilities detect(const MultimodeFockState& state, const PointSetup& setup,
                              const DetectionModel& detection) {
  const auto& reg = *state.registry();
  std::vector<std::size_t> idlers;
  std::vector<std::size_t> long_modes;
  std::vector<std::size_t> short_modes;
  for (const auto& l : setup.idler_labels) idlers.push_back(reg.index_of(l));
  auto add_bins = [&](const BinUnitary& b) {
    for (std::size_t j = 0; j < b.bins.size(); ++j) {
      (b.bins[j] == Bin::kLong ? long_modes : short_modes).push_back(reg.index_of(b.change.to_labels[j]));
    }
  };
  add_bins(setup.bins);
  if (setup.coherent_bins) add_bins(*setup.coherent_bins);

  double total = 0.0;
  double herald = 0.0;
  double coincidence = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    const double w = std::norm(amp);
    int ni = 0, nl = 0, ns = 0;
    for (auto i : idlers) ni += occ[i];
    for (auto i : long_modes) nl += occ[i];
    for (auto i : short_modes) ns += occ[i];
    total += w;
    const double ph = click(ni, detection.herald_efficiency);
    herald += w * ph;
    coincidence += w * ph * click(nl, detection.long_arm_efficiency) * click(ns, detection.short_arm_efficiency);
  }
  if (!(total > 0.0)) throw Error(ErrorKind::kNumeric, "state has zero norm");
  return DetectionProbabilities{coincidence / total, herald / total};
}

PointResult run_point(const Experiment& exp, double delay) {
  const auto setup = setup_point(exp, delay);
  const auto probs = detect(measured_state(exp, setup), setup, exp.spec.detection);
  return PointResult{probs.coincidence, probs.herald};
}

ScanResult hom_scan(const Experiment& exp, std::span<const double> delays, unsigned threads) {
  return delay_scan(exp, delays, threads, false);
}

ScanResult induced_emission_scan(const Experiment& exp, std::span<const double> delays, unsigned threads) {
  Experiment off = exp;
  off.spec.coherent.pi_shift = false;
  return delay_scan(off, delays, threads, true);
}

ScanResult mix_scan(const Experiment& exp, std::span<const double> t_fractions, unsigned threads) {
  require_strictly_monotone(t_fractions);
  for (double t : t_fractions) {
    if (!(t > 0.0 && t < 1.0)) {
      throw Error(ErrorKind::kDegenerateSplit, "split ratios must lie in (0,1), got " + std::to_string(t));
    }
  }
  const std::size_t n = t_fractions.size();
  ScanResult r;
  r.axis.assign(t_fractions.begin(), t_fractions.end());
  r.coincidence.resize(n);
  r.herald.resize(n);
  r.normalized.resize(n);
  r.t_effective.resize(n);
  std::vector<double> baselines(n);
  parallel_for(n, threads, [&](std::size_t i) {
    Experiment e = exp;
    e.spec.coherent.split = t_fractions[i];
    const auto setup = setup_point(e, 0.0);
    const auto zero = detect(measured_state(e, setup), setup, e.spec.detection);
    const auto far = run_point(e, e.spec.baseline_delay);
    r.coincidence[i] = zero.coincidence;
    r.herald[i] = zero.herald;
    r.t_effective[i] = setup.coherent_t_fraction;
    baselines[i] = far.coincidence;
  });
  r.visibility.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(baselines[i] > 0.0)) throw Error(ErrorKind::kCannotNormalize, "zero plateau coincidence");
    r.normalized[i] = r.coincidence[i] / baselines[i];
    r.visibility[i] = 1.0 - r.normalized[i];
  }
  const auto best = std::max_element(r.visibility.begin(), r.visibility.end()) - r.visibility.begin();
  r.metrics.visibility = r.visibility[static_cast<std::size_t>(best)];
  r.metrics.baseline = baselines[static_cast<std::size_t>(best)];
  r.metrics.extremum = r.coincidence[static_cast<std::size_t>(best)];
  r.metrics.beats_classical_limit = r.metrics.visibility > r.metrics.classical_limit;
  return r;
}

double heralded_g2(const Experiment& exp) {
  Experiment e = exp;
  e.spec.alpha = 0.0;
  const auto setup = setup_point(e, 0.0);
  const auto state = generated_state(e, setup);
  const auto& reg = *state.registry();
  std::vector<std::size_t> signal;
  std::vector<std::size_t> idlers;
  for (const auto& l : setup.signal_labels) signal.push_back(reg.index_of(l));
  for (const auto& l : setup.idler_labels) idlers.push_back(reg.index_of(l));
  double herald = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    int ni = 0, ns = 0;
    for (auto i : idlers) ni += occ[i];
    for (auto i : signal) ns += occ[i];
    const double w = std::norm(amp) * click(ni, e.spec.detection.herald_efficiency);
    herald += w;
    n1 += w * ns;
    n2 += w * ns * (ns - 1);
  }
  if (!(herald > 0.0) || !(n1 > 0.0)) throw Error(ErrorKind::kUndefinedG2, "herald probability is zero");
  return (n2 / herald) / ((n1 / herald) * (n1 / herald));
}

double calibrate_gain_for_g2(const Experiment& exp, double target) {
  Experiment e = exp;
  auto g2_at = [&](double gamma) {
    e.spec.gamma = gamma;
    return heralded_g2(e);
  };
  double lo = 1e-6;
  double hi = 0.45;
  if (!(target > g2_at(lo) && target < g2_at(hi))) {
    throw Error(ErrorKind::kInvalidArgument, "g2 target not reachable within the perturbative gain range");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g2_at(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double balanced_alpha(const Experiment& exp, double ratio) {
  if (!(ratio > 0.0)) throw Error(ErrorKind::kInvalidArgument, "balance ratio must be positive");
  Experiment e = exp;
  e.spec.alpha = 0.0;
  const double herald = run_point(e, 0.0).herald;
  return std::sqrt(ratio * herald);
}

double classical_limit() { return 0.5; }

}  // namespace qfreq
