#include "qfreq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "qfreq/errors.hpp"
#include "qfreq/fock_space.hpp"
#include "qfreq/interference.hpp"
#include "qfreq/jsa_schmidt.hpp"
#include "qfreq/kernels.hpp"
#include "qfreq/spectral_modes.hpp"

namespace qfreq {
namespace {

constexpr double kLambda = 830e-9;

FrequencyGrid small_grid() {
  const double w0 = omega_from_wavelength(kLambda);
  return make_grid(w0, 12.0 * omega_span_from_wavelength(11.7e-9, kLambda), 2048);
}

SpectralMode heralded_gaussian(const FrequencyGrid& grid) {
  return gaussian_mode(grid, grid.center(), omega_span_from_wavelength(11.7e-9, kLambda), 0.0);
}

Experiment ideal_experiment(double alpha, double gamma) {
  const auto grid = small_grid();
  ExperimentSpec spec{grid};
  spec.alpha = alpha;
  spec.gamma = gamma;
  spec.baseline_delay = 1000e-6;
  return prepare(spec, single_mode_source(heralded_gaussian(grid)));
}

MultimodeFockState random_state(const RegistryPtr& reg, int photons, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MultimodeFockState s(reg, 4);
  const std::size_t m = reg->size();
  // Every occupation of `photons` photons over m modes.
  std::function<void(Occupation&, std::size_t, int)> fill = [&](Occupation& occ, std::size_t k, int left) {
    if (k + 1 == m) {
      occ[k] = static_cast<std::uint8_t>(left);
      s.add(occ, cplx(normal(rng), normal(rng)));
      return;
    }
    for (int n = 0; n <= left; ++n) {
      occ[k] = static_cast<std::uint8_t>(n);
      fill(occ, k + 1, left - n);
    }
  };
  Occupation occ(m, 0);
  fill(occ, 0, photons);
  return s;
}

double state_distance(const MultimodeFockState& a, const MultimodeFockState& b) {
  return norm(a + cplx(-1.0, 0.0) * b);
}

Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd z(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) z(i, j) = cplx(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  return qr.householderQ();
}

CheckResult check(double value, double tolerance, std::string detail = {}) {
  return CheckResult{{}, std::isfinite(value) && value <= tolerance, value, tolerance, std::move(detail)};
}

CheckResult canonical_commutator() {
  std::mt19937_64 rng(11);
  const auto reg = make_registry({"a", "b", "c"});
  const auto psi = random_state(reg, 2, rng);
  // [a, a^dag] psi = psi below the truncation limit.
  const auto lhs = annihilate(create(psi, "a"), "a") + cplx(-1.0, 0.0) * create(annihilate(psi, "a"), "a");
  return check(state_distance(lhs, psi), 1e-12);
}

CheckResult mixed_commutator() {
  std::mt19937_64 rng(12);
  const auto reg = make_registry({"a", "b", "c"});
  const auto psi = random_state(reg, 2, rng);
  const auto lhs = annihilate(create(psi, "b"), "a") + cplx(-1.0, 0.0) * create(annihilate(psi, "a"), "b");
  return check(norm(lhs), 1e-12);
}

CheckResult annihilators_commute() {
  std::mt19937_64 rng(13);
  const auto reg = make_registry({"a", "b", "c"});
  const auto psi = random_state(reg, 3, rng);
  const auto lhs = annihilate(annihilate(psi, "a"), "b") + cplx(-1.0, 0.0) * annihilate(annihilate(psi, "b"), "a");
  return check(norm(lhs), 1e-12);
}

CheckResult coherent_norm() {
  const cplx alpha(0.03, -0.02);
  const auto s = weak_coherent(make_registry({"g1"}), "g1", alpha, 2);
  const double a2 = std::norm(alpha);
  return check(std::abs(norm(s) - std::sqrt(1.0 + a2 + a2 * a2 / 2.0)), 1e-14);
}

CheckResult pi_step_orthogonality() {
  const auto grid = small_grid();
  const auto base = gaussian_mode(grid, grid.center(), omega_span_from_wavelength(11.7e-9, kLambda), 3000e-30);
  const double cut = energy_quantile_cut(base, 0.5);
  const auto g1 = pi_step_mode(base, cut, lower_energy_fraction(base, cut));
  return check(std::abs(inner_product(base, g1)), 1e-12);
}

struct BalancedPair {
  std::vector<SpectralMode> modes;
  BinUnitary bins;
};

BalancedPair balanced_pair() {
  const auto grid = small_grid();
  const auto g2 = heralded_gaussian(grid);
  const double cut = energy_quantile_cut(g2, 0.5);
  const auto g1 = pi_step_mode(g2, cut, lower_energy_fraction(g2, cut));
  std::vector<SpectralMode> modes{g1, g2};
  const std::vector<std::string> labels{"g1", "g2"};
  auto bins = build_bin_unitary(modes, cut, labels);
  return {std::move(modes), std::move(bins)};
}

CheckResult bin_unitarity(const BalancedPair& p, double perturbation) {
  BasisChange bc = p.bins.change;
  bc.matrix(0, 0) += perturbation;
  return check(bc.unitarity_error(), 1e-12);
}

CheckResult hom_identity(const BalancedPair& p) {
  std::vector<std::string> labels{"g1", "g2"};
  labels.insert(labels.end(), p.bins.change.to_labels.begin(), p.bins.change.to_labels.end());
  const auto reg = make_registry(labels);
  const auto in = create(create(vacuum(reg, 4), "g1"), "g2");
  const auto out = change_basis(in, p.bins.change);
  std::string long_label, short_label;
  for (std::size_t j = 0; j < p.bins.bins.size(); ++j) {
    (p.bins.bins[j] == Bin::kLong ? long_label : short_label) = p.bins.change.to_labels[j];
  }
  const double amp11 = std::abs(out.amplitude({{long_label, 1}, {short_label, 1}}));
  return check(amp11, 1e-12);
}

CheckResult basis_round_trip() {
  std::mt19937_64 rng(21);
  const auto reg = make_registry({"a0", "a1", "a2", "b0", "b1", "b2"});
  const auto u = random_unitary(3, rng);
  MultimodeFockState psi(reg, 4);
  // Random two-photon state on the a modes only.
  const auto full = random_state(make_registry({"a0", "a1", "a2"}), 2, rng);
  for (const auto& [occ, amp] : full.terms()) {
    Occupation o(6, 0);
    std::copy(occ.begin(), occ.end(), o.begin());
    psi.add(o, amp);
  }
  const BasisChange forward{{"a0", "a1", "a2"}, {"b0", "b1", "b2"}, u};
  const BasisChange back{{"b0", "b1", "b2"}, {"a0", "a1", "a2"}, u.adjoint()};
  const auto round = change_basis(change_basis(psi, forward), back);
  return check(state_distance(round, psi), 1e-10);
}

CheckResult norm_conservation() {
  std::mt19937_64 rng(22);
  const auto reg = make_registry({"a0", "a1", "a2", "a3", "b0", "b1", "b2", "b3"});
  const auto u = random_unitary(4, rng);
  MultimodeFockState psi(reg, 4);
  for (int photons : {1, 2, 3}) {
    const auto part = random_state(make_registry({"a0", "a1", "a2", "a3"}), photons, rng);
    for (const auto& [occ, amp] : part.terms()) {
      Occupation o(8, 0);
      std::copy(occ.begin(), occ.end(), o.begin());
      psi.add(o, amp);
    }
  }
  const auto out = change_basis(psi, BasisChange{{"a0", "a1", "a2", "a3"}, {"b0", "b1", "b2", "b3"}, u});
  return check(std::abs(norm(out) - norm(psi)) / norm(psi), 1e-10);
}

CheckResult gaussian_schmidt() {
  // exp(-(x^2 + y^2 + x y) / s^2): a = b = 1, c = 1/2 in units of 1/s^2.
  const double s = 1e13;
  const auto grid = make_grid(2.2e15, 16.0 * s, 257);
  Eigen::MatrixXcd amp(257, 257);
  for (std::size_t j = 0; j < 257; ++j) {
    for (std::size_t k = 0; k < 257; ++k) {
      const double x = (grid.omega(j) - grid.center()) / s;
      const double y = (grid.omega(k) - grid.center()) / s;
      amp(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = std::exp(-(x * x + y * y + x * y));
    }
  }
  const auto d = schmidt_decompose(normalize(JointSpectralAmplitude(grid, grid, amp)), 6, 1.0);
  const double r = 0.5;
  const double mu = r / (1.0 + std::sqrt(1.0 - r * r));
  double worst = 0.0;
  for (std::size_t n = 0; n < 6; ++n) {
    worst = std::max(worst, std::abs(d.coefficients[n] - std::sqrt(1.0 - mu * mu) * std::pow(mu, static_cast<double>(n))));
  }
  return check(worst, 1e-6);
}

CheckResult herald_delay_independence() {
  auto exp = ideal_experiment(0.01, 1e-4);
  exp.spec.coherent.distinguishable = true;
  double lo = 1.0, hi = 0.0;
  for (double d : {-200e-6, -40e-6, 0.0, 15e-6, 120e-6}) {
    const double h = run_point(exp, d).herald;
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  return check((hi - lo) / hi, 1e-10, "orthogonal coherent mode");
}

CheckResult photon_number_additivity() {
  const auto both = ideal_experiment(0.01, 1e-4);
  auto coherent_only = both;
  coherent_only.spec.gamma = 0.0;
  auto pairs_only = both;
  pairs_only.spec.alpha = 0.0;
  auto signal_mean = [](const Experiment& e) {
    const auto setup = setup_point(e, 0.0);
    return mean_photons(generated_state(e, setup), setup.signal_labels);
  };
  const double total = signal_mean(both);
  const double sum = signal_mean(coherent_only) + signal_mean(pairs_only);
  return check(std::abs(total - sum) / total, 1e-10);
}

CheckResult scan_symmetry() {
  const auto exp = ideal_experiment(0.01, 1e-4);
  const std::vector<double> delays{-1000e-6, -30e-6, -10e-6, 0.0, 10e-6, 30e-6, 1000e-6};
  const auto r = hom_scan(exp, delays);
  double worst = 0.0;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    worst = std::max(worst, std::abs(r.coincidence[i] - r.coincidence[delays.size() - 1 - i]) / r.metrics.baseline);
  }
  return check(worst, 1e-8);
}

CheckResult efficiency_scaling() {
  // At the three-photon truncation every three-fold term carries exactly one
  // photon per detector, so a common efficiency factor cancels in the ratios.
  auto exp = ideal_experiment(0.01, 1e-4);
  exp.spec.max_total_photons = 3;
  const std::vector<double> delays{-1000e-6, -20e-6, 0.0, 20e-6, 1000e-6};
  const auto a = hom_scan(exp, delays);
  const auto ia = induced_emission_scan(exp, delays);
  exp.spec.detection = DetectionModel{0.6, 0.6, 0.6};
  const auto b = hom_scan(exp, delays);
  const auto ib = induced_emission_scan(exp, delays);
  const double dv = std::abs(a.metrics.visibility - b.metrics.visibility);
  const double dr = std::abs(ia.metrics.enhancement_ratio - ib.metrics.enhancement_ratio);
  return check(std::max(dv, dr), 1e-10, "three-photon truncation");
}

CheckResult simd_equivalence() {
  if (!kernels::available(kernels::Backend::kAvx2)) return check(0.0, 1e-12, "AVX2 unavailable");
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal;
  std::vector<cplx> a(1001), b(1001);
  for (auto& v : a) v = cplx(normal(rng), normal(rng));
  for (auto& v : b) v = cplx(normal(rng), normal(rng));
  const auto& s = kernels::table(kernels::Backend::kScalar);
  const auto& v = kernels::table(kernels::Backend::kAvx2);
  double worst = std::abs(s.dot_conj(a.data(), b.data(), a.size()) - v.dot_conj(a.data(), b.data(), a.size())) /
                 std::sqrt(s.norm_sq(a.data(), a.size()) * s.norm_sq(b.data(), b.size()));
  worst = std::max(worst, std::abs(s.norm_sq(a.data(), a.size()) - v.norm_sq(a.data(), a.size())) /
                              s.norm_sq(a.data(), a.size()));
  std::vector<cplx> out_s(a.size()), out_v(a.size());
  s.multiply(a.data(), b.data(), out_s.data(), a.size());
  v.multiply(a.data(), b.data(), out_v.data(), a.size());
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(out_s[k] - out_v[k]) / (std::abs(out_s[k]) + 1e-300));
  return check(worst, 1e-12);
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const VerifyOptions& options) {
  const auto pair = balanced_pair();
  const std::vector<std::pair<const char*, std::function<CheckResult()>>> checks{
      {"commutator [a,a+] = 1", canonical_commutator},
      {"commutator [a,b+] = 0", mixed_commutator},
      {"commutator [a,b] = 0", annihilators_commute},
      {"weak coherent norm", coherent_norm},
      {"pi-step orthogonality", pi_step_orthogonality},
      {"bin unitary U U+ = I", [&] { return bin_unitarity(pair, options.unitary_perturbation); }},
      {"HOM identity |1,1> amplitude", [&] { return hom_identity(pair); }},
      {"basis change round trip", basis_round_trip},
      {"norm conservation under change_basis", norm_conservation},
      {"Gaussian Schmidt spectrum", gaussian_schmidt},
      {"herald probability independent of delay", herald_delay_independence},
      {"signal photon number additivity", photon_number_additivity},
      {"HOM scan symmetric in delay", scan_symmetry},
      {"ratios invariant under efficiency scaling", efficiency_scaling},
      {"SIMD kernels match scalar", simd_equivalence},
  };

  std::vector<CheckResult> results;
  for (const auto& [name, fn] : checks) {
    CheckResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = CheckResult{{}, false, std::nan(""), 0.0, e.what()};
    }
    r.name = name;
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_report(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  char buf[256];
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%-4s  %-44s  %10.3e  (tol %.0e)", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                  r.value, r.tolerance);
    out << buf;
    if (!r.detail.empty()) out << "  " << r.detail;
    out << '\n';
    if (!r.passed) ++failed;
  }
  out << results.size() - failed << "/" << results.size() << " invariants passed\n";
  return out.str();
}

}  // namespace qfreq
