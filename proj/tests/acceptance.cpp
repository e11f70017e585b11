// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "cli_harness.hpp"
#include "oracles/brute_force.hpp"
#include "qfreq/config.hpp"
#include "qfreq/fock_space.hpp"
#include "qfreq/interference.hpp"
#include "qfreq/jsa_schmidt.hpp"
#include "qfreq/verify.hpp"

using namespace qfreq;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

struct Criterion {
  const char* name;
  double time_limit_s;  // 0 = no limit
  std::function<Outcome()> run;
};

Config preset(const char* name) { return load_config(std::string(QFREQ_CONFIG_DIR) + "/" + name); }

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

Outcome hom_identity() {
  const auto grid = make_grid(omega_from_wavelength(830e-9), 12.0 * omega_span_from_wavelength(11.7e-9, 830e-9), 4096);
  const auto g2 = gaussian_mode(grid, grid.center(), omega_span_from_wavelength(11.7e-9, 830e-9), 0.0);
  const double cut = energy_quantile_cut(g2, 0.5);
  const auto g1 = pi_step_mode(g2, cut, lower_energy_fraction(g2, cut));
  const std::vector<SpectralMode> modes{g1, g2};
  const std::vector<std::string> labels{"g1", "g2"};
  const auto bins = build_bin_unitary(modes, cut, labels);
  std::vector<std::string> all = labels;
  all.insert(all.end(), bins.change.to_labels.begin(), bins.change.to_labels.end());
  const auto reg = make_registry(all);
  const auto psi = change_basis(create(create(vacuum(reg, 4), "g1"), "g2"), bins.change);
  double worst = 0.0;
  for (const auto& [occ, amp] : psi.terms()) {
    int nl = 0, ns = 0;
    for (std::size_t j = 0; j < bins.bins.size(); ++j) {
      (bins.bins[j] == Bin::kLong ? nl : ns) += occ[reg->index_of(bins.change.to_labels[j])];
    }
    if (nl == 1 && ns == 1) worst = std::max(worst, std::abs(amp));
  }
  return {worst <= 1e-12, fmt("|1,1> amplitude %.2e (tol 1e-12)", worst)};
}

Outcome ideal_dip() {
  const auto cfg = preset("ideal.cfg");
  const auto exp = build_experiment(cfg);
  const auto r = hom_scan(exp, cfg.scan.delays, 1);

  // Oracle rebuilt from the preset numbers alone.
  const double c = 299792458.0, lambda = 830e-9;
  const double w0 = 2.0 * std::numbers::pi * c / lambda;
  auto jac = [&](double dl) { return 2.0 * std::numbers::pi * c * dl / (lambda * lambda); };
  const auto og = oracle::grid(w0, jac(93.6e-9), 16384);
  const oracle::Source src{{oracle::gaussian(og, w0, jac(11.7e-9))}, {1.0}};
  const double cut = oracle::quantile_cut(og, src.signal_modes[0], 0.5);
  const auto g1 = oracle::pi_flipped(og, src.signal_modes[0], cut);
  const double alpha = 0.01, gamma = 1e-4;
  const double c0 = oracle::three_fold(og, g1, src, cut, alpha, gamma).coincidence;
  const double cb = oracle::three_fold(og, oracle::delayed(og, g1, 1000e-6), src, cut, alpha, gamma).coincidence;
  const double v_oracle = 1.0 - c0 / cb;
  const double diff = std::abs(v_oracle - r.metrics.visibility);
  const bool ok = r.metrics.visibility >= 0.99 && diff <= 1e-6 && r.axis.size() == 41;
  return {ok, fmt("V %.6f, oracle %.6f, |diff| %.1e, %zu points", r.metrics.visibility, v_oracle, diff, r.axis.size())};
}

Outcome induced() {
  const auto cfg = preset("induced.cfg");
  const double single = induced_emission_scan(build_experiment(cfg), cfg.scan.delays, 2).metrics.enhancement_ratio;
  auto multimode = preset("paper.cfg");
  multimode.experiment.coherent.pi_shift = false;
  const double multi = induced_emission_scan(build_experiment(multimode), multimode.scan.delays, 2).metrics.enhancement_ratio;
  const bool ok = std::abs(single - 2.0) <= 1e-3 && multi > 1.0 && multi < 2.0;
  return {ok, fmt("single-mode %.6f (2 +- 1e-3), purity-0.91 %.4f in (1,2)", single, multi)};
}

Outcome schmidt_stats() {
  const auto cfg = preset("paper.cfg");
  const auto& src = *cfg.experiment.source;
  const auto jsa = build_jsa(src.pump, src.phase_matching, src.signal_grid, src.idler_grid).jsa;
  const auto d = schmidt_decompose(jsa, 1, 1e-3);
  const double p = purity(d), k = schmidt_number(d);

  // Correlated Gaussian on a 512 x 512 grid vs Mehler's closed form.
  const auto g = make_grid(2.2e15, 30e13, 512);
  const double a = 1.5e13, b = 0.6e13;
  Eigen::MatrixXcd amp(512, 512);
  for (Eigen::Index j = 0; j < 512; ++j) {
    for (Eigen::Index m = 0; m < 512; ++m) {
      const double x = g.omega(static_cast<std::size_t>(j)) - g.center();
      const double y = g.omega(static_cast<std::size_t>(m)) - g.center();
      const double u = (x + y) / std::numbers::sqrt2, v = (x - y) / std::numbers::sqrt2;
      amp(j, m) = std::exp(-u * u / (2.0 * a * a) - v * v / (2.0 * b * b));
    }
  }
  const auto dg = schmidt_decompose(normalize(JointSpectralAmplitude(g, g, amp)), 6, 1.0);
  const double mu = (a - b) / (a + b);
  double worst = 0.0;
  for (std::size_t n = 0; n < 6; ++n) {
    worst = std::max(worst, std::abs(dg.coefficients[n] - std::sqrt(1.0 - mu * mu) * std::pow(mu, double(n))));
  }
  const bool ok = std::abs(p - 0.91) <= 0.01 && std::abs(k - 1.10) <= 0.02 && worst <= 1e-6;
  return {ok, fmt("purity %.4f, K %.4f, Gaussian spectrum max error %.1e", p, k, worst)};
}

Outcome mixing() {
  const auto cfg = preset("ideal.cfg");
  const std::vector<double> ts{0.4, 0.3, 0.2, 0.1};
  const auto r = mix_scan(build_experiment(cfg), ts, 2);
  double worst = 0.0;
  std::string vals;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i];
    const double closed = 2.0 * t * (1.0 - t) / (t * t + (1.0 - t) * (1.0 - t));
    if (std::abs(closed - oracle::two_photon_visibility(t)) > 1e-12) return {false, "closed form disagrees with oracle"};
    worst = std::max(worst, std::abs(r.visibility[i] - closed));
    vals += fmt("%.4f ", r.visibility[i]);
  }
  return {worst <= 1e-3, "V " + vals + fmt("max |V - closed form| %.1e (tol 1e-3)", worst)};
}

Outcome purity091_visibility() {
  const auto cfg = preset("paper.cfg");
  const auto r = hom_scan(build_experiment(cfg), cfg.scan.delays, 2);
  const double v = r.metrics.visibility;
  return {v >= 0.55 && v <= 0.85, fmt("V %.4f, band [0.55, 0.85]", v)};
}

Outcome invariants() {
  const auto results = run_invariant_suite();
  std::size_t passed = 0;
  std::string failed;
  for (const auto& c : results) {
    if (c.passed) {
      ++passed;
    } else {
      failed += " " + c.name + ";";
    }
  }
  return {passed == results.size(), fmt("%zu/%zu invariants", passed, results.size()) + failed};
}

Outcome determinism() {
  const auto dir = cli::scratch("acceptance_determinism");
  const std::string cfg = "\"" QFREQ_CONFIG_DIR "/ideal.cfg\"";
  auto out = [&](const char* sub) { return "--out \"" + (dir / sub).string() + "\""; };
  const char* runs[][2] = {{"hom-scan", "--threads 1"}, {"hom-scan", "--threads 1"}, {"hom-scan", "--threads 4"},
                           {"mix-scan", "--threads 1"}, {"mix-scan", "--threads 4"}};
  std::vector<std::string> csv;
  for (std::size_t i = 0; i < std::size(runs); ++i) {
    const std::string sub = "r" + std::to_string(i);
    const auto r = cli::run(std::string(runs[i][0]) + " " + cfg + " " + runs[i][1] + " " + out(sub.c_str()));
    if (r.exit_code != 0) return {false, "run failed: " + r.out};
    csv.push_back(cli::slurp(dir / sub / "scan.csv"));
  }
  const bool ok = !csv[0].empty() && csv[0] == csv[1] && csv[0] == csv[2] && csv[3] == csv[4];
  return {ok, "hom-scan x3 and mix-scan x2 across 1 and 4 threads"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"1 HOM identity", 1.0, hom_identity},
      {"2 ideal dip vs brute-force oracle", 10.0, ideal_dip},
      {"3 induced-emission factor", 10.0, induced},
      {"4 Schmidt statistics", 5.0, schmidt_stats},
      {"5 programmable mixing", 10.0, mixing},
      {"6 visibility band at purity 0.91", 0.0, purity091_visibility},
      {"7 invariant suite", 0.0, invariants},
      {"8 deterministic CSV output", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0.0 && secs > c.time_limit_s) {
      o.passed = false;
      o.detail += fmt(" [over %.0f s limit]", c.time_limit_s);
    }
    std::printf("%s  %-36s %7.2f s  %s\n", o.passed ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    failures += o.passed ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
