// qfreq: command-line driver for the frequency-bin interference simulator.
//
// Exit codes: 0 success, 1 verification failures, 2 usage or configuration
// error, 3 numeric failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfreq/config.hpp"
#include "qfreq/errors.hpp"
#include "qfreq/interference.hpp"
#include "qfreq/jsa_schmidt.hpp"
#include "qfreq/outputs.hpp"
#include "qfreq/verify.hpp"

namespace fs = std::filesystem;
using namespace qfreq;

namespace {

constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  unsigned threads = 0;
};

unsigned resolve_threads(const Common& c, const Config& cfg) {
  if (c.threads > 0) return c.threads;
  if (const char* env = std::getenv("QSIM_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
    throw Error(ErrorKind::kInvalidArgument, std::string("QSIM_THREADS must be a positive integer, got '") + env + "'");
  }
  return cfg.scan.threads > 0 ? cfg.scan.threads : 1;
}

class Outputs {
 public:
  Outputs(const std::string& dir, std::string command, std::string hash) : dir_(dir) {
    info_.command = std::move(command);
    info_.config_hash = std::move(hash);
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& text) {
    write_text(dir_ / name, text);
    info_.outputs.push_back(name);
  }

  void finish() {
    info_.outputs.push_back("manifest.json");
    write_text(dir_ / "manifest.json", manifest_json(info_));
  }

 private:
  fs::path dir_;
  ManifestInfo info_;
};

std::vector<double> resolve_delays(const std::string& flag, const Config& cfg) {
  return flag.empty() ? cfg.scan.delays : parse_delay_range(flag);
}

int cmd_delay_scan(const Common& c, const std::string& delays_flag, bool induced) {
  const auto cfg = load_config(c.config_path);
  const auto delays = resolve_delays(delays_flag, cfg);
  const unsigned threads = resolve_threads(c, cfg);
  const auto exp = build_experiment(cfg);
  const auto r = induced ? induced_emission_scan(exp, delays, threads) : hom_scan(exp, delays, threads);

  Outputs out(c.out_dir, induced ? "induced" : "hom-scan", cfg.hash);
  out.write("scan.csv", scan_csv(r, ScanAxis::kDelay));
  out.write("metrics.json", metrics_json(r.metrics, cfg.hash));
  out.write("scan.gp", gnuplot_script("scan.csv", ScanAxis::kDelay, induced ? "induced emission" : "HOM dip"));
  out.finish();
  if (induced) {
    std::printf("enhancement_ratio %s\n", format_number(r.metrics.enhancement_ratio).c_str());
  } else {
    std::printf("visibility %s (classical limit %s)\n", format_number(r.metrics.visibility).c_str(),
                format_number(r.metrics.classical_limit).c_str());
  }
  return 0;
}

int cmd_mix(const Common& c, const std::string& ratios_flag) {
  const auto cfg = load_config(c.config_path);
  const auto ratios = ratios_flag.empty() ? cfg.scan.ratios : parse_number_list(ratios_flag);
  for (double t : ratios) {
    if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::kInvalidArgument, "ratios must lie in (0,1)");
  }
  const unsigned threads = resolve_threads(c, cfg);
  const auto exp = build_experiment(cfg);
  const auto r = mix_scan(exp, ratios, threads);

  Outputs out(c.out_dir, "mix-scan", cfg.hash);
  out.write("scan.csv", scan_csv(r, ScanAxis::kRatio));
  out.write("metrics.json", metrics_json(r.metrics, cfg.hash));
  out.write("scan.gp", gnuplot_script("scan.csv", ScanAxis::kRatio, "programmable mixing"));
  out.finish();
  for (std::size_t i = 0; i < r.axis.size(); ++i) {
    std::printf("t %s visibility %s\n", format_number(r.axis[i]).c_str(), format_number(r.visibility[i]).c_str());
  }
  return 0;
}

int cmd_schmidt(const Common& c) {
  const auto cfg = load_config(c.config_path);
  const auto exp = build_experiment(cfg);
  Outputs out(c.out_dir, "schmidt", cfg.hash);

  nlohmann::ordered_json report;
  std::vector<double> coeffs = exp.source.coefficients;
  double p = 1.0, k = 1.0;
  if (const auto& d = exp.source.decomposition) {
    coeffs = d->all_coefficients;
    coeffs.resize(std::min<std::size_t>(coeffs.size(), 16));
    p = purity(*d);
    k = schmidt_number(*d);
    report["n_kept"] = d->n_kept;
    report["truncation_remainder"] = std::strtod(format_number(d->truncation_remainder).c_str(), nullptr);
    report["reconstruction_residual"] = std::strtod(format_number(d->reconstruction_residual).c_str(), nullptr);
    const auto jsa = build_jsa(cfg.experiment.source->pump, cfg.experiment.source->phase_matching,
                               cfg.experiment.source->signal_grid, cfg.experiment.source->idler_grid);
    out.write("jsi.csv", matrix_csv(jsa.jsa.signal_grid(), jsa.jsa.idler_grid(), jsa.jsa.amplitude().cwiseAbs2()));
    for (std::size_t n = 0; n < d->n_kept; ++n) {
      out.write("idler_mode_" + std::to_string(n) + ".csv", mode_csv(d->idler_modes[n]));
    }
  } else {
    report["n_kept"] = 1;
  }
  std::vector<double> rounded;
  for (double v : coeffs) rounded.push_back(std::strtod(format_number(v).c_str(), nullptr));
  report["coefficients"] = rounded;
  report["purity"] = std::strtod(format_number(p).c_str(), nullptr);
  report["schmidt_number"] = std::strtod(format_number(k).c_str(), nullptr);
  report["gamma"] = std::strtod(format_number(exp.spec.gamma).c_str(), nullptr);
  report["config_hash"] = cfg.hash;
  for (std::size_t n = 0; n < exp.source.signal_modes.size(); ++n) {
    out.write("signal_mode_" + std::to_string(n) + ".csv", mode_csv(exp.source.signal_modes[n]));
  }
  out.write("schmidt.json", report.dump(2) + "\n");
  out.finish();
  std::printf("purity %s schmidt_number %s\n", format_number(p).c_str(), format_number(k).c_str());
  return 0;
}

int cmd_orthogonality(const Common& c) {
  const auto cfg = load_config(c.config_path);
  const auto exp = build_experiment(cfg);

  struct Recipe {
    std::string name;
    double split;
    double delay;
  };
  std::vector<Recipe> recipes{{"configured", exp.spec.coherent.split, 0.0}};
  for (double t : cfg.scan.ratios) recipes.push_back({"split-" + format_number(t), t, 0.0});
  for (double d : cfg.scan.probe_delays) {
    recipes.push_back({"delay-" + format_number(d * 1e6) + "um", exp.spec.coherent.split, d});
  }

  std::string csv = "recipe,split,delay_um,re_overlap,im_overlap,abs_overlap\n";
  double worst = 0.0;
  for (const auto& rec : recipes) {
    Experiment e = exp;
    e.spec.coherent.split = rec.split;
    const auto setup = setup_point(e, rec.delay);
    const cplx o = inner_product(setup.heralded_mode, setup.coherent_mode);
    if (rec.delay == 0.0) worst = std::max(worst, std::abs(o));
    csv += rec.name + "," + format_number(rec.split) + "," + format_number(rec.delay * 1e6) + "," +
           format_number(o.real()) + "," + format_number(o.imag()) + "," + format_number(std::abs(o)) + "\n";
  }
  Outputs out(c.out_dir, "orthogonality", cfg.hash);
  out.write("overlap.csv", csv);
  nlohmann::ordered_json summary;
  summary["max_zero_delay_overlap"] = std::strtod(format_number(worst).c_str(), nullptr);
  summary["config_hash"] = cfg.hash;
  out.write("orthogonality.json", summary.dump(2) + "\n");
  out.finish();
  std::printf("max zero-delay overlap %s\n", format_number(worst).c_str());
  return 0;
}

int cmd_verify(double perturbation) {
  VerifyOptions opts;
  opts.unitary_perturbation = perturbation;
  const auto results = run_invariant_suite(opts);
  std::fputs(format_report(results).c_str(), stdout);
  for (const auto& r : results) {
    if (!r.passed) return kExitVerifyFailed;
  }
  return 0;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfigParse:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kDegenerateSplit:
    case ErrorKind::kResolution:
      return kExitUsage;
    default:
      return kExitNumeric;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-bin two-photon interference simulator"};
  app.require_subcommand(1);
  Common common;
  std::string delays;
  std::string ratios;
  double perturbation = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", common.config_path, "Experiment configuration file")->required();
    sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--threads", common.threads, "Worker threads (fallback: QSIM_THREADS)")
        ->check(CLI::PositiveNumber);
  };
  auto* hom = app.add_subcommand("hom-scan", "HOM dip versus coherent-pulse delay");
  add_common(hom);
  hom->add_option("--delays", delays, "start:stop:step in um");
  auto* induced = app.add_subcommand("induced", "Induced-emission scan (pi shift off)");
  add_common(induced);
  induced->add_option("--delays", delays, "start:stop:step in um");
  auto* mix = app.add_subcommand("mix-scan", "Visibility versus split ratio");
  add_common(mix);
  mix->add_option("--ratios", ratios, "Comma-separated t fractions");
  auto* schmidt = app.add_subcommand("schmidt", "Schmidt decomposition report");
  add_common(schmidt);
  auto* ortho = app.add_subcommand("orthogonality", "Overlaps of coherent-mode recipes with the heralded mode");
  add_common(ortho);
  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_option("--perturb-unitary", perturbation, "Test hook: perturb the bin unitary")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*hom) return cmd_delay_scan(common, delays, false);
    if (*induced) return cmd_delay_scan(common, delays, true);
    if (*mix) return cmd_mix(common, ratios);
    if (*schmidt) return cmd_schmidt(common);
    if (*ortho) return cmd_orthogonality(common);
    if (*verify) return cmd_verify(perturbation);
  } catch (const Error& e) {
    std::fprintf(stderr, "qfreq: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "qfreq: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qfreq: numeric failure: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitUsage;
}
