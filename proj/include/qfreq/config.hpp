#pragma once

// Experiment configuration files: INI-style sections of `key = value unit`
// lines. Dimensioned values must carry a unit; unknown keys are rejected.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qfreq/errors.hpp"
#include "qfreq/interference.hpp"

namespace qfreq {

class ConfigError : public Error {
 public:
  ConfigError(int line, int column, const std::string& what)
      : Error(ErrorKind::kConfigParse,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

struct ScanSettings {
  std::vector<double> delays;        // m
  std::vector<double> ratios;        // t fractions for mix scans
  std::vector<double> probe_delays;  // m, extra recipes for the orthogonality report
  unsigned threads = 0;              // 0 = not set
};

struct Config {
  ExperimentSpec experiment;
  double center_wavelength = 0.0;  // m
  // kind = single-mode: the heralded photon is this pure Gaussian mode.
  std::optional<double> single_mode_bandwidth;  // rad/s
  std::optional<double> alpha_balance;
  std::optional<double> g2_target;
  ScanSettings scan;
  std::string canonical;  // sorted `section.key = value` lines
  std::string hash;       // 16 hex digits
};

/// `base_dir` resolves relative table paths.
Config parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

/// FNV-1a 64-bit digest as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

/// "start:stop:step" in micrometres, optional trailing "um"; returns metres.
std::vector<double> parse_delay_range(std::string_view text);
/// Comma-separated reals.
std::vector<double> parse_number_list(std::string_view text);

/// Prepares the source, then resolves gamma from the g2 target and alpha
/// from the balance ratio when those are configured.
Experiment build_experiment(const Config& cfg);

/// Plain-text JSI matrix: one row per signal frequency, whitespace separated.
Eigen::MatrixXd read_intensity_matrix(const std::filesystem::path& path);

}  // namespace qfreq
