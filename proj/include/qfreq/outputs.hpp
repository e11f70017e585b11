#pragma once

// Result serialization: scan CSVs, metrics and manifest JSON, mode and JSA
// tables, gnuplot scripts. Numbers are written with 12 significant digits.

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qfreq/interference.hpp"
#include "qfreq/spectral_modes.hpp"

namespace qfreq {

std::string format_number(double v);  // %.12g

enum class ScanAxis { kDelay, kRatio };

/// axis,coincidence,herald,normalized_coincidence; delays in micrometres.
/// Ratio scans add visibility and t_effective columns.
std::string scan_csv(const ScanResult& r, ScanAxis axis);

std::string metrics_json(const ScanMetrics& m, const std::string& config_hash);

struct ManifestInfo {
  std::string command;
  std::string config_hash;
  std::vector<std::string> outputs;
};

inline constexpr int kManifestSchemaVersion = 1;
std::string tool_version();
std::string manifest_json(const ManifestInfo& info);

std::string mode_csv(const SpectralMode& mode);

/// Real matrix with a header row of column frequencies and a leading column
/// of row frequencies.
std::string matrix_csv(const FrequencyGrid& rows, const FrequencyGrid& cols, const Eigen::MatrixXd& values);

std::string gnuplot_script(const std::string& csv_name, ScanAxis axis, const std::string& title);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace qfreq
