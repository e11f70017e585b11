#include "qfreq/outputs.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qfreq/errors.hpp"

namespace qfreq {
namespace {

using nlohmann::ordered_json;

// JSON numbers rounded to the same 12 digits as the CSVs.
double round12(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::atoll(epoch));
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string scan_csv(const ScanResult& r, ScanAxis axis) {
  std::ostringstream out;
  out << "axis,coincidence,herald,normalized_coincidence";
  if (axis == ScanAxis::kRatio) out << ",visibility,t_effective";
  out << '\n';
  for (std::size_t i = 0; i < r.axis.size(); ++i) {
    const double a = axis == ScanAxis::kDelay ? r.axis[i] * 1e6 : r.axis[i];
    out << format_number(a) << ',' << format_number(r.coincidence[i]) << ',' << format_number(r.herald[i]) << ','
        << format_number(r.normalized[i]);
    if (axis == ScanAxis::kRatio) out << ',' << format_number(r.visibility[i]) << ',' << format_number(r.t_effective[i]);
    out << '\n';
  }
  return out.str();
}

std::string metrics_json(const ScanMetrics& m, const std::string& config_hash) {
  ordered_json j;
  j["visibility"] = round12(m.visibility);
  j["enhancement_ratio"] = round12(m.enhancement_ratio);
  j["baseline"] = round12(m.baseline);
  j["extremum"] = round12(m.extremum);
  j["classical_limit"] = round12(m.classical_limit);
  j["beats_classical_limit"] = m.beats_classical_limit;
  j["config_hash"] = config_hash;
  return j.dump(2) + "\n";
}

std::string tool_version() { return "qfreq 0.1.0"; }

std::string manifest_json(const ManifestInfo& info) {
  ordered_json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["command"] = info.command;
  j["config_hash"] = info.config_hash;
  j["tool_version"] = tool_version();
  j["timestamp"] = utc_timestamp();
  j["outputs"] = info.outputs;
  return j.dump(2) + "\n";
}

std::string mode_csv(const SpectralMode& mode) {
  std::ostringstream out;
  out << "omega_rad_per_s,re_amplitude,im_amplitude\n";
  for (std::size_t k = 0; k < mode.size(); ++k) {
    out << format_number(mode.grid().omega(k)) << ',' << format_number(mode[k].real()) << ','
        << format_number(mode[k].imag()) << '\n';
  }
  return out.str();
}

std::string matrix_csv(const FrequencyGrid& rows, const FrequencyGrid& cols, const Eigen::MatrixXd& values) {
  if (static_cast<std::size_t>(values.rows()) != rows.size() || static_cast<std::size_t>(values.cols()) != cols.size()) {
    throw Error(ErrorKind::kInvalidArgument, "matrix does not match its axes");
  }
  std::ostringstream out;
  out << "omega_s\\omega_i";
  for (std::size_t k = 0; k < cols.size(); ++k) out << ',' << format_number(cols.omega(k));
  out << '\n';
  for (std::size_t j = 0; j < rows.size(); ++j) {
    out << format_number(rows.omega(j));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out << ',' << format_number(values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
    }
    out << '\n';
  }
  return out.str();
}

std::string gnuplot_script(const std::string& csv_name, ScanAxis axis, const std::string& title) {
  std::ostringstream out;
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set title '" << title << "'\n"
      << "set xlabel '" << (axis == ScanAxis::kDelay ? "delay (um)" : "t fraction") << "'\n"
      << "set ylabel 'normalized coincidence'\n";
  if (axis == ScanAxis::kDelay) out << "set arrow from graph 0, first 0.5 to graph 1, first 0.5 nohead dt 2\n";
  out << "plot '" << csv_name << "' using 1:4 with linespoints\n";
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kInvalidArgument, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kInvalidArgument, "write failed for " + path.string());
}

}  // namespace qfreq
