#pragma once

// Runs the qfreq binary as a child process and reads back its outputs.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace cli {

struct Run {
  int exit_code;
  std::string out;  // stdout and stderr
};

inline Run run(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" QFREQ_CLI_PATH "\" " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return {-1, "popen failed"};
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qfreq_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Single-mode, weak coherent pulse, coarse enough to run in well under a second.
inline const char* kSmallIdeal = R"(
[grid]
center = 830 nm
span = 93.6 nm
points = 1024

[phase_matching]
kind = single-mode
bandwidth = 11.7 nm

[coherent]
base = heralded
alpha = 0.01
pi_shift = true

[gain]
gamma = 1e-4

[scan]
delays = -1000:1000:50 um
baseline = 1000 um
)";

}  // namespace cli
