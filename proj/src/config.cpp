#include "qfreq/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace qfreq {
namespace {

enum class Dim {
  kWavelength,  // nm, um
  kTime,        // fs, ps
  kDispersion,  // fs2
  kAngle,       // deg, rad
  kLength,      // nm, um, mm
  kNumber,
  kInteger,
  kBool,
  kText,
  kRange,       // start:stop:step with a length unit
  kList,        // plain numbers
  kLengthList,  // numbers followed by a length unit
};

struct KeySpec {
  const char* section;
  const char* key;
  Dim dim;
};

constexpr KeySpec kKeys[] = {
    {"grid", "center", Dim::kWavelength},
    {"grid", "span", Dim::kWavelength},
    {"grid", "points", Dim::kInteger},
    {"grid", "jsa_points", Dim::kInteger},
    {"grid", "jsa_span", Dim::kWavelength},
    {"pump", "center", Dim::kWavelength},
    {"pump", "duration", Dim::kTime},
    {"pump", "chirp", Dim::kDispersion},
    {"phase_matching", "kind", Dim::kText},
    {"phase_matching", "width", Dim::kWavelength},
    {"phase_matching", "tilt", Dim::kAngle},
    {"phase_matching", "table", Dim::kText},
    {"phase_matching", "bandwidth", Dim::kWavelength},
    {"phase_matching", "max_modes", Dim::kInteger},
    {"phase_matching", "modes", Dim::kInteger},
    {"phase_matching", "cumulative", Dim::kNumber},
    {"coherent", "base", Dim::kText},
    {"coherent", "center", Dim::kWavelength},
    {"coherent", "bandwidth", Dim::kWavelength},
    {"coherent", "chirp", Dim::kDispersion},
    {"coherent", "alpha", Dim::kNumber},
    {"coherent", "alpha_balance", Dim::kNumber},
    {"coherent", "pi_shift", Dim::kBool},
    {"coherent", "split", Dim::kNumber},
    {"coherent", "cut", Dim::kWavelength},
    {"coherent", "delay_multiplier", Dim::kNumber},
    {"coherent", "distinguishable", Dim::kBool},
    {"coherent", "order", Dim::kInteger},
    {"gain", "gamma", Dim::kNumber},
    {"gain", "g2_target", Dim::kNumber},
    {"gain", "cross_schmidt_second_order", Dim::kBool},
    {"gain", "max_photons", Dim::kInteger},
    {"detection", "type", Dim::kText},
    {"detection", "herald", Dim::kNumber},
    {"detection", "long", Dim::kNumber},
    {"detection", "short", Dim::kNumber},
    {"scan", "delays", Dim::kRange},
    {"scan", "baseline", Dim::kLength},
    {"scan", "ratios", Dim::kList},
    {"scan", "probe_delays", Dim::kLengthList},
    {"scan", "threads", Dim::kInteger},
};

const KeySpec* find_key(const std::string& section, const std::string& key) {
  for (const auto& k : kKeys) {
    if (section == k.section && key == k.key) return &k;
  }
  return nullptr;
}

bool known_section(const std::string& section) {
  return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeySpec& k) { return section == k.section; });
}

struct Entry {
  const KeySpec* spec;
  std::string raw;
  int line;
  int column;  // of the value
  // Parsed forms; which one is set depends on spec->dim.
  double number = 0.0;
  std::vector<double> numbers;
  std::string text;
  bool flag = false;
  std::string canonical;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string canonical_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool to_double(std::string_view s, double& out) {
  s = std::string_view(s.data(), s.size());
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

double unit_scale(Dim dim, const std::string& unit) {
  switch (dim) {
    case Dim::kWavelength:
      if (unit == "nm") return 1e-9;
      if (unit == "um") return 1e-6;
      break;
    case Dim::kTime:
      if (unit == "fs") return 1e-15;
      if (unit == "ps") return 1e-12;
      break;
    case Dim::kDispersion:
      if (unit == "fs2") return 1e-30;
      break;
    case Dim::kAngle:
      if (unit == "deg") return kPi / 180.0;
      if (unit == "rad") return 1.0;
      break;
    case Dim::kLength:
    case Dim::kRange:
    case Dim::kLengthList:
      if (unit == "nm") return 1e-9;
      if (unit == "um") return 1e-6;
      if (unit == "mm") return 1e-3;
      break;
    default:
      break;
  }
  return 0.0;
}

const char* unit_hint(Dim dim) {
  switch (dim) {
    case Dim::kWavelength: return "nm or um";
    case Dim::kTime: return "fs or ps";
    case Dim::kDispersion: return "fs2";
    case Dim::kAngle: return "deg or rad";
    default: return "nm, um or mm";
  }
}

// Splits "value unit" at the last whitespace run.
std::pair<std::string, std::string> split_unit(const std::string& raw) {
  const auto pos = raw.find_last_of(" \t");
  if (pos == std::string::npos) return {raw, ""};
  return {trim(raw.substr(0, pos)), trim(raw.substr(pos + 1))};
}

void parse_value(Entry& e) {
  auto fail = [&](const std::string& msg) -> void { throw ConfigError(e.line, e.column, msg); };
  const Dim dim = e.spec->dim;
  const std::string name = std::string(e.spec->section) + "." + e.spec->key;
  switch (dim) {
    case Dim::kWavelength:
    case Dim::kTime:
    case Dim::kDispersion:
    case Dim::kAngle:
    case Dim::kLength: {
      const auto [value, unit] = split_unit(e.raw);
      if (unit.empty()) fail(name + " needs a unit (" + unit_hint(dim) + ")");
      const double scale = unit_scale(dim, unit);
      if (scale == 0.0) fail("unit '" + unit + "' not accepted for " + name + " (" + unit_hint(dim) + ")");
      double v = 0.0;
      if (!to_double(value, v)) fail("expected a number for " + name + ", got '" + value + "'");
      e.number = v * scale;
      e.canonical = canonical_number(e.number);
      return;
    }
    case Dim::kNumber:
    case Dim::kInteger: {
      double v = 0.0;
      if (!to_double(e.raw, v)) fail("expected a plain number for " + name + ", got '" + e.raw + "'");
      if (dim == Dim::kInteger && (v != std::floor(v) || v < 0.0 || v > 1e9)) {
        fail(name + " must be a non-negative integer");
      }
      e.number = v;
      e.canonical = canonical_number(v);
      return;
    }
    case Dim::kBool:
      if (e.raw == "true" || e.raw == "on" || e.raw == "yes") {
        e.flag = true;
      } else if (e.raw == "false" || e.raw == "off" || e.raw == "no") {
        e.flag = false;
      } else {
        fail(name + " must be true or false");
      }
      e.canonical = e.flag ? "true" : "false";
      return;
    case Dim::kText:
      if (e.raw.empty()) fail(name + " is empty");
      e.text = e.raw;
      e.canonical = e.raw;
      return;
    case Dim::kRange: {
      const auto [value, unit] = split_unit(e.raw);
      if (unit.empty()) fail(name + " needs a unit (nm, um or mm)");
      const double scale = unit_scale(dim, unit);
      if (scale == 0.0) fail("unit '" + unit + "' not accepted for " + name);
      try {
        e.numbers = parse_delay_range(value);
      } catch (const Error& err) {
        fail(err.what());
      }
      for (double& d : e.numbers) d *= scale / 1e-6;
      break;
    }
    case Dim::kList:
    case Dim::kLengthList: {
      std::string body = e.raw;
      double scale = 1.0;
      if (dim == Dim::kLengthList) {
        const auto [value, unit] = split_unit(e.raw);
        scale = unit_scale(dim, unit);
        if (unit.empty() || scale == 0.0) fail(name + " needs a trailing unit (nm, um or mm)");
        body = value;
      }
      try {
        e.numbers = parse_number_list(body);
      } catch (const Error& err) {
        fail(err.what());
      }
      for (double& d : e.numbers) d *= scale;
      break;
    }
  }
  for (std::size_t i = 0; i < e.numbers.size(); ++i) e.canonical += (i ? "," : "") + canonical_number(e.numbers[i]);
}

using EntryMap = std::map<std::pair<std::string, std::string>, Entry>;

const Entry* get(const EntryMap& m, const char* section, const char* key) {
  const auto it = m.find({section, key});
  return it == m.end() ? nullptr : &it->second;
}

double number_or(const EntryMap& m, const char* section, const char* key, double fallback) {
  const auto* e = get(m, section, key);
  return e ? e->number : fallback;
}

}  // namespace

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) {
    const auto t = trim(item);
    double v = 0.0;
    if (!to_double(t, v)) throw Error(ErrorKind::kInvalidArgument, "bad number '" + t + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::kInvalidArgument, "empty list");
  return out;
}

std::vector<double> parse_delay_range(std::string_view text) {
  std::string body = trim(text);
  if (body.size() > 2 && body.compare(body.size() - 2, 2, "um") == 0) body = trim(body.substr(0, body.size() - 2));
  double v[3];
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const auto colon = body.find(':', start);
    if ((i < 2) == (colon == std::string::npos)) {
      throw Error(ErrorKind::kInvalidArgument, "delay range must be start:stop:step, got '" + std::string(text) + "'");
    }
    const auto part = trim(body.substr(start, i < 2 ? colon - start : std::string::npos));
    if (!to_double(part, v[i])) throw Error(ErrorKind::kInvalidArgument, "bad number '" + part + "' in delay range");
    start = colon + 1;
  }
  const double lo = v[0], hi = v[1], step = v[2];
  if (!(step > 0.0) || hi < lo) throw Error(ErrorKind::kInvalidArgument, "empty delay range '" + std::string(text) + "'");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (n > 100000) throw Error(ErrorKind::kInvalidArgument, "delay range has too many points");
  std::vector<double> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back((lo + static_cast<double>(k) * step) * 1e-6);
  return out;
}

Eigen::MatrixXd read_intensity_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot open table " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ls(t);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      double v = 0.0;
      if (!to_double(tok, v)) throw Error(ErrorKind::kInvalidArgument, "bad entry '" + tok + "' in " + path.string());
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorKind::kInvalidArgument, "ragged rows in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::kInvalidArgument, "empty table " + path.string());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t k = 0; k < rows[j].size(); ++k) m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = rows[j][k];
  }
  return m;
}

Config parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  EntryMap entries;
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    // Comments start at '#' or ';' at line start or after whitespace.
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const int col = static_cast<int>(first) + 1;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos) throw ConfigError(line_no, col, "unterminated section header");
      if (!trim(line.substr(close + 1)).empty()) throw ConfigError(line_no, static_cast<int>(close) + 2, "text after section header");
      section = trim(line.substr(first + 1, close - first - 1));
      if (!known_section(section)) throw ConfigError(line_no, col + 1, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=', first);
    if (eq == std::string::npos) throw ConfigError(line_no, col, "expected 'key = value'");
    if (section.empty()) throw ConfigError(line_no, col, "key outside of any section");
    const std::string key = trim(line.substr(first, eq - first));
    const auto* spec = find_key(section, key);
    if (!spec) throw ConfigError(line_no, col, "unknown key '" + key + "' in [" + section + "]");
    if (entries.count({section, key})) throw ConfigError(line_no, col, "duplicate key '" + key + "' in [" + section + "]");
    Entry e;
    e.spec = spec;
    e.raw = trim(line.substr(eq + 1));
    e.line = line_no;
    const auto vpos = line.find_first_not_of(" \t", eq + 1);
    e.column = vpos == std::string::npos ? static_cast<int>(eq) + 2 : static_cast<int>(vpos) + 1;
    if (e.raw.empty()) throw ConfigError(line_no, e.column, "missing value for '" + key + "'");
    parse_value(e);
    entries.emplace(std::make_pair(section, key), std::move(e));
  }

  const int end_line = line_no + 1;
  auto missing = [&](const std::string& what) { return ConfigError(end_line, 1, "missing required key " + what); };
  auto require = [&](const char* s, const char* k) -> const Entry& {
    const auto* e = get(entries, s, k);
    if (!e) throw missing(std::string("[") + s + "] " + k);
    return *e;
  };
  auto invalid = [](const Entry& e, const std::string& msg) { return ConfigError(e.line, e.column, msg); };

  const double center_lambda = require("grid", "center").number;
  const double w0 = omega_from_wavelength(center_lambda);
  auto to_span = [&](double lambda_span) { return omega_span_from_wavelength(lambda_span, center_lambda); };

  const auto& points = require("grid", "points");
  if (points.number < 16) throw invalid(points, "grid.points must be at least 16");
  const double span = to_span(require("grid", "span").number);
  Config cfg{.experiment = ExperimentSpec{make_grid(w0, span, static_cast<std::size_t>(points.number))},
             .center_wavelength = center_lambda};

  auto& ex = cfg.experiment;
  const auto& kind = require("phase_matching", "kind");
  if (kind.text == "single-mode") {
    cfg.single_mode_bandwidth = to_span(require("phase_matching", "bandwidth").number);
  } else {
    const auto jsa_points = static_cast<std::size_t>(number_or(entries, "grid", "jsa_points", 512));
    if (jsa_points < 16) throw invalid(*get(entries, "grid", "jsa_points"), "grid.jsa_points must be at least 16");
    const double jsa_span = to_span(number_or(entries, "grid", "jsa_span", require("grid", "span").number));
    const auto jsa_grid = make_grid(w0, jsa_span, jsa_points);
    SourceSpec src{.pump = {}, .phase_matching = {}, .signal_grid = jsa_grid, .idler_grid = jsa_grid};
    const double pump_chirp = number_or(entries, "pump", "chirp", 0.0);
    if (kind.text == "tabulated" && !get(entries, "pump", "center")) {
      // The table is the full JSI: flat pump envelope.
      src.pump = PumpModel{2.0 * w0, std::numeric_limits<double>::infinity(), 0.0};
    } else {
      src.pump = PumpModel::transform_limited(omega_from_wavelength(require("pump", "center").number),
                                              require("pump", "duration").number, pump_chirp);
    }
    if (kind.text == "gaussian" || kind.text == "sinc") {
      src.phase_matching.kind = kind.text == "gaussian" ? PhaseMatchingKind::kGaussianApprox : PhaseMatchingKind::kSinc;
      src.phase_matching.width = to_span(require("phase_matching", "width").number);
      src.phase_matching.tilt_angle = require("phase_matching", "tilt").number;
    } else if (kind.text == "tabulated") {
      const auto& table = require("phase_matching", "table");
      std::filesystem::path p = table.text;
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      Eigen::MatrixXd jsi;
      try {
        jsi = read_intensity_matrix(p);
      } catch (const Error& err) {
        throw invalid(table, err.what());
      }
      if (static_cast<std::size_t>(jsi.rows()) != jsa_points || static_cast<std::size_t>(jsi.cols()) != jsa_points) {
        throw invalid(table, "table is " + std::to_string(jsi.rows()) + "x" + std::to_string(jsi.cols()) +
                                 ", grid.jsa_points is " + std::to_string(jsa_points));
      }
      if ((jsi.array() < 0.0).any()) throw invalid(table, "negative JSI entry");
      src.phase_matching.kind = PhaseMatchingKind::kTabulated;
      src.phase_matching.table = jsi.cwiseSqrt().cast<cplx>();
      std::ostringstream digest;
      digest.precision(17);
      digest << jsi;
      entries.at({"phase_matching", "table"}).canonical = fnv1a_hex(digest.str());
    } else {
      throw invalid(kind, "phase_matching.kind must be gaussian, sinc, tabulated or single-mode");
    }
    src.max_modes = static_cast<std::size_t>(number_or(entries, "phase_matching", "max_modes", 8));
    if (src.max_modes < 1) throw invalid(*get(entries, "phase_matching", "max_modes"), "max_modes must be at least 1");
    src.cumulative_weight = number_or(entries, "phase_matching", "cumulative", 0.9999);
    if (!(src.cumulative_weight > 0.0 && src.cumulative_weight <= 1.0)) {
      throw invalid(*get(entries, "phase_matching", "cumulative"), "cumulative must lie in (0,1]");
    }
    if (const auto* m = get(entries, "phase_matching", "modes")) {
      if (m->number < 1) throw invalid(*m, "modes must be at least 1");
      src.fixed_modes = static_cast<std::size_t>(m->number);
    }
    ex.source = std::move(src);
  }

  auto& rec = ex.coherent;
  if (const auto* b = get(entries, "coherent", "base")) {
    if (b->text == "heralded") {
      rec.base = CoherentBase::kHeralded;
    } else if (b->text == "gaussian") {
      rec.base = CoherentBase::kGaussian;
      rec.bandwidth = to_span(require("coherent", "bandwidth").number);
    } else {
      throw invalid(*b, "coherent.base must be heralded or gaussian");
    }
  }
  if (const auto* c = get(entries, "coherent", "center")) rec.center = omega_from_wavelength(c->number);
  rec.chirp = number_or(entries, "coherent", "chirp", 0.0);
  if (rec.base == CoherentBase::kHeralded && get(entries, "coherent", "bandwidth")) {
    throw invalid(*get(entries, "coherent", "bandwidth"), "coherent.bandwidth only applies to base = gaussian");
  }
  if (const auto* s = get(entries, "coherent", "split")) {
    if (!(s->number > 0.0 && s->number < 1.0)) throw invalid(*s, "coherent.split must lie in (0,1)");
    rec.split = s->number;
  }
  if (const auto* c = get(entries, "coherent", "cut")) ex.cut_omega = omega_from_wavelength(c->number);
  rec.delay_multiplier = number_or(entries, "coherent", "delay_multiplier", 1.0);
  if (const auto* p = get(entries, "coherent", "pi_shift")) rec.pi_shift = p->flag;
  if (const auto* d = get(entries, "coherent", "distinguishable")) rec.distinguishable = d->flag;
  ex.coherent_order = static_cast<int>(number_or(entries, "coherent", "order", 2));

  const auto* alpha = get(entries, "coherent", "alpha");
  const auto* balance = get(entries, "coherent", "alpha_balance");
  if (alpha && balance) throw invalid(*balance, "set either coherent.alpha or coherent.alpha_balance, not both");
  if (!alpha && !balance) throw missing("[coherent] alpha or alpha_balance");
  if (alpha) {
    if (alpha->number < 0.0) throw invalid(*alpha, "coherent.alpha must be non-negative");
    ex.alpha = alpha->number;
  } else {
    if (!(balance->number > 0.0)) throw invalid(*balance, "coherent.alpha_balance must be positive");
    cfg.alpha_balance = balance->number;
  }

  const auto* gamma = get(entries, "gain", "gamma");
  const auto* g2 = get(entries, "gain", "g2_target");
  if (gamma && g2) throw invalid(*g2, "set either gain.gamma or gain.g2_target, not both");
  if (!gamma && !g2) throw missing("[gain] gamma or g2_target");
  if (gamma) {
    if (gamma->number < 0.0) throw invalid(*gamma, "gain.gamma must be non-negative");
    ex.gamma = gamma->number;
  } else {
    if (!(g2->number > 0.0)) throw invalid(*g2, "gain.g2_target must be positive");
    cfg.g2_target = g2->number;
  }
  if (const auto* c = get(entries, "gain", "cross_schmidt_second_order")) ex.cross_schmidt_second_order = c->flag;
  ex.max_total_photons = static_cast<int>(number_or(entries, "gain", "max_photons", 4));

  if (const auto* t = get(entries, "detection", "type"); t && t->text != "threshold") {
    throw invalid(*t, "detection.type must be threshold");
  }
  ex.detection.herald_efficiency = number_or(entries, "detection", "herald", 1.0);
  ex.detection.long_arm_efficiency = number_or(entries, "detection", "long", 1.0);
  ex.detection.short_arm_efficiency = number_or(entries, "detection", "short", 1.0);
  for (const char* k : {"herald", "long", "short"}) {
    const auto* e = get(entries, "detection", k);
    if (e && !(e->number > 0.0 && e->number <= 1.0)) throw invalid(*e, std::string("detection.") + k + " must lie in (0,1]");
  }

  ex.baseline_delay = number_or(entries, "scan", "baseline", 120e-6);
  if (!(ex.baseline_delay > 0.0)) throw invalid(*get(entries, "scan", "baseline"), "scan.baseline must be positive");
  if (const auto* d = get(entries, "scan", "delays")) {
    cfg.scan.delays = d->numbers;
  } else {
    for (int k = -20; k <= 20; ++k) cfg.scan.delays.push_back(ex.baseline_delay * k / 20.0);
  }
  if (const auto* r = get(entries, "scan", "ratios")) {
    for (double t : r->numbers) {
      if (!(t > 0.0 && t < 1.0)) throw invalid(*r, "scan.ratios must lie in (0,1)");
    }
    cfg.scan.ratios = r->numbers;
  } else {
    cfg.scan.ratios = {0.4, 0.3, 0.2, 0.1};
  }
  if (const auto* p = get(entries, "scan", "probe_delays")) cfg.scan.probe_delays = p->numbers;
  if (const auto* t = get(entries, "scan", "threads")) cfg.scan.threads = static_cast<unsigned>(t->number);

  for (const auto& [k, e] : entries) cfg.canonical += k.first + "." + k.second + " = " + e.canonical + "\n";
  cfg.hash = fnv1a_hex(cfg.canonical);
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, 0, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

Experiment build_experiment(const Config& cfg) {
  Experiment exp = cfg.single_mode_bandwidth
                       ? prepare(cfg.experiment,
                                 single_mode_source(gaussian_mode(cfg.experiment.grid, cfg.experiment.grid.center(),
                                                                  *cfg.single_mode_bandwidth, 0.0)))
                       : prepare(cfg.experiment);
  if (cfg.g2_target) exp.spec.gamma = calibrate_gain_for_g2(exp, *cfg.g2_target);
  if (cfg.alpha_balance) exp.spec.alpha = balanced_alpha(exp, *cfg.alpha_balance);
  return exp;
}

}  // namespace qfreq
