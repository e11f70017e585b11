#include "qfreq/fock_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "qfreq/errors.hpp"

namespace qfreq {
namespace {

void require_same_registry(const MultimodeFockState& a, const MultimodeFockState& b) {
  if (!a.registry()->same_modes(*b.registry())) {
    throw Error(ErrorKind::kRegistryMismatch, "states reference different mode registries");
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Applies a creation combo without truncation; photon counts may exceed the
// state's limit until truncate() is called.
std::map<Occupation, cplx> raise(const std::map<Occupation, cplx>& terms, const CreationCombo& combo) {
  std::map<Occupation, cplx> out;
  for (const auto& [occ, amp] : terms) {
    for (const auto& [mode, coeff] : combo.terms) {
      Occupation next = occ;
      if (next[mode] == 255) throw Error(ErrorKind::kNumeric, "occupation overflow");
      next[mode] += 1;
      out[next] += amp * coeff * std::sqrt(static_cast<double>(next[mode]));
    }
  }
  return out;
}

MultimodeFockState from_terms(const MultimodeFockState& like, std::map<Occupation, cplx> terms,
                              double extra_truncation = 0.0) {
  MultimodeFockState out(like.registry(), like.max_total_photons());
  out.add_truncated_weight(like.truncated_weight() + extra_truncation);
  for (const auto& [occ, amp] : terms) out.add(occ, amp);
  out.prune();
  return out;
}

}  // namespace

ModeRegistry::ModeRegistry(std::vector<std::string> labels, std::vector<Link> links)
    : labels_(std::move(labels)), links_(std::move(links)) {
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    if (!index_.emplace(labels_[k], k).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate mode label: " + labels_[k]);
    }
  }
}

bool ModeRegistry::contains(const std::string& label) const { return index_.count(label) != 0; }

std::size_t ModeRegistry::index_of(const std::string& label) const {
  const auto it = index_.find(label);
  if (it == index_.end()) throw Error(ErrorKind::kUnknownMode, "unknown mode label: " + label);
  return it->second;
}

std::shared_ptr<const ModeRegistry> ModeRegistry::with_link(Link link) const {
  auto links = links_;
  links.push_back(std::move(link));
  return std::make_shared<const ModeRegistry>(labels_, std::move(links));
}

RegistryPtr make_registry(std::vector<std::string> labels) {
  return std::make_shared<const ModeRegistry>(std::move(labels));
}

int total_photons(const Occupation& occ) { return std::accumulate(occ.begin(), occ.end(), 0); }

MultimodeFockState::MultimodeFockState(RegistryPtr registry, int max_total_photons)
    : registry_(std::move(registry)), max_total_photons_(max_total_photons) {
  if (!registry_) throw Error(ErrorKind::kInvalidArgument, "null registry");
  if (max_total_photons < 1) throw Error(ErrorKind::kInvalidArgument, "max_total_photons must be >= 1");
}

cplx MultimodeFockState::amplitude(const Occupation& occ) const {
  const auto it = terms_.find(occ);
  return it == terms_.end() ? cplx{0.0, 0.0} : it->second;
}

cplx MultimodeFockState::amplitude(std::initializer_list<std::pair<std::string, int>> occupied) const {
  Occupation occ(registry_->size(), 0);
  for (const auto& [label, n] : occupied) occ[registry_->index_of(label)] = static_cast<std::uint8_t>(n);
  return amplitude(occ);
}

void MultimodeFockState::add(const Occupation& occ, cplx amp) {
  if (occ.size() != registry_->size()) throw Error(ErrorKind::kRegistryMismatch, "occupation length mismatch");
  if (total_photons(occ) > max_total_photons_) {
    truncated_weight_ += std::norm(amp);
    return;
  }
  terms_[occ] += amp;
}

void MultimodeFockState::prune() {
  std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) < kPruneThreshold; });
}

void MultimodeFockState::set_registry(RegistryPtr registry) {
  if (!registry || !registry->same_modes(*registry_)) {
    throw Error(ErrorKind::kRegistryMismatch, "replacement registry has different modes");
  }
  registry_ = std::move(registry);
}

MultimodeFockState vacuum(RegistryPtr registry, int max_total_photons) {
  MultimodeFockState s(registry, max_total_photons);
  s.add(Occupation(registry->size(), 0), 1.0);
  return s;
}

MultimodeFockState apply_creation(const MultimodeFockState& state, const CreationCombo& combo) {
  return from_terms(state, raise(state.terms(), combo));
}

MultimodeFockState create(const MultimodeFockState& state, const std::string& label) {
  return apply_creation(state, CreationCombo{{{state.registry()->index_of(label), 1.0}}});
}

MultimodeFockState annihilate(const MultimodeFockState& state, const std::string& label) {
  const std::size_t mode = state.registry()->index_of(label);
  std::map<Occupation, cplx> out;
  for (const auto& [occ, amp] : state.terms()) {
    if (occ[mode] == 0) continue;
    Occupation next = occ;
    const double n = occ[mode];
    next[mode] -= 1;
    out[next] += amp * std::sqrt(n);
  }
  return from_terms(state, std::move(out));
}

MultimodeFockState weak_coherent(RegistryPtr registry, const std::string& label, cplx alpha, int order,
                                 int max_total_photons) {
  if (!(std::abs(alpha) < 1.0)) {
    throw Error(ErrorKind::kPerturbativeValidity, "weak coherent state needs |alpha| < 1");
  }
  if (order < 0 || order > 3 || order > max_total_photons) {
    throw Error(ErrorKind::kInvalidOrder, "coherent expansion order must be in [0, min(3, max_total_photons)]");
  }
  const std::size_t mode = registry->index_of(label);
  MultimodeFockState s(registry, max_total_photons);
  Occupation occ(registry->size(), 0);
  double kept = 0.0;
  for (int k = 0; k <= order; ++k) {
    occ[mode] = static_cast<std::uint8_t>(k);
    s.add(occ, std::pow(alpha, k) / std::sqrt(factorial(k)));
    kept += std::pow(std::norm(alpha), k) / factorial(k);
  }
  s.add_truncated_weight(std::max(0.0, 1.0 - std::exp(-std::norm(alpha)) * kept));
  s.prune();
  return s;
}

MultimodeFockState apply_squeezer(const MultimodeFockState& state, const SqueezerSpec& spec) {
  if (!(std::abs(spec.gain) < 0.5)) {
    throw Error(ErrorKind::kPerturbativeValidity, "squeezer gain outside perturbative guard |g| < 0.5");
  }
  const auto& reg = *state.registry();
  const auto& proj = spec.signal_projection;
  if (proj.coefficients.size() != spec.signal_labels.size()) {
    throw Error(ErrorKind::kInvalidArgument, "one signal label per projection coefficient required");
  }
  CreationCombo signal;
  for (std::size_t k = 0; k < proj.coefficients.size(); ++k) {
    signal.terms.emplace_back(reg.index_of(spec.signal_labels[k]), proj.coefficients[k]);
  }
  if (proj.remainder_coefficient > 1e-12) {
    if (!spec.remainder_label) throw Error(ErrorKind::kUnknownMode, "remainder mode needs a label");
    signal.terms.emplace_back(reg.index_of(*spec.remainder_label), proj.remainder_coefficient);
  }
  const CreationCombo idler{{{reg.index_of(spec.idler_label), 1.0}}};

  auto pair = [&](const std::map<Occupation, cplx>& t) { return raise(raise(t, signal), idler); };
  const auto once = pair(state.terms());
  const auto twice = pair(once);

  std::map<Occupation, cplx> out = state.terms();
  for (const auto& [occ, amp] : once) out[occ] += spec.gain * amp;
  for (const auto& [occ, amp] : twice) out[occ] += 0.5 * spec.gain * spec.gain * amp;
  return from_terms(state, std::move(out));
}

double BasisChange::unitarity_error() const {
  const auto n = matrix.rows();
  return (matrix * matrix.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

MultimodeFockState change_basis(const MultimodeFockState& state, const BasisChange& bc) {
  const auto& reg = *state.registry();
  if (static_cast<std::size_t>(bc.matrix.rows()) != bc.from_labels.size() ||
      static_cast<std::size_t>(bc.matrix.cols()) != bc.to_labels.size()) {
    throw Error(ErrorKind::kInvalidArgument, "basis-change matrix shape does not match labels");
  }
  if (bc.matrix.cols() < bc.matrix.rows() || bc.unitarity_error() > 1e-10) {
    throw Error(ErrorKind::kInvalidUnitary, "basis change is not unitary (error " +
                                                std::to_string(bc.unitarity_error()) + ")");
  }
  std::vector<std::size_t> from(bc.from_labels.size());
  for (std::size_t k = 0; k < from.size(); ++k) from[k] = reg.index_of(bc.from_labels[k]);
  std::vector<CreationCombo> rows(from.size());
  for (std::size_t k = 0; k < from.size(); ++k) {
    for (std::size_t j = 0; j < bc.to_labels.size(); ++j) {
      const cplx u = bc.matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
      if (u != cplx{0.0, 0.0}) rows[k].terms.emplace_back(reg.index_of(bc.to_labels[j]), u);
    }
  }

  std::map<Occupation, cplx> out;
  for (const auto& [occ, amp] : state.terms()) {
    // |n> = prod (a^dag)^n / sqrt(n!) |0>: strip the from-modes, then re-create
    // each photon through its row of the matrix.
    Occupation stripped = occ;
    double norm_factor = 1.0;
    for (std::size_t k = 0; k < from.size(); ++k) {
      norm_factor *= factorial(occ[from[k]]);
      stripped[from[k]] = 0;
    }
    std::map<Occupation, cplx> partial{{stripped, amp / std::sqrt(norm_factor)}};
    for (std::size_t k = 0; k < from.size(); ++k) {
      for (int p = 0; p < occ[from[k]]; ++p) partial = raise(partial, rows[k]);
    }
    for (const auto& [o, a] : partial) out[o] += a;
  }
  auto result = from_terms(state, std::move(out));
  result.set_registry(reg.with_link({bc.from_labels, bc.to_labels}));
  return result;
}

cplx inner(const MultimodeFockState& a, const MultimodeFockState& b) {
  require_same_registry(a, b);
  cplx acc{0.0, 0.0};
  for (const auto& [occ, amp] : a.terms()) acc += std::conj(amp) * b.amplitude(occ);
  return acc;
}

double norm(const MultimodeFockState& state) {
  double acc = 0.0;
  for (const auto& [occ, amp] : state.terms()) acc += std::norm(amp);
  return std::sqrt(acc);
}

MultimodeFockState operator+(const MultimodeFockState& a, const MultimodeFockState& b) {
  require_same_registry(a, b);
  auto terms = a.terms();
  for (const auto& [occ, amp] : b.terms()) terms[occ] += amp;
  return from_terms(a, std::move(terms), b.truncated_weight());
}

MultimodeFockState operator*(cplx s, const MultimodeFockState& a) {
  auto terms = a.terms();
  for (auto& kv : terms) kv.second *= s;
  return from_terms(a, std::move(terms));
}

double mean_photons(const MultimodeFockState& state, std::span<const std::string> labels) {
  std::vector<std::size_t> idx;
  for (const auto& l : labels) idx.push_back(state.registry()->index_of(l));
  double num = 0.0;
  double den = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    int n = 0;
    for (auto i : idx) n += occ[i];
    num += n * std::norm(amp);
    den += std::norm(amp);
  }
  return num / den;
}

std::string debug_dump(const MultimodeFockState& state) {
  std::ostringstream os;
  char buf[96];
  for (const auto& [occ, amp] : state.terms()) {
    for (std::size_t k = 0; k < occ.size(); ++k) os << (k ? " " : "") << static_cast<int>(occ[k]);
    std::snprintf(buf, sizeof buf, " : %+.12e %+.12e\n", amp.real(), amp.imag());
    os << buf;
  }
  return os.str();
}

BinUnitary build_bin_unitary(std::span<const SpectralMode> modes, double cut_omega,
                             std::span<const std::string> from_labels, const std::string& prefix) {
  if (modes.size() != from_labels.size()) {
    throw Error(ErrorKind::kInvalidArgument, "one label per mode required");
  }
  if (modes.empty()) throw Error(ErrorKind::kInvalidArgument, "no modes to bin");
  if (overlap_matrix(modes).deviation_from_identity() > 1e-8) {
    throw Error(ErrorKind::kInvalidBasis, "bin unitary needs orthonormal modes");
  }
  const auto& grid = modes.front().grid();

  auto part = [&](const SpectralMode& m, Bin bin) {
    std::vector<cplx> amp(m.amplitude().begin(), m.amplitude().end());
    for (std::size_t k = 0; k < amp.size(); ++k) {
      const bool is_short = grid.omega(k) >= cut_omega;
      if (is_short != (bin == Bin::kShort)) amp[k] = 0.0;
    }
    return SpectralMode(grid, std::move(amp));
  };

  BinUnitary out;
  std::vector<SpectralMode> long_parts;
  std::vector<SpectralMode> short_parts;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    auto lp = part(modes[k], Bin::kLong);
    auto sp = part(modes[k], Bin::kShort);
    if (lp.norm() < 1e-12 || sp.norm() < 1e-12) out.degenerate_modes.push_back(k);
    long_parts.push_back(std::move(lp));
    short_parts.push_back(std::move(sp));
  }
  const auto long_basis = extend_orthonormal({}, long_parts, 1e-10);
  const auto short_basis = extend_orthonormal({}, short_parts, 1e-10);

  for (std::size_t j = 0; j < long_basis.size(); ++j) {
    out.change.to_labels.push_back(prefix + "-long-" + std::to_string(j));
    out.bins.push_back(Bin::kLong);
    out.bin_vectors.push_back(long_basis[j]);
  }
  for (std::size_t j = 0; j < short_basis.size(); ++j) {
    out.change.to_labels.push_back(prefix + "-short-" + std::to_string(j));
    out.bins.push_back(Bin::kShort);
    out.bin_vectors.push_back(short_basis[j]);
  }
  out.change.from_labels.assign(from_labels.begin(), from_labels.end());
  const auto rows = static_cast<Eigen::Index>(modes.size());
  const auto cols = static_cast<Eigen::Index>(out.bin_vectors.size());
  out.change.matrix = Eigen::MatrixXcd::Zero(rows, cols);
  for (Eigen::Index k = 0; k < rows; ++k) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      out.change.matrix(k, j) =
          inner_product(out.bin_vectors[static_cast<std::size_t>(j)], modes[static_cast<std::size_t>(k)]);
    }
  }
  return out;
}

}  // namespace qfreq
