#pragma once

// Truncated multimode Fock states over a registry of labelled orthonormal
// modes, with the perturbative state-preparation operators used by the
// interference pipeline.
//
// States are sparse maps from occupation vectors to amplitudes. They are kept
// unnormalized exactly as the perturbative expansions produce them;
// probabilities are taken relative to the state norm.

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qfreq/jsa_schmidt.hpp"
#include "qfreq/spectral_modes.hpp"

namespace qfreq {

class ModeRegistry {
 public:
  struct Link {
    std::vector<std::string> from;
    std::vector<std::string> to;
  };

  explicit ModeRegistry(std::vector<std::string> labels, std::vector<Link> links = {});

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<Link>& links() const { return links_; }
  bool contains(const std::string& label) const;
  /// Throws unknown-mode.
  std::size_t index_of(const std::string& label) const;

  std::shared_ptr<const ModeRegistry> with_link(Link link) const;

  /// Registries are compatible when their label lists agree.
  bool same_modes(const ModeRegistry& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, std::size_t> index_;
  std::vector<Link> links_;
};

using RegistryPtr = std::shared_ptr<const ModeRegistry>;
RegistryPtr make_registry(std::vector<std::string> labels);

using Occupation = std::vector<std::uint8_t>;

class MultimodeFockState {
 public:
  static constexpr double kPruneThreshold = 1e-15;

  MultimodeFockState(RegistryPtr registry, int max_total_photons);

  const RegistryPtr& registry() const { return registry_; }
  int max_total_photons() const { return max_total_photons_; }
  const std::map<Occupation, cplx>& terms() const { return terms_; }
  /// Accumulated squared amplitude of terms dropped by photon-number truncation.
  double truncated_weight() const { return truncated_weight_; }

  cplx amplitude(const Occupation& occ) const;
  /// Amplitude of the term with the given (label, count) occupations, all
  /// other modes empty.
  cplx amplitude(std::initializer_list<std::pair<std::string, int>> occupied) const;

  // Mutators for building states; they respect truncation and pruning.
  void add(const Occupation& occ, cplx amp);
  void add_truncated_weight(double w) { truncated_weight_ += w; }
  void prune();
  void set_registry(RegistryPtr registry);

 private:
  RegistryPtr registry_;
  int max_total_photons_;
  std::map<Occupation, cplx> terms_;
  double truncated_weight_ = 0.0;
};

int total_photons(const Occupation& occ);

MultimodeFockState vacuum(RegistryPtr registry, int max_total_photons);

/// Linear combination sum_k coeff_k a^dagger_{label_k}.
struct CreationCombo {
  std::vector<std::pair<std::size_t, cplx>> terms;
};

MultimodeFockState create(const MultimodeFockState& state, const std::string& label);
MultimodeFockState annihilate(const MultimodeFockState& state, const std::string& label);
MultimodeFockState apply_creation(const MultimodeFockState& state, const CreationCombo& combo);

/// Coherent state truncated at `order` photons, unnormalized:
/// sum_k alpha^k / sqrt(k!) |k>.
MultimodeFockState weak_coherent(RegistryPtr registry, const std::string& label, cplx alpha, int order,
                                 int max_total_photons = 4);

struct SqueezerSpec {
  double gain = 0.0;  // gamma_n = gamma * r_n
  std::size_t schmidt_index = 0;
  std::vector<std::string> signal_labels;  // one per projection coefficient
  ModeProjection signal_projection;
  std::optional<std::string> remainder_label;  // required when the remainder is nonzero
  std::string idler_label;
};

/// 1 + g A^dag B^dag + (g^2/2) (A^dag B^dag)^2 with A^dag expanded over the
/// projection labels and B^dag the idler mode.
MultimodeFockState apply_squeezer(const MultimodeFockState& state, const SqueezerSpec& spec);

struct BasisChange {
  std::vector<std::string> from_labels;
  std::vector<std::string> to_labels;
  // a^dag_{from_k} = sum_j matrix(k, j) b^dag_{to_j}; rows orthonormal.
  Eigen::MatrixXcd matrix;

  /// max |U U^dag - I|
  double unitarity_error() const;
};

MultimodeFockState change_basis(const MultimodeFockState& state, const BasisChange& bc);

cplx inner(const MultimodeFockState& a, const MultimodeFockState& b);
double norm(const MultimodeFockState& state);

MultimodeFockState operator+(const MultimodeFockState& a, const MultimodeFockState& b);
MultimodeFockState operator*(cplx s, const MultimodeFockState& a);

/// <sum_{labels} n> / <psi|psi>
double mean_photons(const MultimodeFockState& state, std::span<const std::string> labels);

/// One line per term: occupation vector then amplitude, lexicographic order.
std::string debug_dump(const MultimodeFockState& state);

enum class Bin { kLong, kShort };

struct BinUnitary {
  BasisChange change;
  std::vector<Bin> bins;                 // per output label
  std::vector<SpectralMode> bin_vectors; // per output label
  std::vector<std::size_t> degenerate_modes;  // modes lying entirely in one bin
};

/// Splits each orthonormal mode into its omega < cut (long wavelength) and
/// omega >= cut parts and orthonormalizes those parts within each bin.
/// Output labels are "<prefix>-long-<k>" and "<prefix>-short-<k>".
BinUnitary build_bin_unitary(std::span<const SpectralMode> modes, double cut_omega,
                             std::span<const std::string> from_labels, const std::string& prefix = "bin");

}  // namespace qfreq
