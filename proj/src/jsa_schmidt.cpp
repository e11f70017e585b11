#include "qfreq/jsa_schmidt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/SVD>

#include "qfreq/errors.hpp"

namespace qfreq {
namespace {

constexpr double kLn2 = std::numbers::ln2;
// sinc^2(x) = 1/2 at x = 1.39156
constexpr double kSincHalfPoint = 1.3915573782515103;

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

double phase_matching_value(const PhaseMatchingModel& pm, double detune_s, double detune_i) {
  // Distance across the ridge: component along the ridge normal.
  const double u = -std::sin(pm.tilt_angle) * detune_s + std::cos(pm.tilt_angle) * detune_i;
  switch (pm.kind) {
    case PhaseMatchingKind::kGaussianApprox:
      return std::exp(-2.0 * kLn2 * u * u / (pm.width * pm.width));
    case PhaseMatchingKind::kSinc:
      return sinc(2.0 * kSincHalfPoint * u / pm.width);
    case PhaseMatchingKind::kTabulated:
      break;
  }
  throw Error(ErrorKind::kInvalidArgument, "tabulated phase matching has no analytic value");
}

void validate(const PumpModel& pump, const PhaseMatchingModel& pm) {
  if (!(pump.fwhm > 0.0)) throw Error(ErrorKind::kInvalidArgument, "pump fwhm must be positive");
  if (pm.kind != PhaseMatchingKind::kTabulated && !(pm.width > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "phase-matching width must be positive");
  }
}

}  // namespace

PumpModel PumpModel::transform_limited(double center_omega, double duration, double chirp) {
  if (!(duration > 0.0)) throw Error(ErrorKind::kInvalidArgument, "pump duration must be positive");
  // Gaussian time-bandwidth product: fwhm_omega * fwhm_t = 4 ln 2.
  return PumpModel{center_omega, 4.0 * kLn2 / duration, chirp};
}

JointSpectralAmplitude::JointSpectralAmplitude(FrequencyGrid signal_grid, FrequencyGrid idler_grid,
                                               Eigen::MatrixXcd amplitude)
    : signal_grid_(signal_grid), idler_grid_(idler_grid), amplitude_(std::move(amplitude)) {
  if (static_cast<std::size_t>(amplitude_.rows()) != signal_grid_.size() ||
      static_cast<std::size_t>(amplitude_.cols()) != idler_grid_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "JSA matrix does not match grids");
  }
}

double JointSpectralAmplitude::norm() const {
  return amplitude_.norm() * std::sqrt(signal_grid_.omega_step() * idler_grid_.omega_step());
}

JointSpectralAmplitude normalize(const JointSpectralAmplitude& jsa) {
  const double n = jsa.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::kEmptyJsa, "joint spectral amplitude is zero");
  return JointSpectralAmplitude(jsa.signal_grid(), jsa.idler_grid(), jsa.amplitude() / n);
}

cplx jsa_value(const PumpModel& pump, const PhaseMatchingModel& pm, double omega_s, double omega_i) {
  const double center = 0.5 * pump.center_omega;
  const double ds = omega_s - center;
  const double di = omega_i - center;
  const double dp = ds + di;
  const double envelope = std::exp(-2.0 * kLn2 * dp * dp / (pump.fwhm * pump.fwhm));
  const cplx pump_amp = pump.chirp == 0.0 ? cplx(envelope, 0.0) : std::polar(envelope, 0.5 * pump.chirp * dp * dp);
  return pump_amp * phase_matching_value(pm, ds, di);
}

JsaBuild build_jsa(const PumpModel& pump, const PhaseMatchingModel& pm, const FrequencyGrid& signal_grid,
                   const FrequencyGrid& idler_grid) {
  validate(pump, pm);
  const auto ns = static_cast<Eigen::Index>(signal_grid.size());
  const auto ni = static_cast<Eigen::Index>(idler_grid.size());
  Eigen::MatrixXcd amp(ns, ni);
  if (pm.kind == PhaseMatchingKind::kTabulated) {
    if (!pm.table || pm.table->rows() != ns || pm.table->cols() != ni) {
      throw Error(ErrorKind::kInvalidArgument, "phase-matching table does not match grids");
    }
    const double center = 0.5 * pump.center_omega;
    for (Eigen::Index j = 0; j < ns; ++j) {
      for (Eigen::Index k = 0; k < ni; ++k) {
        const double dp = signal_grid.omega(static_cast<std::size_t>(j)) - center +
                          idler_grid.omega(static_cast<std::size_t>(k)) - center;
        const double envelope = std::exp(-2.0 * kLn2 * dp * dp / (pump.fwhm * pump.fwhm));
        amp(j, k) = (*pm.table)(j, k) * std::polar(envelope, 0.5 * pump.chirp * dp * dp);
      }
    }
  } else {
    for (Eigen::Index j = 0; j < ns; ++j) {
      for (Eigen::Index k = 0; k < ni; ++k) {
        amp(j, k) = jsa_value(pump, pm, signal_grid.omega(static_cast<std::size_t>(j)),
                              idler_grid.omega(static_cast<std::size_t>(k)));
      }
    }
  }

  // Energy on the outermost rows/columns is a proxy for clipping: a ridge that
  // runs off the grid leaves weight on its boundary.
  const double total = amp.squaredNorm();
  if (!(total > 0.0)) throw Error(ErrorKind::kEmptyJsa, "pump and phase matching do not overlap on the grids");
  const double edge = amp.row(0).squaredNorm() + amp.row(ns - 1).squaredNorm() + amp.col(0).squaredNorm() +
                      amp.col(ni - 1).squaredNorm();
  return JsaBuild{normalize(JointSpectralAmplitude(signal_grid, idler_grid, std::move(amp))), edge / total};
}

JointSpectralAmplitude jsa_from_intensity(const FrequencyGrid& signal_grid, const FrequencyGrid& idler_grid,
                                          const Eigen::MatrixXd& intensity,
                                          const std::optional<Eigen::MatrixXd>& phase) {
  if (phase && (phase->rows() != intensity.rows() || phase->cols() != intensity.cols())) {
    throw Error(ErrorKind::kInvalidArgument, "phase table does not match intensity table");
  }
  Eigen::MatrixXcd amp(intensity.rows(), intensity.cols());
  for (Eigen::Index j = 0; j < intensity.rows(); ++j) {
    for (Eigen::Index k = 0; k < intensity.cols(); ++k) {
      if (intensity(j, k) < 0.0) throw Error(ErrorKind::kInvalidArgument, "negative JSI entry");
      amp(j, k) = std::polar(std::sqrt(intensity(j, k)), phase ? (*phase)(j, k) : 0.0);
    }
  }
  return normalize(JointSpectralAmplitude(signal_grid, idler_grid, std::move(amp)));
}

SchmidtDecomposition schmidt_decompose(const JointSpectralAmplitude& jsa, std::size_t n_kept, double threshold) {
  if (n_kept < 1) throw Error(ErrorKind::kInvalidArgument, "n_kept must be at least 1");
  const double ds = jsa.signal_grid().omega_step();
  const double di = jsa.idler_grid().omega_step();
  const Eigen::MatrixXcd weighted = jsa.amplitude() * std::sqrt(ds * di);

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(weighted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumeric, "SVD failed for " + std::to_string(weighted.rows()) + "x" +
                                         std::to_string(weighted.cols()) + " JSA");
  }
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::MatrixXcd& u = svd.matrixU();
  const Eigen::MatrixXcd& v = svd.matrixV();

  SchmidtDecomposition d;
  d.all_coefficients.assign(sv.data(), sv.data() + sv.size());
  d.total_weight = sv.squaredNorm();
  if (!(sv.size() > 0 && sv(0) > 0.0)) throw Error(ErrorKind::kNumeric, "JSA has no nonzero singular value");

  std::size_t above = 0;
  while (above < static_cast<std::size_t>(sv.size()) && sv(static_cast<Eigen::Index>(above)) >= threshold) ++above;
  const std::size_t keep = std::min<std::size_t>(std::max(n_kept, above), static_cast<std::size_t>(sv.size()));
  d.n_kept = keep;

  Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Zero(weighted.rows(), weighted.cols());
  for (std::size_t n = 0; n < keep; ++n) {
    const auto idx = static_cast<Eigen::Index>(n);
    Eigen::VectorXcd us = u.col(idx);
    Eigen::VectorXcd vi = v.col(idx).conjugate();  // A = sum r u (conj v)^T
    Eigen::Index peak = 0;
    us.cwiseAbs().maxCoeff(&peak);
    const cplx phase = std::abs(us(peak)) > 0.0 ? us(peak) / std::abs(us(peak)) : cplx(1.0, 0.0);
    us /= phase;
    vi *= phase;
    rebuilt += sv(idx) * us * vi.transpose();

    std::vector<cplx> s_amp(us.data(), us.data() + us.size());
    std::vector<cplx> i_amp(vi.data(), vi.data() + vi.size());
    for (auto& x : s_amp) x /= std::sqrt(ds);
    for (auto& x : i_amp) x /= std::sqrt(di);
    d.coefficients.push_back(sv(idx));
    d.signal_modes.emplace_back(jsa.signal_grid(), std::move(s_amp));
    d.idler_modes.emplace_back(jsa.idler_grid(), std::move(i_amp));
  }
  d.truncation_remainder = 0.0;
  for (auto n = static_cast<Eigen::Index>(keep); n < sv.size(); ++n) d.truncation_remainder += sv(n) * sv(n);
  d.reconstruction_residual = (weighted - rebuilt).norm();
  return d;
}

std::size_t default_kept_modes(std::span<const double> coefficients, double cumulative, std::size_t max_modes) {
  double total = 0.0;
  for (double r : coefficients) total += r * r;
  double running = 0.0;
  std::size_t n = 0;
  while (n < coefficients.size() && n < max_modes) {
    running += coefficients[n] * coefficients[n];
    ++n;
    if (running >= cumulative * total) break;
  }
  return std::max<std::size_t>(n, 1);
}

double purity(const SchmidtDecomposition& d) {
  double sum_p = 0.0;
  double sum_p2 = 0.0;
  for (double r : d.coefficients) {
    sum_p += r * r;
    sum_p2 += r * r * r * r;
  }
  return sum_p2 / (sum_p * sum_p);
}

double schmidt_number(const SchmidtDecomposition& d) { return 1.0 / purity(d); }

std::vector<SpectralMode> lift_signal_modes(const PumpModel& pump, const PhaseMatchingModel& pm,
                                            const SchmidtDecomposition& d, const FrequencyGrid& target) {
  std::vector<SpectralMode> out;
  out.reserve(d.n_kept);
  if (pm.kind == PhaseMatchingKind::kTabulated) {
    for (const auto& m : d.signal_modes) out.push_back(normalize(resample(m, target)));
    return out;
  }
  const auto& idler_grid = d.idler_modes.front().grid();
  const double di = idler_grid.omega_step();
  // Row k of the kernel: A(target_k, idler grid).
  Eigen::MatrixXcd kernel(static_cast<Eigen::Index>(target.size()), static_cast<Eigen::Index>(idler_grid.size()));
  for (std::size_t k = 0; k < target.size(); ++k) {
    for (std::size_t i = 0; i < idler_grid.size(); ++i) {
      kernel(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
          jsa_value(pump, pm, target.omega(k), idler_grid.omega(i));
    }
  }
  for (std::size_t n = 0; n < d.n_kept; ++n) {
    const auto idler = d.idler_modes[n].amplitude();
    Eigen::VectorXcd conj_idler(static_cast<Eigen::Index>(idler.size()));
    for (std::size_t i = 0; i < idler.size(); ++i) conj_idler(static_cast<Eigen::Index>(i)) = std::conj(idler[i]);
    Eigen::VectorXcd col = kernel * conj_idler * di;
    out.push_back(normalize(SpectralMode(target, std::vector<cplx>(col.data(), col.data() + col.size()))));
  }
  return out;
}

ModeProjection project_onto(const SpectralMode& mode, std::span<const SpectralMode> basis) {
  if (!basis.empty() && overlap_matrix(basis).deviation_from_identity() > 1e-8) {
    throw Error(ErrorKind::kInvalidBasis, "projection basis is not orthonormal");
  }
  ModeProjection p;
  std::vector<cplx> residual(mode.amplitude().begin(), mode.amplitude().end());
  double captured = 0.0;
  for (const auto& b : basis) {
    const cplx c = inner_product(b, mode);
    p.coefficients.push_back(c);
    captured += std::norm(c);
    for (std::size_t k = 0; k < residual.size(); ++k) residual[k] -= c * b[k];
  }
  const double total = mode.norm() * mode.norm();
  SpectralMode rest(mode.grid(), std::move(residual));
  const double rest_norm = rest.norm();
  // Remainder coefficient from the residual itself; near-zero remainders are
  // reported from the energy balance so sum |c|^2 closes exactly.
  if (rest_norm > 1e-7) {
    p.remainder_coefficient = rest_norm;
    p.remainder_mode = normalize(rest);
  } else {
    p.remainder_coefficient = std::sqrt(std::max(0.0, total - captured));
  }
  return p;
}

ModeProjection project_mode(const SchmidtDecomposition& d, std::size_t n, std::span<const SpectralMode> basis) {
  if (n >= d.n_kept) throw Error(ErrorKind::kInvalidArgument, "Schmidt index out of range");
  return project_onto(d.signal_modes[n], basis);
}

}  // namespace qfreq
