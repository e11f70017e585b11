#pragma once

// Independent reference for three-fold coincidences. Everything is rebuilt
// from raw sample vectors: creation-operator polynomials over an orthonormal
// bin basis, expanded term by term and truncated at four photons. Nothing
// here touches the library's Fock or interference code.

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Vec = std::vector<cplx>;

struct Grid {
  double start;
  double step;
  std::size_t n;
  double omega(std::size_t k) const { return start + static_cast<double>(k) * step; }
};

inline Grid grid(double center, double span, std::size_t n) {
  return Grid{center - 0.5 * span, span / static_cast<double>(n - 1), n};
}

inline cplx dot(const Vec& a, const Vec& b, double step) {
  cplx s{0.0, 0.0};
  for (std::size_t k = 0; k < a.size(); ++k) s += std::conj(a[k]) * b[k];
  return s * step;
}

inline Vec normalized(Vec v, double step) {
  const double n = std::sqrt(dot(v, v, step).real());
  for (auto& x : v) x /= n;
  return v;
}

inline Vec gaussian(const Grid& g, double center, double fwhm) {
  Vec v(g.n);
  for (std::size_t k = 0; k < g.n; ++k) {
    const double x = g.omega(k) - center;
    v[k] = std::exp(-2.0 * std::numbers::ln2 * x * x / (fwhm * fwhm));
  }
  return normalized(std::move(v), g.step);
}

// Boundary between samples with the lower energy closest to `fraction`.
inline double quantile_cut(const Grid& g, const Vec& v, double fraction) {
  double total = 0.0;
  for (const auto& x : v) total += std::norm(x);
  double run = 0.0, best_err = 2.0;
  std::size_t best = 0;
  for (std::size_t k = 0; k + 1 < g.n; ++k) {
    run += std::norm(v[k]);
    if (std::abs(run / total - fraction) < best_err) {
      best_err = std::abs(run / total - fraction);
      best = k;
    }
  }
  return 0.5 * (g.omega(best) + g.omega(best + 1));
}

inline double energy_below(const Grid& g, const Vec& v, double cut) {
  double lo = 0.0, total = 0.0;
  for (std::size_t k = 0; k < g.n; ++k) {
    total += std::norm(v[k]);
    if (g.omega(k) < cut) lo += std::norm(v[k]);
  }
  return lo / total;
}

// Flip the sign below the cut and reweight to (1 - t) below, t above, with
// t = energy below the cut: orthogonal to the input.
inline Vec pi_flipped(const Grid& g, const Vec& v, double cut) {
  const double lo = energy_below(g, v, cut);
  const double t = lo;
  Vec out(g.n);
  for (std::size_t k = 0; k < g.n; ++k) {
    out[k] = g.omega(k) >= cut ? v[k] * std::sqrt(t / (1.0 - lo)) : -v[k] * std::sqrt((1.0 - t) / lo);
  }
  return normalized(std::move(out), g.step);
}

inline Vec delayed(const Grid& g, const Vec& v, double path) {
  constexpr double c = 299792458.0;
  Vec out(g.n);
  for (std::size_t k = 0; k < g.n; ++k) out[k] = v[k] * std::polar(1.0, g.omega(k) * path / c);
  return out;
}

// Polynomial in commuting creation operators; key = exponent per variable.
using Poly = std::map<std::vector<int>, cplx>;

inline Poly multiply(const Poly& a, const Poly& b, int max_degree) {
  Poly out;
  for (const auto& [ea, ca] : a) {
    for (const auto& [eb, cb] : b) {
      std::vector<int> e(ea.size());
      int deg = 0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = ea[i] + eb[i];
        deg += e[i];
      }
      if (deg <= max_degree) out[e] += ca * cb;
    }
  }
  return out;
}

inline Poly constant(std::size_t vars, cplx c) { return Poly{{std::vector<int>(vars, 0), c}}; }

inline Poly linear(const std::vector<cplx>& coeffs) {
  Poly p;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    std::vector<int> e(coeffs.size(), 0);
    e[i] = 1;
    if (coeffs[i] != cplx{0.0, 0.0}) p[e] += coeffs[i];
  }
  return p;
}

inline Poly add(Poly a, const Poly& b) {
  for (const auto& [e, c] : b) a[e] += c;
  return a;
}

inline Poly scale(Poly a, cplx s) {
  for (auto& kv : a) kv.second *= s;
  return a;
}

struct Source {
  std::vector<Vec> signal_modes;  // orthonormal
  std::vector<double> coefficients;
};

struct Result {
  double coincidence;
  double herald;
};

// Three-fold coincidence for a coherent pulse in `coherent` and a pair source,
// all on grid g, bins split at `cut`, ideal threshold detectors.
inline Result three_fold(const Grid& g, const Vec& coherent, const Source& src, double cut, double alpha,
                         double gamma) {
  // Orthonormal basis of each bin from the bin-restricted parts of every mode.
  std::vector<Vec> inputs{coherent};
  for (const auto& m : src.signal_modes) inputs.push_back(m);
  std::vector<Vec> basis;
  std::vector<bool> is_long;
  for (bool want_long : {true, false}) {
    for (const auto& m : inputs) {
      Vec part(g.n);
      for (std::size_t k = 0; k < g.n; ++k) part[k] = (g.omega(k) < cut) == want_long ? m[k] : cplx{0.0, 0.0};
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
          const cplx o = dot(b, part, g.step);
          for (std::size_t k = 0; k < g.n; ++k) part[k] -= o * b[k];
        }
      }
      const double nrm = std::sqrt(dot(part, part, g.step).real());
      if (nrm > 1e-9) {
        for (auto& x : part) x /= nrm;
        basis.push_back(std::move(part));
        is_long.push_back(want_long);
      }
    }
  }
  const std::size_t nb = basis.size();
  const std::size_t ni = src.signal_modes.size();
  const std::size_t vars = nb + ni;
  auto creation = [&](const Vec& mode) {
    std::vector<cplx> c(vars, cplx{0.0, 0.0});
    for (std::size_t j = 0; j < nb; ++j) c[j] = dot(basis[j], mode, g.step);
    return linear(c);
  };
  const int max_deg = 4;

  const Poly a1 = creation(coherent);
  Poly state = add(add(constant(vars, 1.0), scale(a1, alpha)), scale(multiply(a1, a1, max_deg), alpha * alpha / 2.0));
  for (std::size_t n = 0; n < ni; ++n) {
    std::vector<cplx> idler(vars, cplx{0.0, 0.0});
    idler[nb + n] = 1.0;
    const Poly pair = multiply(creation(src.signal_modes[n]), linear(idler), max_deg);
    const double gn = gamma * src.coefficients[n];
    const Poly squeezer =
        add(add(constant(vars, 1.0), scale(pair, gn)), scale(multiply(pair, pair, max_deg), gn * gn / 2.0));
    state = multiply(state, squeezer, max_deg);
  }

  double total = 0.0, herald = 0.0, coinc = 0.0;
  for (const auto& [e, c] : state) {
    double fact = 1.0;
    for (int x : e) {
      for (int k = 2; k <= x; ++k) fact *= k;
    }
    const double w = std::norm(c) * fact;
    int nl = 0, ns = 0, nid = 0;
    for (std::size_t j = 0; j < nb; ++j) (is_long[j] ? nl : ns) += e[j];
    for (std::size_t n = 0; n < ni; ++n) nid += e[nb + n];
    total += w;
    if (nid > 0) {
      herald += w;
      if (nl > 0 && ns > 0) coinc += w;
    }
  }
  return Result{coinc / total, herald / total};
}

// Single photons in modes a and b meeting an effective splitter of
// transmission t: coincidence with indistinguishable inputs over the
// distinguishable baseline, from the four two-photon amplitudes.
inline double two_photon_visibility(double t) {
  const double s = std::sqrt(t), r = std::sqrt(1.0 - t);
  // a -> s c + r d, b -> -r c + s d
  const double amp_cd = s * s - r * r;
  const double dist = s * s * s * s + r * r * r * r;
  return 1.0 - amp_cd * amp_cd / dist;
}

}  // namespace oracle
