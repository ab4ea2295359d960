#include "febench/rf_resonator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "febench/constants.hpp"
#include "febench/numerics.hpp"

namespace febench::rf {

using namespace febench::phys;

void TankCircuit::validate() const {
  require(L > 0.0 && C > 0.0 && C_c > 0.0 && R > 0.0 && Z_line > 0.0, "TankCircuit: all elements must be positive");
}

void QualityFactors::validate() const {
  require(f0 > 0.0 && Q_tot > 0.0 && Q_ext > 0.0 && Q_int > 0.0, "QualityFactors: values must be positive");
  require(Q_tot <= Q_ext * (1.0 + 1e-12), "QualityFactors: Q_tot cannot exceed Q_ext");
}

QualityFactors QualityFactors::from_loaded(double f0, double Q_tot, double Q_ext) {
  require(f0 > 0.0 && Q_tot > 0.0 && Q_ext > 0.0, "QualityFactors: values must be positive");
  require(Q_tot <= Q_ext * (1.0 + 1e-12), "QualityFactors: Q_tot cannot exceed Q_ext");
  QualityFactors q;
  q.f0 = f0;
  q.Q_tot = Q_tot;
  q.Q_ext = Q_ext;
  const double inv_int = 1.0 / Q_tot - 1.0 / Q_ext;
  q.Q_int = inv_int > 0.0 ? 1.0 / inv_int : std::numeric_limits<double>::infinity();
  return q;
}

QualityFactors quality_factors(const TankCircuit& tc) {
  tc.validate();
  const double Ct = tc.C_t();
  const double w0 = 1.0 / std::sqrt(tc.L * Ct);
  QualityFactors q;
  q.f0 = w0 / (2.0 * pi);
  q.Q_int = std::isfinite(tc.R) ? w0 * Ct * tc.R : std::numeric_limits<double>::infinity();
  q.Q_ext = Ct / (tc.Z_line * w0 * tc.C_c * tc.C_c);
  const double g = (std::isfinite(tc.R) ? 1.0 / tc.R : 0.0) + std::pow(w0 * tc.C_c * tc.Z_line, 2) / tc.Z_line;
  q.Q_tot = w0 * Ct / g;
  return q;
}

cplx reflection_coefficient(double f, const QualityFactors& qf) {
  const cplx den(1.0, 2.0 * qf.Q_tot * (f / qf.f0 - 1.0));
  return 1.0 - (2.0 * qf.Q_tot / qf.Q_ext) / den;
}

cplx reflection_shift(double dC, const QualityFactors& qf, const TankCircuit& tc, Warnings* warn) {
  const double x = dC / tc.C_t();
  if (warn && std::abs(x) > 1e-3) warn->push_back("reflection_shift: |dC|/C_t > 1e-3, linearization inaccurate");
  return cplx(0.0, -2.0 * qf.Q_tot * qf.Q_tot / qf.Q_ext * x);
}

cplx reflection_shift_exact(double dC, const QualityFactors& qf, const TankCircuit& tc) {
  QualityFactors shifted = qf;
  shifted.f0 = qf.f0 / std::sqrt(1.0 + dC / tc.C_t());
  return reflection_coefficient(qf.f0, shifted) - reflection_coefficient(qf.f0, qf);
}

SidebandSensitivity sideband_and_sensitivity(double V_RF, double dC, const QualityFactors& qf, double C_t, double G,
                                             double V_n, double B) {
  require(V_RF >= 0.0 && G > 0.0 && V_n >= 0.0 && B > 0.0 && C_t > 0.0, "sideband_and_sensitivity: bad inputs");
  SidebandSensitivity out;
  const double resp = qf.Q_tot * qf.Q_tot / qf.Q_ext;
  out.V_s = G * resp * std::abs(dC) / C_t * V_RF;
  out.S_c = V_RF > 0.0 ? qf.Q_ext * C_t * V_n / (G * qf.Q_tot * qf.Q_tot * std::sqrt(B) * V_RF)
                       : std::numeric_limits<double>::infinity();
  return out;
}

double single_electron_prefactor(double dq, double T, const QualityFactors& qf, double G, double V_RF) {
  require(T > 0.0, "single_electron_prefactor: T must be positive");
  return G * qf.Q_tot * qf.Q_tot / qf.Q_ext * dq * V_RF / (4.0 * kB * T);
}

double single_electron_signal(double dq, double T, const TankCircuit& tc, const QualityFactors& qf, double G,
                              double V_RF) {
  require(T > 0.0, "single_electron_signal: T must be positive");
  return G * qf.Q_int * dq * V_RF / (16.0 * kB * T) * (dq / tc.C_t());
}

// ---------------------------------------------------------------------------

cplx resonance_model(double f, const ResonanceModel& m, FitMode mode) {
  const double k = mode == FitMode::reflection ? 2.0 : 1.0;
  const cplx coupling = k * m.Q_tot / m.Q_ext_mag * std::exp(cplx(0.0, m.phi));
  const cplx core = 1.0 - coupling / cplx(1.0, 2.0 * m.Q_tot * (f / m.f0 - 1.0));
  return m.a * std::exp(cplx(0.0, m.alpha - 2.0 * pi * f * m.tau)) * core;
}

std::vector<cplx> resonance_model(const std::vector<double>& f, const ResonanceModel& m, FitMode mode) {
  std::vector<cplx> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = resonance_model(f[i], m, mode);
  return out;
}

std::vector<cplx> add_complex_noise(const std::vector<cplx>& s, double scale, double snr_db, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double sigma = std::abs(scale) * std::pow(10.0, -snr_db / 20.0) / std::sqrt(2.0);
  std::normal_distribution<double> nd(0.0, sigma);
  std::vector<cplx> out(s);
  for (auto& v : out) v += cplx(nd(rng), nd(rng));
  return out;
}

namespace {

struct Circle {
  cplx center;
  double radius = 0.0;
};

// Taubin algebraic circle fit (Newton on the characteristic polynomial).
Circle taubin(const std::vector<cplx>& z) {
  const double n = double(z.size());
  double mx = 0.0, my = 0.0;
  for (const auto& v : z) {
    mx += v.real();
    my += v.imag();
  }
  mx /= n;
  my /= n;
  double Mxx = 0, Myy = 0, Mxy = 0, Mxz = 0, Myz = 0, Mzz = 0;
  for (const auto& v : z) {
    const double X = v.real() - mx, Y = v.imag() - my, Z = X * X + Y * Y;
    Mxy += X * Y;
    Mxx += X * X;
    Myy += Y * Y;
    Mxz += X * Z;
    Myz += Y * Z;
    Mzz += Z * Z;
  }
  Mxx /= n;
  Myy /= n;
  Mxy /= n;
  Mxz /= n;
  Myz /= n;
  Mzz /= n;
  const double Mz = Mxx + Myy;
  const double cov = Mxx * Myy - Mxy * Mxy;
  const double var_z = Mzz - Mz * Mz;
  const double A3 = 4.0 * Mz;
  const double A2 = -3.0 * Mz * Mz - Mzz;
  const double A1 = var_z * Mz + 4.0 * cov * Mz - Mxz * Mxz - Myz * Myz;
  const double A0 = Mxz * (Mxz * Myy - Myz * Mxy) + Myz * (Myz * Mxx - Mxz * Mxy) - var_z * cov;
  double x = 0.0, y = A0;
  for (int it = 0; it < 99; ++it) {
    const double dy = A1 + x * (2.0 * A2 + 3.0 * A3 * x);
    const double xn = x - y / dy;
    if (xn == x || !std::isfinite(xn)) break;
    const double yn = A0 + xn * (A1 + xn * (A2 + xn * A3));
    if (std::abs(yn) >= std::abs(y)) break;
    x = xn;
    y = yn;
  }
  const double det = x * x - x * Mz + cov;
  const double xc = (Mxz * (Myy - x) - Myz * Mxy) / det / 2.0;
  const double yc = (Myz * (Mxx - x) - Mxz * Mxy) / det / 2.0;
  return {cplx(xc + mx, yc + my), std::sqrt(xc * xc + yc * yc + Mz)};
}

std::vector<double> unwrap(const std::vector<double>& ph) {
  std::vector<double> out(ph);
  for (std::size_t i = 1; i < out.size(); ++i) {
    double d = out[i] - out[i - 1];
    while (d > pi) {
      out[i] -= 2.0 * pi;
      d -= 2.0 * pi;
    }
    while (d < -pi) {
      out[i] += 2.0 * pi;
      d += 2.0 * pi;
    }
  }
  return out;
}

double slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t i0, std::size_t i1) {
  const double n = double(i1 - i0);
  double mx = 0, my = 0;
  for (std::size_t i = i0; i < i1; ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = i0; i < i1; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

Estimate make_estimate(double value, double sd, double t) { return {value, sd, value - t * sd, value + t * sd}; }

Estimate make_log_estimate(double log_value, double sd_log, double t) {
  const double v = std::exp(log_value);
  return {v, v * sd_log, std::exp(log_value - t * sd_log), std::exp(log_value + t * sd_log)};
}

}  // namespace

ResonanceFit fit_resonance(const std::vector<double>& freqs, const std::vector<cplx>& s, FitMode mode) {
  const std::size_t n = freqs.size();
  require(n == s.size(), "fit_resonance: frequency and data length differ");
  require(n >= 50, "fit_resonance: need at least 50 points");
  for (std::size_t i = 1; i < n; ++i) require(freqs[i] > freqs[i - 1], "fit_resonance: frequencies must increase");
  for (const auto& v : s) require(std::isfinite(v.real()) && std::isfinite(v.imag()), "fit_resonance: non-finite data");

  ResonanceFit out;
  const double span = freqs.back() - freqs.front();
  const double fmid = 0.5 * (freqs.back() + freqs.front());

  // noise from second differences, contrast from the data extent
  double d2 = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) d2 += std::norm(s[i + 1] - 2.0 * s[i] + s[i - 1]);
  const double noise = std::sqrt(d2 / double(n - 2) / 6.0);
  double extent = 0.0, level = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    level += std::abs(s[i]) / double(n);
    for (std::size_t j = i + 1; j < n; j += std::max<std::size_t>(1, n / 200)) extent = std::max(extent, std::abs(s[i] - s[j]));
  }
  if (extent < 10.0 * noise || extent < 1e-6 * level)
    throw NumericError("fit_resonance: no resonance detected (data extent comparable to noise)");

  // cable delay from the phase slope of the outer 10 % on each side
  std::vector<double> ph(n);
  for (std::size_t i = 0; i < n; ++i) ph[i] = std::arg(s[i]);
  ph = unwrap(ph);
  const std::size_t edge = std::max<std::size_t>(5, n / 10);
  const double tau_edge = -0.5 * (slope(freqs, ph, 0, edge) + slope(freqs, ph, n - edge, n)) / (2.0 * pi);
  // the resonance tail biases the edge slope; pick the delay that makes the trace most circular
  auto undelay = [&](double tau) {
    std::vector<cplx> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = s[i] * std::exp(cplx(0.0, 2.0 * pi * (freqs[i] - fmid) * tau));
    return z;
  };
  auto circle_cost = [&](double tau) {
    const auto z = undelay(tau);
    const Circle c = taubin(z);
    double cost = 0.0;
    for (const auto& v : z) cost += std::pow(std::abs(v - c.center) - c.radius, 2);
    return cost / (c.radius * c.radius);
  };
  const double reach = std::max(2.0 * std::abs(tau_edge), 0.5 / span);
  const double tau0 = num::minimize_scalar(circle_cost, tau_edge - reach, tau_edge + reach, 81);

  const std::vector<cplx> z = undelay(tau0);
  const Circle circ = taubin(z);

  // resonance where the trace moves fastest around the circle
  const std::size_t k = std::max<std::size_t>(1, n / 200);
  std::size_t ires = k;
  double vmax = -1.0;
  for (std::size_t i = k; i + k < n; ++i) {
    const double v = std::abs(z[i + k] - z[i - k]);
    if (v > vmax) {
      vmax = v;
      ires = i;
    }
  }
  std::vector<double> th(n);
  for (std::size_t i = 0; i < n; ++i) th[i] = std::arg(z[i] - circ.center);
  th = unwrap(th);
  const double th_res = th[ires];
  // phase falls by pi across one linewidth f0/Q
  std::size_t lo = ires, hi = ires;
  while (lo > 0 && th[lo] < th_res + pi / 2.0) --lo;
  while (hi + 1 < n && th[hi] > th_res - pi / 2.0) ++hi;
  double f0_i = freqs[ires];
  double lw = std::max(freqs[hi] - freqs[lo], 2.0 * span / double(n));
  double Q_i = f0_i / lw;

  // phase-vs-frequency refinement: th = th0 + 2 atan(2Q(1 - f/f0))
  {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(freqs[i] - f0_i) < 4.0 * lw) idx.push_back(i);
    if (idx.size() >= 8) {
      num::ResidualFn rf = [&](const std::vector<double>& p, std::vector<double>& r) {
        const double f0 = f0_i + p[1] * lw, Q = Q_i * std::exp(p[2]);
        for (std::size_t j = 0; j < idx.size(); ++j)
          r[j] = th[idx[j]] - (p[0] + 2.0 * std::atan(2.0 * Q * (1.0 - freqs[idx[j]] / f0)));
      };
      auto res = num::least_squares(rf, {th_res, 0.0, 0.0}, idx.size());
      if (res.converged && std::abs(res.params[1]) < 4.0 && std::abs(res.params[2]) < 3.0) {
        f0_i += res.params[1] * lw;
        Q_i *= std::exp(res.params[2]);
        lw = f0_i / Q_i;
      }
    }
  }

  // off-resonant point fixes the baseline; diameter gives the coupling
  const cplx P = circ.center + (circ.center - z[ires]);
  const double a0 = std::abs(P);
  const double alpha0 = std::arg(P);
  const double kfac = mode == FitMode::reflection ? 2.0 : 1.0;
  const double diam = 2.0 * circ.radius / a0;
  // P - center points along exp(j phi) once the baseline phase is removed
  const double phi0 = std::arg((P - circ.center) / std::exp(cplx(0.0, alpha0)));
  const double Qe_i = std::max(kfac * Q_i / std::max(diam, 1e-12), 1e-3 * Q_i);

  // full complex least squares, log parameters for the Q values; the baseline
  // phase is referred to the band centre so it decouples from the delay
  const double fscale = lw;
  auto unpack = [&](const std::vector<double>& p) {
    const double tau = p[2] / span;
    return ResonanceModel{f0_i + p[3] * fscale, std::exp(p[4]), std::exp(p[5]), p[6], p[0],
                          p[1] + 2.0 * pi * fmid * tau, tau};
  };
  num::ResidualFn full = [&](const std::vector<double>& p, std::vector<double>& r) {
    const ResonanceModel m = unpack(p);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx d = resonance_model(freqs[i], m, mode) - s[i];
      r[2 * i] = d.real();
      r[2 * i + 1] = d.imag();
    }
  };
  const std::vector<double> p0{a0, alpha0, tau0 * span, 0.0, std::log(Q_i),
                               std::log(Qe_i), phi0};
  auto res = num::least_squares(full, p0, 2 * n, {}, 800);
  const auto& p = res.params;
  out.model = unpack(p);
  if (out.model.a < 0.0) {
    out.model.a = -out.model.a;
    out.model.alpha += pi;
  }
  out.converged = res.converged;
  out.residual_rms = std::sqrt(res.chi2 / double(2 * n));
  const double dof = std::max<double>(1.0, double(res.dof));
  const double t = num::student_t_quantile(0.975, dof);
  auto sd = [&](int i) { return std::sqrt(std::max(0.0, res.covariance[i][i])); };

  out.f0 = make_estimate(out.model.f0, sd(3) * fscale, t);
  out.Q_tot = make_log_estimate(p[4], sd(4), t);

  // Q_ext from Re(1/Q_e) = cos(phi) / |Q_e|
  const double cphi = std::cos(out.model.phi);
  if (cphi <= 0.0) throw NumericError("fit_resonance: coupling phase outside (-pi/2, pi/2)");
  const double lnQext = p[5] - std::log(cphi);
  const double tphi = std::tan(out.model.phi);
  const double var_ext = res.covariance[5][5] + tphi * tphi * res.covariance[6][6] + 2.0 * tphi * res.covariance[5][6];
  out.Q_ext = make_log_estimate(lnQext, std::sqrt(std::max(0.0, var_ext)), t);

  const double inv_int = 1.0 / out.model.Q_tot - cphi / out.model.Q_ext_mag;
  const double g4 = -1.0 / out.model.Q_tot, g5 = cphi / out.model.Q_ext_mag,
               g6 = std::sin(out.model.phi) / out.model.Q_ext_mag;
  const int ix[3] = {4, 5, 6};
  const double g[3] = {g4, g5, g6};
  double var_inv = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) var_inv += g[a] * g[b] * res.covariance[ix[a]][ix[b]];
  if (inv_int > 0.0) {
    const double Qi = 1.0 / inv_int;
    const double sdi = Qi * Qi * std::sqrt(std::max(0.0, var_inv));
    out.Q_int = make_estimate(Qi, sdi, t);
  } else {
    out.Q_int = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0,
                 std::numeric_limits<double>::infinity()};
    out.warnings.push_back("fit_resonance: internal loss not resolved, Q_int unbounded");
  }

  const double diam_fit = kfac * out.model.Q_tot / out.model.Q_ext_mag * out.model.a;
  out.snr_db = 20.0 * std::log10(diam_fit / std::max(out.residual_rms, 1e-300));
  if (out.snr_db < 20.0) out.warnings.push_back("fit_resonance: SNR below 20 dB, confidence intervals are wide");
  if (span < 5.0 * out.model.f0 / out.model.Q_tot)
    out.warnings.push_back("fit_resonance: data span below 5 linewidths");
  if (!out.converged) out.warnings.push_back("fit_resonance: optimizer did not report convergence");
  return out;
}

// ---------------------------------------------------------------------------

double tls_inverse_q(double n_ph, const TlsParams& p) {
  return (1.0 / p.Q_TLS0_over_F) / std::sqrt(1.0 + std::pow(n_ph / p.n_sat, p.beta)) + 1.0 / p.Q_other;
}

TlsFit fit_tls(const std::vector<double>& n_ph, const std::vector<double>& Q_int, const std::vector<double>& weights) {
  const std::size_t n = n_ph.size();
  require(n == Q_int.size(), "fit_tls: n_ph and Q_int length differ");
  require(weights.empty() || weights.size() == n, "fit_tls: weights length mismatch");
  require(n >= 6, "fit_tls: need at least 6 points");
  double nmin = n_ph[0], nmax = n_ph[0];
  for (std::size_t i = 0; i < n; ++i) {
    require(n_ph[i] > 0.0 && Q_int[i] > 0.0, "fit_tls: photon numbers and Q_int must be positive");
    nmin = std::min(nmin, n_ph[i]);
    nmax = std::max(nmax, n_ph[i]);
  }
  require(nmax / nmin >= 100.0, "fit_tls: photon numbers must span at least two decades");

  std::vector<double> y(n);
  double ymean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = 1.0 / Q_int[i];
    ymean += y[i] / double(n);
  }
  double ymax = *std::max_element(y.begin(), y.end());
  double ymin = *std::min_element(y.begin(), y.end());

  // p = ln(Q_TLS0/F), ln n_sat, ln beta, ln Q_other
  num::ResidualFn f = [&](const std::vector<double>& p, std::vector<double>& r) {
    TlsParams q{std::exp(p[0]), std::exp(p[1]), std::exp(p[2]), std::exp(p[3])};
    for (std::size_t i = 0; i < n; ++i) r[i] = (tls_inverse_q(n_ph[i], q) - y[i]) / ymean;
  };

  // a few starts; the plateau level is well determined, n_sat and beta less so
  TlsFit best;
  double best_chi2 = std::numeric_limits<double>::infinity();
  num::LsqResult best_res;
  const double other0 = std::max(0.5 * ymin, 1e-3 * ymax);
  for (double b0 : {0.3, 0.6, 1.0}) {
    for (double ns : {std::sqrt(nmin * nmax), std::pow(nmin, 0.75) * std::pow(nmax, 0.25)}) {
      std::vector<double> p0{std::log(1.0 / std::max(ymax - other0, 1e-3 * ymax)), std::log(ns), std::log(b0),
                             std::log(1.0 / other0)};
      auto res = num::least_squares(f, p0, n, weights, 1000);
      if (res.chi2 < best_chi2) {
        best_chi2 = res.chi2;
        best_res = res;
      }
    }
  }
  const auto& p = best_res.params;
  const double t = num::student_t_quantile(0.975, std::max<double>(1.0, double(best_res.dof)));
  auto sd = [&](int i) { return std::sqrt(std::max(0.0, best_res.covariance[i][i])); };
  best.Q_TLS0_over_F = make_log_estimate(p[0], sd(0), t);
  best.n_sat = make_log_estimate(p[1], sd(1), t);
  best.beta = make_log_estimate(p[2], sd(2), t);
  best.Q_other = make_log_estimate(p[3], sd(3), t);
  best.converged = best_res.converged;

  // Q_other is only seen where the TLS term has saturated below it
  const double floor_share = (1.0 / best.Q_other.value) / ymin;
  if (sd(3) > 1.0 || floor_share < 0.05) {
    best.q_other_unidentifiable = true;
    best.warnings.push_back("fit_tls: Q_other not identifiable from the data (plateau not reached)");
  }
  if (best.beta.value > 2.0) best.warnings.push_back("fit_tls: beta outside (0, 2]");
  if (!best.converged) best.warnings.push_back("fit_tls: optimizer did not report convergence");
  return best;
}

}  // namespace febench::rf
