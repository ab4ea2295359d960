#include "febench/fm_readout.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "febench/constants.hpp"
#include "febench/numerics.hpp"

namespace febench::fm {

using phys::pi;
using cplx = std::complex<double>;

void FmParams::validate() const {
  require(f_c > 0.0, "FmParams: carrier must be positive");
  require(f_ma >= 0.0, "FmParams: f_ma must be >= 0");
  require(f_mf > 0.0, "FmParams: f_mf must be positive");
}

double FmParams::f_mw(double t) const { return f_c + f_ma * std::cos(2.0 * pi * f_mf * t); }

LzResult lz_probability(const LzParams& p) {
  require(p.f_ma > 0.0 && p.f_mf > 0.0, "lz_probability: f_ma and f_mf must be positive");
  require(p.rabi >= 0.0, "lz_probability: 2t_c must be >= 0");
  LzResult r;
  r.delta = p.rabi * p.rabi / (4.0 * p.f_ma * p.f_mf);
  r.P = std::exp(-2.0 * pi * r.delta);
  r.scale = 1.0 - r.P;
  return r;
}

Readout Readout::helium() {
  Readout ro;
  ro.tank.R = 321e3;
  ro.qf = rf::QualityFactors::from_loaded(rf::quality_factors(ro.tank).f0, 311.0, 648.0);
  return ro;
}

DetuningDistribution lz_weighted(const DetuningDistribution& dist, const FmParams& fm, double rabi, double* P,
                                 double* crossers) {
  fm.validate();
  DetuningDistribution out = dist;
  double p = 0.0, nc = 0.0;
  if (fm.f_ma > 0.0) {
    const auto lz = lz_probability({rabi, fm.f_ma, fm.f_mf});
    p = lz.P;
    for (std::size_t i = 0; i < out.f_ry.size(); ++i)
      if (std::abs(out.f_ry[i] - fm.f_c) <= fm.f_ma) {
        nc += out.counts[i];
        out.counts[i] *= lz.scale;
      }
  }
  out.total_electrons = out.sum();
  if (P) *P = p;
  if (crossers) *crossers = nc;
  return out;
}

SidebandResult simulate_sidebands(const DetuningDistribution& dist, const FmParams& fm,
                                  const qcap::KernelIntegral& kernel, const Readout& ro, const SimOptions& opt) {
  fm.validate();
  dist.validate();
  ro.qf.validate();
  require(opt.cycles >= 8.0, "simulate_sidebands: need at least 8 modulation cycles");
  if (std::abs(opt.cycles - std::round(opt.cycles)) > 1e-9) {
    std::ostringstream os;
    os << "simulate_sidebands: " << opt.cycles << " cycles is not an integer window; sidebands would leak";
    throw ValidationError(os.str());
  }
  require(opt.samples_per_period >= 64, "simulate_sidebands: need >= 64 samples per modulation period");
  require(ro.V_RF >= 0.0 && ro.G > 0.0, "simulate_sidebands: bad V_RF or gain");

  SidebandResult res;
  const DetuningDistribution d =
      opt.lz ? lz_weighted(dist, fm, kernel.params().rabi, &res.P_LZ, &res.crossers) : dist;

  const int M = opt.samples_per_period;
  const int cycles = int(std::lround(opt.cycles));
  const std::size_t N = std::size_t(M) * cycles;
  // C_N(t) is exactly periodic in 1/f_mf; one period is tiled over the window
  std::vector<double> c(M);
  for (int m = 0; m < M; ++m) c[m] = qcap::ensemble_capacitance(fm.f_mw(m / (M * fm.f_mf)), d, kernel);

  const double Ct = ro.tank.C_t();
  const double k = 2.0 * ro.qf.Q_tot * ro.qf.Q_tot / ro.qf.Q_ext;
  const cplx g0 = rf::reflection_coefficient(ro.qf.f0, ro.qf);
  std::vector<cplx> a(N);
  double p_time = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    a[n] = ro.G * ro.V_RF * (g0 - cplx(0.0, k * c[n % M] / Ct));
    p_time += std::norm(a[n]);
  }
  p_time /= double(N);
  auto A = num::fft(a);
  double p_freq = 0.0;
  for (auto& x : A) {
    x /= double(N);
    p_freq += std::norm(x);
  }
  res.parseval_rel_error = p_time > 0.0 ? std::abs(p_freq - p_time) / p_time : 0.0;

  res.carrier = std::abs(A[0]);
  res.V_s = std::abs(A[std::size_t(cycles)]);
  res.V_s_minus = std::abs(A[N - std::size_t(cycles)]);
  const long hw = long(opt.spectrum_halfwidth) * cycles;
  for (long q = -hw; q <= hw; ++q) {
    res.offsets.push_back(double(q) * fm.f_mf / cycles);
    res.amplitudes.push_back(std::abs(A[std::size_t((q + long(N)) % long(N))]));
  }
  return res;
}

double analytic_sideband(const DetuningDistribution& dist, const FmParams& fm, const qcap::KernelIntegral& kernel,
                         const Readout& ro) {
  const auto md = qcap::modulation_depth(fm.f_c, fm.f_ma, dist, kernel);
  return ro.G * ro.qf.Q_tot * ro.qf.Q_tot / ro.qf.Q_ext * std::abs(md.dC) / ro.tank.C_t() * ro.V_RF;
}

SweepResult sweep_carrier(const std::vector<double>& carriers, const DetuningDistribution& dist, FmParams fm,
                          const qcap::KernelIntegral& kernel, const Readout& ro, const SimOptions& opt, double V_n,
                          double B) {
  require(!carriers.empty(), "sweep_carrier: no carrier frequencies");
  require(V_n >= 0.0 && B > 0.0, "sweep_carrier: bad noise settings");
  SweepResult out;
  out.carriers = carriers;
  out.noise_floor = V_n * std::sqrt(B);
  for (double f : carriers) {
    fm.f_c = f;
    out.V_s.push_back(simulate_sidebands(dist, fm, kernel, ro, opt).V_s);
  }
  out.argmax = std::size_t(std::max_element(out.V_s.begin(), out.V_s.end()) - out.V_s.begin());
  return out;
}

LzFit fit_lz_rate(const std::vector<LzSeries>& series, double domain_max, double noise_floor) {
  require(!series.empty(), "fit_lz_rate: no data");
  require(domain_max > 0.0 && noise_floor >= 0.0, "fit_lz_rate: bad domain or noise floor");
  struct Pt {
    std::size_t s;
    double f_mf, y;
  };
  std::vector<Pt> pts;
  std::size_t in_domain = 0;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    require(sr.f_ma > 0.0, "fit_lz_rate: f_ma must be positive");
    require(sr.f_mf.size() == sr.amplitude.size(), "fit_lz_rate: f_mf and amplitude differ in length");
    for (std::size_t i = 0; i < sr.f_mf.size(); ++i) {
      require(sr.f_mf[i] > 0.0, "fit_lz_rate: f_mf must be positive");
      if (sr.f_mf[i] > domain_max) continue;
      ++in_domain;
      if (sr.amplitude[i] > noise_floor) pts.push_back({s, sr.f_mf[i], sr.amplitude[i]});
    }
  }
  require(in_domain >= 4, "fit_lz_rate: need at least 4 points inside the fit domain");
  const std::size_t S = series.size();
  if (pts.size() < S + 2) throw NumericError("fit_lz_rate: degenerate fit, too few points above the noise floor");
  for (std::size_t s = 0; s < S; ++s)
    if (std::none_of(pts.begin(), pts.end(), [&](const Pt& p) { return p.s == s; }))
      throw NumericError("fit_lz_rate: degenerate fit, a series has no points above the noise floor");

  auto shape = [&](double rabi, const Pt& p) {
    return 1.0 - std::exp(-2.0 * pi * rabi * rabi / (4.0 * series[p.s].f_ma * p.f_mf));
  };
  // start: log scan in 2t_c with the amplitudes solved linearly
  double best_sse = INFINITY, best_rabi = 1e6;
  std::vector<double> best_a(S, 0.0);
  for (int q = 0; q <= 400; ++q) {
    const double rabi = std::pow(10.0, 3.0 + 6.0 * q / 400.0);
    std::vector<double> num(S, 0.0), den(S, 0.0);
    for (const auto& p : pts) {
      const double g = shape(rabi, p);
      num[p.s] += g * p.y;
      den[p.s] += g * g;
    }
    double sse = 0.0;
    std::vector<double> a(S);
    for (std::size_t s = 0; s < S; ++s) a[s] = den[s] > 0.0 ? num[s] / den[s] : 0.0;
    for (const auto& p : pts) sse += std::pow(a[p.s] * shape(rabi, p) - p.y, 2);
    if (sse < best_sse && std::all_of(a.begin(), a.end(), [](double x) { return x > 0.0; })) {
      best_sse = sse;
      best_rabi = rabi;
      best_a = a;
    }
  }
  if (!std::isfinite(best_sse)) throw NumericError("fit_lz_rate: degenerate fit, no positive amplitude");

  std::vector<double> p0{std::log(best_rabi)};
  for (double a : best_a) p0.push_back(std::log(a));
  auto resid = [&](const std::vector<double>& p, std::vector<double>& r) {
    const double rabi = std::exp(p[0]);
    for (std::size_t i = 0; i < pts.size(); ++i) r[i] = std::exp(p[1 + pts[i].s]) * shape(rabi, pts[i]) - pts[i].y;
  };
  const auto fit = num::least_squares(resid, p0, pts.size());
  LzFit out;
  out.n_points = pts.size();
  out.converged = fit.converged;
  const double t = num::student_t_quantile(0.995, double(fit.dof));
  auto est = [&](std::size_t k) {
    rf::Estimate e;
    const double v = fit.params[k], sd = std::sqrt(std::max(0.0, fit.covariance[k][k]));
    e.value = std::exp(v);
    e.stderr_ = e.value * sd;
    e.ci_low = std::exp(v - t * sd);
    e.ci_high = std::exp(v + t * sd);
    return e;
  };
  out.rabi = est(0);
  for (std::size_t s = 0; s < S; ++s) out.a.push_back(est(1 + s));
  return out;
}

LzFit fit_lz_rate(const std::vector<double>& f_mf, const std::vector<double>& amplitude, double f_ma,
                  double domain_max, double noise_floor) {
  return fit_lz_rate(std::vector<LzSeries>{{f_ma, f_mf, amplitude}}, domain_max, noise_floor);
}

}  // namespace febench::fm
