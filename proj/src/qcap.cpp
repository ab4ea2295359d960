#include "febench/qcap.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "febench/constants.hpp"

namespace febench {

void DetuningDistribution::validate() const {
  require(f_ry.size() == counts.size(), "DetuningDistribution: f_ry and counts differ in length");
  require(!f_ry.empty(), "DetuningDistribution: empty");
  require(bin_width >= 0.0, "DetuningDistribution: bin width must be >= 0");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    require(counts[i] >= 0.0 && std::isfinite(counts[i]), "DetuningDistribution: counts must be >= 0");
    if (i > 0) require(f_ry[i] > f_ry[i - 1], "DetuningDistribution: bins must increase");
  }
  const double s = sum();
  require(std::abs(s - total_electrons) <= 1e-3 * std::max(1.0, total_electrons),
          "DetuningDistribution: counts do not sum to total_electrons");
}

double DetuningDistribution::sum() const {
  double s = 0.0;
  for (double c : counts) s += c;
  return s;
}

DetuningDistribution DetuningDistribution::delta(double f, double n, double bin_width) {
  DetuningDistribution d;
  d.f_ry = {f};
  d.counts = {n};
  d.bin_width = bin_width;
  d.total_electrons = n;
  d.f_ry_peak = f;
  return d;
}

DetuningDistribution scaled(const DetuningDistribution& d, double factor) {
  require(factor >= 0.0, "scaled: factor must be >= 0");
  DetuningDistribution out = d;
  for (double& c : out.counts) c *= factor;
  out.total_electrons = out.sum();
  return out;
}

DetuningDistribution combined(const DetuningDistribution& a, const DetuningDistribution& b) {
  require(a.f_ry == b.f_ry && a.bin_width == b.bin_width, "combined: distributions on different grids");
  DetuningDistribution out = a;
  for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] += b.counts[i];
  out.total_electrons = out.sum();
  out.f_ry_peak = out.f_ry[std::max_element(out.counts.begin(), out.counts.end()) - out.counts.begin()];
  return out;
}

}  // namespace febench

namespace febench::qcap {

using namespace febench::phys;

void TwoLevelDriveParams::validate() const {
  require(rabi > 0.0, "TwoLevelDriveParams: 2t_c must be positive");
  require(T > 0.0, "TwoLevelDriveParams: T must be positive");
  require(dq > 0.0, "TwoLevelDriveParams: delta_q must be positive");
  require(f_rf > 0.0 && relaxation_rate >= 0.0, "TwoLevelDriveParams: bad probe or relaxation rate");
}

double population_difference(double dE_hz, double T) {
  require(T > 0.0, "population_difference: T must be positive");
  return std::tanh(h * dE_hz / (2.0 * kB * T));
}

double tunneling_capacitance(double eps_hz, const TwoLevelDriveParams& p) {
  const double dE = std::hypot(eps_hz, p.rabi);
  const double x = h * dE / (2.0 * kB * p.T);
  const double sech = x > 350.0 ? 0.0 : 1.0 / std::cosh(x);
  const double g2 = p.relaxation_rate * p.relaxation_rate;
  const double supp = g2 / (g2 + p.f_rf * p.f_rf);
  return p.dq * p.dq / (4.0 * kB * p.T) * (eps_hz * eps_hz) / (dE * dE) * sech * sech * supp;
}

double single_electron_capacitance(double eps_hz, const TwoLevelDriveParams& p, bool include_tunneling) {
  const double dE = std::hypot(eps_hz, p.rabi);
  const double chi = population_difference(dE, p.T);
  // chi dq^2 (2t_c)^2 / (2 dE^3), energies in J
  double c = chi * p.dq * p.dq * (p.rabi * p.rabi) / (2.0 * h * dE * dE * dE);
  if (include_tunneling) c += tunneling_capacitance(eps_hz, p);
  return c;
}

KernelIntegral::KernelIntegral(const TwoLevelDriveParams& p, bool include_tunneling)
    : p_(p), tunneling_(include_tunneling) {
  p.validate();
  a_ = p.rabi;
  // far enough out that chi has saturated and only the a^2/x^3 tail is left
  x_max_ = std::max(1e5 * a_, 40.0 * kB * p.T / h);
  const double u_max = std::asinh(x_max_ / a_);
  const int m = int(std::ceil(u_max / 0.004));
  du_ = u_max / m;
  u_.resize(m + 1);
  k_.resize(m + 1);
  c_.resize(m + 1);
  gsl_integration_glfixed_table* gl = gsl_integration_glfixed_table_alloc(8);
  struct Ctx {
    const TwoLevelDriveParams* p;
    bool t;
  } ctx{&p_, tunneling_};
  gsl_function f;
  f.function = [](double x, void* q) {
    auto* c = static_cast<Ctx*>(q);
    return single_electron_capacitance(x, *c->p, c->t);
  };
  f.params = &ctx;
  double acc = 0.0;
  for (int j = 0; j <= m; ++j) {
    u_[j] = du_ * j;
    const double x = a_ * std::sinh(u_[j]);
    if (j > 0) acc += gsl_integration_glfixed(&f, a_ * std::sinh(u_[j - 1]), x, gl);
    k_[j] = acc;
    c_[j] = single_electron_capacitance(x, p_, tunneling_);
  }
  gsl_integration_glfixed_table_free(gl);
  x_max_ = a_ * std::sinh(u_.back());
  // tail beyond x_max with chi = 1: dq^2 a^2 / (4 h x^2)
  k_inf_ = k_.back() + p.dq * p.dq * a_ * a_ / (4.0 * h * x_max_ * x_max_);
}

double KernelIntegral::operator()(double x) const {
  const double sgn = x < 0.0 ? -1.0 : 1.0;
  const double ax = std::abs(x);
  if (ax >= x_max_) return sgn * (k_inf_ - p_.dq * p_.dq * a_ * a_ / (4.0 * h * ax * ax));
  const double u = std::asinh(ax / a_);
  std::size_t j = std::min<std::size_t>(std::size_t(u / du_), u_.size() - 2);
  const double x0 = a_ * std::sinh(u_[j]), x1 = a_ * std::sinh(u_[j + 1]);
  const double hstep = x1 - x0;
  const double t = (ax - x0) / hstep;
  const double t2 = t * t, t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * k_[j] + (t3 - 2 * t2 + t) * hstep * c_[j] + (-2 * t3 + 3 * t2) * k_[j + 1] +
                   (t3 - t2) * hstep * c_[j + 1];
  return sgn * v;
}

double ensemble_capacitance(double f_mw, const DetuningDistribution& dist, const KernelIntegral& kernel) {
  double c = 0.0;
  const double w = dist.bin_width;
  if (w > 0.0) {
    for (std::size_t i = 0; i < dist.f_ry.size(); ++i) {
      if (dist.counts[i] == 0.0) continue;
      const double d = dist.f_ry[i] - f_mw;
      c += dist.counts[i] * (kernel(d + 0.5 * w) - kernel(d - 0.5 * w)) / w;
    }
  } else {
    for (std::size_t i = 0; i < dist.f_ry.size(); ++i)
      if (dist.counts[i] != 0.0)
        c += dist.counts[i] * single_electron_capacitance(dist.f_ry[i] - f_mw, kernel.params(), kernel.tunneling());
  }
  return c;
}

double ensemble_capacitance(double f_mw, const DetuningDistribution& dist, const TwoLevelDriveParams& p,
                            Warnings* warn) {
  check_coverage(dist, p, warn);
  return ensemble_capacitance(f_mw, dist, KernelIntegral(p));
}

void check_coverage(const DetuningDistribution& dist, const TwoLevelDriveParams& p, Warnings* warn) {
  dist.validate();
  if (!warn) return;
  const double lo = dist.f_ry.front() - 0.5 * dist.bin_width;
  const double hi = dist.f_ry.back() + 0.5 * dist.bin_width;
  // a single bin is a deliberate delta distribution
  if (dist.f_ry.size() > 1 && hi - lo < 20.0 * p.rabi)
    warn->push_back("ensemble_capacitance: distribution narrower than the C_1 kernel tails (10 x 2t_c)");
}

ModulationDepth modulation_depth(double f_mw_c, double f_ma, const DetuningDistribution& dist,
                                 const KernelIntegral& kernel, Warnings* warn) {
  dist.validate();
  require(f_ma >= 0.0, "modulation_depth: f_ma must be >= 0");
  const double lo = dist.f_ry.front() - 0.5 * dist.bin_width;
  const double hi = dist.f_ry.back() + 0.5 * dist.bin_width;
  if (f_mw_c < lo || f_mw_c > hi) {
    std::ostringstream os;
    os << "modulation_depth: carrier " << f_mw_c << " Hz outside distribution support [" << lo << ", " << hi << "]";
    throw ValidationError(os.str());
  }
  if (warn && f_ma > kLinearRegimeFma) warn->push_back("modulation_depth: f_ma above the 470 MHz linear regime");
  check_coverage(dist, kernel.params(), warn);
  ModulationDepth out;
  out.C0 = ensemble_capacitance(f_mw_c, dist, kernel);
  const double step = dist.bin_width > 0.0 ? dist.bin_width : kernel.params().rabi;
  const double slope = (ensemble_capacitance(f_mw_c + step, dist, kernel) -
                        ensemble_capacitance(f_mw_c - step, dist, kernel)) /
                       (2.0 * step);
  // eps0 = h (f_Ry - f_MW), so -h f_ma dC/d(eps0) = f_ma dC/df_MW
  out.dC = f_ma * slope;
  return out;
}

}  // namespace febench::qcap
