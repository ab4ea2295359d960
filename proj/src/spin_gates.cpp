#include "febench/spin_gates.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_roots.h>

#include <cmath>
#include <limits>

#include "febench/constants.hpp"

namespace febench::spin {

using phys::pi;

namespace {
constexpr double two_pi = 2.0 * pi;

void require_finite_nonneg(double x, const char* what) {
  if (!(std::isfinite(x) && x >= 0.0)) throw ValidationError(std::string(what) + " must be finite and >= 0");
}
}  // namespace

void SpinChargeParams::validate() const {
  require(two_tc > 0.0 && std::isfinite(two_tc), "SpinChargeParams: 2t_c must be positive");
  require_finite_nonneg(b_par, "SpinChargeParams: b_par");
  require_finite_nonneg(b_perp, "SpinChargeParams: b_perp");
  require(alpha > 0.0 && alpha < 1.0, "SpinChargeParams: lever arm must be in (0, 1)");
  require_finite_nonneg(eV0_h, "SpinChargeParams: eV0/h");
  require(f_r > 0.0, "SpinChargeParams: resonator frequency must be positive");
  require(std::isfinite(epsilon), "SpinChargeParams: detuning must be finite");
}

Couplings couplings(const SpinChargeParams& p) {
  p.validate();
  Couplings c;
  c.theta = std::atan2(p.epsilon, p.two_tc);
  c.g_c = p.alpha * p.eV0_h * std::cos(c.theta);
  // atan2 keeps phi_- on the right branch when b_par > 2t_c
  c.phi_plus = std::atan2(p.b_perp, p.two_tc + p.b_par);
  c.phi_minus = std::atan2(p.b_perp, p.two_tc - p.b_par);
  c.phi_bar = 0.5 * (c.phi_plus + c.phi_minus);
  c.Lambda = std::sin(c.phi_bar);
  c.g_s = c.Lambda * c.g_c;
  return c;
}

double spin_rabi(const Couplings& c, double f_Rc) {
  require(f_Rc > 0.0, "spin_rabi: charge Rabi frequency must be positive");
  return c.Lambda * f_Rc;
}

void LossScenario::validate() const {
  require_finite_nonneg(gamma_c, "LossScenario: gamma_c");
  require_finite_nonneg(gamma_s, "LossScenario: gamma_s");
  require_finite_nonneg(gamma_c_star, "LossScenario: gamma_c*");
  require_finite_nonneg(gamma_s_star, "LossScenario: gamma_s*");
  require_finite_nonneg(kappa, "LossScenario: kappa");
}

double LossScenario::high_frequency_rate(double T1, double T_phi) {
  require(T1 > 0.0 && T_phi > 0.0, "high_frequency_rate: T1 and T_phi must be positive");
  // gamma_1 = 2pi/T1 and gamma_phi = 2pi/T_phi in rad/s; back to Hz
  return 1.0 / (2.0 * T1) + 1.0 / T_phi;
}

LossScenario LossScenario::back_solved(const SpinChargeParams& p, double gamma_s_eff, double kappa) {
  const auto c = couplings(p);
  require(c.Lambda > 0.0, "LossScenario::back_solved: Lambda is zero");
  LossScenario s;
  s.label = "back-solved";
  s.gamma_c = gamma_s_eff / (c.Lambda * c.Lambda);
  s.kappa = kappa;
  s.validate();
  return s;
}

EffectiveLosses effective_losses(const SpinChargeParams& p, const LossScenario& s) {
  s.validate();
  require(p.epsilon == 0.0, "effective_losses: the loss forms hold at the charge sweet spot, epsilon = 0");
  const auto c = couplings(p);
  EffectiveLosses r;
  const double L2 = c.Lambda * c.Lambda;
  r.gamma_s_eff = L2 * s.gamma_c + (1.0 - L2) * s.gamma_s;
  // charge term is second order in the quasistatic charge noise, gamma_c*^2 / b_par
  const double charge = p.b_par > 0.0 ? L2 * s.gamma_c_star * s.gamma_c_star / p.b_par : 0.0;
  const double spin = 0.5 * (std::cos(c.phi_plus) + std::cos(c.phi_minus)) * s.gamma_s_star;
  r.gamma_s_star_eff = std::hypot(charge, spin);
  r.delta_c = std::hypot(p.epsilon, p.two_tc) - p.f_r;
  if (r.delta_c == 0.0) throw NumericError("effective_losses: charge resonant with the resonator, Purcell term diverges");
  r.kappa_eff = s.kappa + c.g_c * c.g_c * s.gamma_c / (r.delta_c * r.delta_c);
  const double den = r.gamma_s_eff * r.kappa_eff;
  r.cooperativity = den > 0.0 ? c.g_s * c.g_s / den : std::numeric_limits<double>::infinity();
  return r;
}

void GateConfig::validate() const {
  require(f_Rc > 0.0, "GateConfig: charge Rabi frequency must be positive");
  require(beta > 1.0, "GateConfig: beta must be > 1 for the dispersive iSWAP");
  require(std::isfinite(delta), "GateConfig: delta must be finite");
}

double f1(double f_Rs, double gamma_s_eff, double delta) {
  require(f_Rs > 0.0, "f1: spin Rabi frequency is zero, the gate is undefined");
  const double tg = 1.0 / (2.0 * f_Rs), g = two_pi * gamma_s_eff;
  return (3.0 + std::exp(-2.0 * tg * g) + 2.0 * std::exp(-tg * g) * std::cos(tg * two_pi * delta)) / 6.0;
}

double f1_bar(double f_Rs, double gamma_s_eff, double gamma_s_star_eff) {
  require(f_Rs > 0.0, "f1_bar: spin Rabi frequency is zero, the gate is undefined");
  const double tg = 1.0 / (2.0 * f_Rs), g = two_pi * gamma_s_eff, gs = two_pi * gamma_s_star_eff;
  return (3.0 + std::exp(-2.0 * tg * g) + 2.0 * std::exp(-tg * g) * std::exp(-0.5 * (tg * gs) * (tg * gs))) / 6.0;
}

double f2(double g_s, double gamma_s_eff, double kappa, double beta) {
  require(g_s > 0.0, "f2: spin-photon coupling is zero");
  require(beta > 0.0, "f2: beta must be positive");
  // printed with rates in rad/s; in Hz a single 2pi is left over
  return 1.0 - two_pi / (5.0 * g_s) * (2.0 * gamma_s_eff * beta + kappa / beta);
}

double f2_optimal_beta(double gamma_s_eff, double kappa) {
  require(gamma_s_eff > 0.0 && kappa > 0.0, "f2_optimal_beta: rates must be positive");
  return std::sqrt(kappa / (2.0 * gamma_s_eff));
}

GateFidelities gate_fidelities(const SpinChargeParams& p, const LossScenario& s, const GateConfig& g) {
  g.validate();
  const auto c = couplings(p);
  const auto L = effective_losses(p, s);
  GateFidelities r;
  r.f_Rs = spin_rabi(c, g.f_Rc);
  if (r.f_Rs <= 0.0) throw ValidationError("gate_fidelities: Lambda = 0, no EDSR drive, the gate is undefined");
  r.t_g = 1.0 / (2.0 * r.f_Rs);
  r.F1 = f1(r.f_Rs, L.gamma_s_eff, g.delta);
  r.F1_bar = f1_bar(r.f_Rs, L.gamma_s_eff, L.gamma_s_star_eff);
  r.F2 = f2(c.g_s, L.gamma_s_eff, s.kappa, g.beta);
  return r;
}

double b_perp_for_lambda(const SpinChargeParams& p, double Lambda) {
  require(Lambda >= 0.0 && Lambda < 1.0, "b_perp_for_lambda: Lambda must be in [0, 1)");
  if (Lambda == 0.0) return 0.0;
  struct Ctx {
    SpinChargeParams p;
    double target;
  } ctx{p, Lambda};
  gsl_function F;
  F.function = [](double x, void* v) {
    auto* c = static_cast<Ctx*>(v);
    c->p.b_perp = x;
    return couplings(c->p).Lambda - c->target;
  };
  F.params = &ctx;
  double lo = 0.0, hi = p.two_tc + p.b_par;
  while (F.function(hi, &ctx) < 0.0) {
    hi *= 2.0;
    if (hi > 1e30) throw NumericError("b_perp_for_lambda: Lambda not reachable");
  }
  gsl_root_fsolver* s = gsl_root_fsolver_alloc(gsl_root_fsolver_brent);
  gsl_root_fsolver_set(s, &F, lo, hi);
  int status = GSL_CONTINUE;
  for (int it = 0; it < 200 && status == GSL_CONTINUE; ++it) {
    gsl_root_fsolver_iterate(s);
    status = gsl_root_test_interval(gsl_root_fsolver_x_lower(s), gsl_root_fsolver_x_upper(s), 0.0, 1e-13);
  }
  const double x = gsl_root_fsolver_root(s);
  gsl_root_fsolver_free(s);
  if (status != GSL_SUCCESS) throw NumericError("b_perp_for_lambda: root search did not converge");
  return x;
}

std::vector<LambdaScanPoint> lambda_scan(SpinChargeParams p, const LossScenario& s, const GateConfig& g,
                                         const std::vector<double>& lambdas) {
  require(!lambdas.empty(), "lambda_scan: no Lambda values");
  std::vector<LambdaScanPoint> out;
  for (double L : lambdas) {
    require(L > 0.0, "lambda_scan: Lambda must be positive");
    p.b_perp = b_perp_for_lambda(p, L);
    const auto c = couplings(p);
    const auto f = gate_fidelities(p, s, g);
    LambdaScanPoint pt;
    pt.Lambda = c.Lambda;
    pt.b_perp = p.b_perp;
    pt.g_s = c.g_s;
    pt.gamma_s_eff = effective_losses(p, s).gamma_s_eff;
    pt.error1 = 1.0 - f.F1_bar;
    pt.error2 = 1.0 - f.F2;
    out.push_back(pt);
  }
  return out;
}

EdsrFields edsr_fields(const EdsrInputs& in) {
  require(std::isfinite(in.gradient), "edsr_fields: gradient must be finite");
  EdsrFields r;
  if (in.E_ac != 0.0) {
    const double den = in.omega0 * in.omega0 - in.omegaL * in.omegaL;
    if (den == 0.0) throw NumericError("edsr_fields: drive resonant with the orbital frequency");
    r.B_AC = in.gradient * phys::e * in.E_ac * in.l0 * in.l0 * in.omega0 / (2.0 * phys::hbar * den);
  }
  if (in.E_0 != 0.0) {
    if (in.detuning_energy == 0.0) throw NumericError("edsr_fields: 2t = hbar w_L, B_0 diverges");
    r.B_0 = in.gradient * phys::e * in.E_0 * in.d * in.d / (4.0 * in.detuning_energy);
  }
  return r;
}

double vacuum_field_from_gc(double g_c, double d) {
  require(g_c >= 0.0 && d > 0.0, "vacuum_field_from_gc: need g_c >= 0 and d > 0");
  return phys::h * g_c / (phys::e * d);
}

double spin_coupling_from_b0(double B0, double g) { return g * phys::muB * std::abs(B0) / phys::h; }

double hybridization_loss(double gradient, double d, double detuning_energy, double gamma_c, double g) {
  require(detuning_energy != 0.0, "hybridization_loss: zero detuning");
  const double x = g * phys::muB * gradient * d / (2.0 * detuning_energy);
  return x * x * gamma_c;
}

}  // namespace febench::spin
