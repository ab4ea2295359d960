#pragma once

#include <string>
#include <vector>

#include "febench/errors.hpp"

namespace febench::spin {

// All frequencies and rates at this interface are ordinary frequencies in Hz
// (the quoted "/2pi" values); conversion to rad/s happens inside.

struct SpinChargeParams {
  double epsilon = 0.0;   // charge detuning
  double two_tc = 8.0e9;  // 2 t_c
  double b_par = 4.8e9;   // Zeeman splitting
  double b_perp = 1.0e9;  // gradient term
  double alpha = 0.05;    // lever arm
  double eV0_h = 3.0e9;   // e V0 / h
  double f_r = 4.8e9;     // resonator
  void validate() const;
};

struct Couplings {
  double theta = 0.0;  // rad
  double phi_plus = 0.0, phi_minus = 0.0, phi_bar = 0.0;
  double Lambda = 0.0;
  double g_c = 0.0;  // Hz
  double g_s = 0.0;  // Hz
};

Couplings couplings(const SpinChargeParams& p);
// EDSR Rabi frequency f_R^s = Lambda f_R^c
double spin_rabi(const Couplings& c, double f_Rc);

struct LossScenario {
  std::string label;
  double gamma_c = 0.0;       // high-frequency charge loss, Hz
  double gamma_s = 0.0;       // high-frequency spin loss, Hz
  double gamma_c_star = 0.0;  // quasistatic
  double gamma_s_star = 0.0;
  double kappa = 0.1e6;       // resonator
  void validate() const;

  // gamma = gamma_1 / 2 + gamma_phi from T1 and T_phi (s)
  static double high_frequency_rate(double T1, double T_phi);
  // gamma_c chosen so Lambda^2 gamma_c = gamma_s_eff, gamma_s = 0, no quasistatic noise
  static LossScenario back_solved(const SpinChargeParams& p, double gamma_s_eff = 7e3, double kappa = 0.1e6);
};

struct EffectiveLosses {
  double gamma_s_eff = 0.0;       // Hz
  double gamma_s_star_eff = 0.0;  // Hz
  double kappa_eff = 0.0;         // Hz, with Purcell decay through the charge
  double delta_c = 0.0;           // Hz
  double cooperativity = 0.0;     // g_s^2 / (gamma_s' kappa')
};

EffectiveLosses effective_losses(const SpinChargeParams& p, const LossScenario& s);

struct GateConfig {
  double f_Rc = 10e6;  // charge Rabi frequency, Hz
  double delta = 0.0;  // drive detuning, Hz
  double beta = 10.0;  // Delta_s / g_s for the iSWAP
  void validate() const;
};

struct GateFidelities {
  double f_Rs = 0.0;  // Hz
  double t_g = 0.0;   // s
  double F1 = 0.0;    // at the configured delta
  double F1_bar = 0.0;
  double F2 = 0.0;
};

// pi-gate fidelity with t_g = 1/(2 f_Rs); rates in Hz, delta in Hz
double f1(double f_Rs, double gamma_s_eff, double delta);
double f1_bar(double f_Rs, double gamma_s_eff, double gamma_s_star_eff);
// iSWAP in the dispersive regime, Delta_s = beta g_s
double f2(double g_s, double gamma_s_eff, double kappa, double beta);
// stationary point of f2 in beta
double f2_optimal_beta(double gamma_s_eff, double kappa);

GateFidelities gate_fidelities(const SpinChargeParams& p, const LossScenario& s, const GateConfig& g);

struct LambdaScanPoint {
  double Lambda = 0.0;
  double b_perp = 0.0;  // Hz, giving Lambda at fixed 2t_c and b_par
  double g_s = 0.0;
  double gamma_s_eff = 0.0;
  double error1 = 0.0;  // 1 - F1_bar
  double error2 = 0.0;  // 1 - F2
};

// b_perp for a target Lambda in [0, 1)
double b_perp_for_lambda(const SpinChargeParams& p, double Lambda);
std::vector<LambdaScanPoint> lambda_scan(SpinChargeParams p, const LossScenario& s, const GateConfig& g,
                                         const std::vector<double>& lambdas);

// Single-electron EDSR fields (SI). detuning_energy is 2t - hbar w_L in J.
struct EdsrInputs {
  double gradient = 0.1e6;  // T/m
  double E_ac = 0.0;        // V/m
  double E_0 = 0.0;         // V/m
  double l0 = 0.0;          // m
  double omega0 = 0.0;      // rad/s
  double omegaL = 0.0;      // rad/s
  double d = 100e-9;        // m
  double detuning_energy = 0.0;
};

struct EdsrFields {
  double B_AC = 0.0;  // T
  double B_0 = 0.0;   // T
};

EdsrFields edsr_fields(const EdsrInputs& in);
// vacuum field from the charge coupling: e E0 d = h g_c
double vacuum_field_from_gc(double g_c, double d);
// g_s = g muB B0 / h, Hz
double spin_coupling_from_b0(double B0, double g = 2.0023);
// (g muB gradient d / (2 (2t - hbar w_L)))^2 gamma_c, all rates in Hz
double hybridization_loss(double gradient, double d, double detuning_energy, double gamma_c, double g = 2.0023);

}  // namespace febench::spin
