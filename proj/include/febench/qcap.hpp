#pragma once

#include <memory>
#include <vector>

#include "febench/distribution.hpp"
#include "febench/errors.hpp"

namespace febench::qcap {

struct TwoLevelDriveParams {
  double rabi = 0.83e6;         // 2 t_c / h, Hz
  double T = 0.160;             // K
  double dq = 1.602176634e-24;  // C (1e-5 e)
  double f_rf = 120.946e6;      // Hz
  double relaxation_rate = 1e6;  // Hz

  void validate() const;
};

// chi = tanh(h dE / 2 k_B T), dE in Hz.
double population_difference(double dE_hz, double T);

// C_1 at detuning eps (Hz). The tunneling term carries the probe-frequency
// suppression gamma^2 / (gamma^2 + f_RF^2).
double single_electron_capacitance(double eps_hz, const TwoLevelDriveParams& p, bool include_tunneling = false);
double tunneling_capacitance(double eps_hz, const TwoLevelDriveParams& p);

// Antiderivative K(x) = int_0^x C_1(eps) d(eps in Hz), tabulated once; exact
// derivative nodes with cubic Hermite interpolation between them.
class KernelIntegral {
 public:
  explicit KernelIntegral(const TwoLevelDriveParams& p, bool include_tunneling = false);
  double operator()(double x) const;
  double total() const { return 2.0 * k_inf_; }  // int over all eps, F Hz
  const TwoLevelDriveParams& params() const { return p_; }
  bool tunneling() const { return tunneling_; }

 private:
  TwoLevelDriveParams p_;
  bool tunneling_;
  double a_ = 0.0, du_ = 0.0, x_max_ = 0.0, k_inf_ = 0.0;
  std::vector<double> u_, k_, c_;  // nodes in u = asinh(x/a), K, C_1
};

// C_N(f_MW) = sum_i n_i <C_1(f_ry_i - f_MW)>_bin.
double ensemble_capacitance(double f_mw, const DetuningDistribution& dist, const KernelIntegral& kernel);
double ensemble_capacitance(double f_mw, const DetuningDistribution& dist, const TwoLevelDriveParams& p,
                            Warnings* warn = nullptr);

// Kernel coverage: the distribution must extend beyond 10 (2 t_c) on both sides.
void check_coverage(const DetuningDistribution& dist, const TwoLevelDriveParams& p, Warnings* warn);

struct ModulationDepth {
  double C0 = 0.0;  // F
  double dC = 0.0;  // F, -h f_ma dC_N/d(eps0)
};

// f_ma above 470 MHz adds a linear-regime warning.
ModulationDepth modulation_depth(double f_mw_c, double f_ma, const DetuningDistribution& dist,
                                 const KernelIntegral& kernel, Warnings* warn = nullptr);

constexpr double kLinearRegimeFma = 470e6;

}  // namespace febench::qcap
