#pragma once

#include <cstdint>
#include <vector>

#include "febench/distribution.hpp"
#include "febench/errors.hpp"
#include "febench/qcap.hpp"
#include "febench/rf_resonator.hpp"

namespace febench::fm {

// f_MW(t) = f_c + f_ma cos(2 pi f_mf t)
struct FmParams {
  double f_c = 165e9;    // Hz
  double f_ma = 768e6;   // Hz
  double f_mf = 1e3;     // Hz
  void validate() const;
  double f_mw(double t) const;
};

struct LzParams {
  double rabi = 0.83e6;  // 2 t_c / h, Hz
  double f_ma = 768e6;
  double f_mf = 1e3;
};

struct LzResult {
  double delta = 0.0;  // adiabaticity (2t_c)^2 / (4 f_ma f_mf)
  double P = 0.0;      // exp(-2 pi delta)
  double scale = 1.0;  // 1 - P, the surviving signal fraction
};

LzResult lz_probability(const LzParams& p);

struct Readout {
  rf::TankCircuit tank;
  rf::QualityFactors qf;
  double V_RF = 14e-6;  // V at the top plate
  double G = 41.0;      // gain to the analyzer

  // He tank with R = 321 kOhm and the loaded/external pair 311/648
  static Readout helium();
};

struct SimOptions {
  bool lz = false;
  double cycles = 8;              // integer number of modulation periods in the window
  int samples_per_period = 256;   // baseband envelope sampling
  int spectrum_halfwidth = 4;     // spectrum slice out to +- this many multiples of f_mf
};

struct SidebandResult {
  double V_s = 0.0;        // at f_RF + f_mf, V
  double V_s_minus = 0.0;  // at f_RF - f_mf, V
  double carrier = 0.0;    // at f_RF, V
  std::vector<double> offsets;     // Hz from f_RF
  std::vector<double> amplitudes;  // V
  double P_LZ = 0.0;
  double crossers = 0.0;           // electrons whose bin is swept through resonance
  double parseval_rel_error = 0.0;
};

// Electrons in bins swept through resonance (|f_ry - f_c| <= f_ma) scaled by 1 - P_LZ.
DetuningDistribution lz_weighted(const DetuningDistribution& dist, const FmParams& fm, double rabi, double* P = nullptr,
                                 double* crossers = nullptr);

SidebandResult simulate_sidebands(const DetuningDistribution& dist, const FmParams& fm,
                                  const qcap::KernelIntegral& kernel, const Readout& ro, const SimOptions& opt = {});

// Small-f_ma reference: G (Q_tot^2/Q_ext) |dC| / C_t V_RF with dC from modulation_depth.
double analytic_sideband(const DetuningDistribution& dist, const FmParams& fm, const qcap::KernelIntegral& kernel,
                         const Readout& ro);

struct SweepResult {
  std::vector<double> carriers;  // Hz
  std::vector<double> V_s;       // V
  double noise_floor = 0.0;      // V_n sqrt(B), 0 if not requested
  std::size_t argmax = 0;
};

SweepResult sweep_carrier(const std::vector<double>& carriers, const DetuningDistribution& dist, FmParams fm,
                          const qcap::KernelIntegral& kernel, const Readout& ro, const SimOptions& opt = {},
                          double V_n = 0.0, double B = 1.0);

// One f_ma series of sideband maxima versus f_mf.
struct LzSeries {
  double f_ma = 0.0;
  std::vector<double> f_mf;
  std::vector<double> amplitude;
};

struct LzFit {
  rf::Estimate rabi;              // 2 t_c / h, 99 % CI
  std::vector<rf::Estimate> a;    // per series
  std::size_t n_points = 0;
  bool converged = false;
};

// Joint fit of a_s (1 - P_LZ(2t_c, f_ma_s, f_mf)) over all series, shared 2t_c.
// Points above domain_max or at/below noise_floor are excluded.
LzFit fit_lz_rate(const std::vector<LzSeries>& series, double domain_max, double noise_floor = 0.0);
LzFit fit_lz_rate(const std::vector<double>& f_mf, const std::vector<double>& amplitude, double f_ma,
                  double domain_max, double noise_floor = 0.0);

}  // namespace febench::fm
