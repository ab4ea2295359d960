#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "febench/errors.hpp"

namespace febench::rf {

using cplx = std::complex<double>;

struct TankCircuit {
  double L = 708e-9;
  double C = 2.131e-12;
  double C_c = 0.315e-12;
  double R = std::numeric_limits<double>::infinity();  // Ohm, loss; inf = lossless
  double Z_line = 50.0;

  double C_t() const { return C + C_c; }
  void validate() const;
};

struct QualityFactors {
  double Q_int = std::numeric_limits<double>::infinity();
  double Q_ext = 0.0;
  double Q_tot = 0.0;
  double f0 = 0.0;  // Hz

  // From a loaded/external pair, Q_int follows from 1/Q_tot - 1/Q_ext.
  static QualityFactors from_loaded(double f0, double Q_tot, double Q_ext);
  void validate() const;
};

QualityFactors quality_factors(const TankCircuit& tc);

// Gamma = 1 - (2 Q_tot/Q_ext) / (1 + j 2 Q_tot (f/f0 - 1)), e^{+j w t} convention.
cplx reflection_coefficient(double f, const QualityFactors& qf);

// Linearized shift at the probe frequency f0, -j (2 Q_tot^2/Q_ext)(dC/C_t).
// Warns when |dC|/C_t > 1e-3.
cplx reflection_shift(double dC, const QualityFactors& qf, const TankCircuit& tc, Warnings* warn = nullptr);
// Gamma(f0; C_t + dC) - Gamma(f0; C_t) with the shifted resonance f0' = f0 / sqrt(1 + dC/C_t).
// With the Gamma formula as written this comes out as +j; the linear form carries -j.
cplx reflection_shift_exact(double dC, const QualityFactors& qf, const TankCircuit& tc);

struct SidebandSensitivity {
  double V_s = 0.0;  // V
  double S_c = 0.0;  // F / sqrt(Hz)
};

SidebandSensitivity sideband_and_sensitivity(double V_RF, double dC, const QualityFactors& qf, double C_t, double G,
                                             double V_n, double B);

// G Q_tot^2/Q_ext * dq V_RF / (4 k_B T).
double single_electron_prefactor(double dq, double T, const QualityFactors& qf, double G, double V_RF);
// Critical-coupling form, V_s = (G Q_int dq V_RF / 16 k_B T) (dq / C_t).
double single_electron_signal(double dq, double T, const TankCircuit& tc, const QualityFactors& qf, double G,
                              double V_RF);

// ---- resonance fitting ----

enum class FitMode { reflection, notch };

struct ResonanceModel {
  double f0 = 0.0;
  double Q_tot = 0.0;
  double Q_ext_mag = 0.0;  // |Q_e|
  double phi = 0.0;        // impedance-mismatch rotation of the coupling term
  double a = 1.0;          // baseline amplitude
  double alpha = 0.0;      // baseline phase
  double tau = 0.0;        // cable delay, s
};

cplx resonance_model(double f, const ResonanceModel& m, FitMode mode);
std::vector<cplx> resonance_model(const std::vector<double>& f, const ResonanceModel& m, FitMode mode);

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95 %
};

struct ResonanceFit {
  ResonanceModel model;
  Estimate f0, Q_tot, Q_ext, Q_int;
  double residual_rms = 0.0;
  double snr_db = 0.0;  // circle diameter over residual noise
  bool converged = false;
  Warnings warnings;
};

ResonanceFit fit_resonance(const std::vector<double>& freqs, const std::vector<cplx>& s_data, FitMode mode);

// Complex white Gaussian noise with total rms = |scale| 10^(-snr_db/20).
std::vector<cplx> add_complex_noise(const std::vector<cplx>& s, double scale, double snr_db, std::uint64_t seed);

// ---- TLS power dependence ----

struct TlsParams {
  double Q_TLS0_over_F = 6.64e4;
  double n_sat = 3.0e2;
  double beta = 0.377;
  double Q_other = 1e7;
};

// 1/Q_int = (F/Q_TLS0) / sqrt(1 + (n/n_sat)^beta) + 1/Q_other
double tls_inverse_q(double n_ph, const TlsParams& p);

struct TlsFit {
  Estimate Q_TLS0_over_F, n_sat, beta, Q_other;
  bool q_other_unidentifiable = false;
  bool converged = false;
  Warnings warnings;
};

TlsFit fit_tls(const std::vector<double>& n_ph, const std::vector<double>& Q_int, const std::vector<double>& weights);

}  // namespace febench::rf
