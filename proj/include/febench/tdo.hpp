#pragma once

#include <string>
#include <vector>

#include "febench/errors.hpp"
#include "febench/rf_resonator.hpp"

namespace febench::tdo {

// C_TD = C0 (1 - V_TD/V_d)^(-1/2)
double diode_capacitance(double V_TD, double C0, double V_d = 0.5);

struct TdoCircuit {
  double L = 95e-9;  // H
  double C0 = 5.7e-12;
  double V_d = 0.5;
  // varactor-side capacitance C(V_VD), monotone cubic through these anchors
  std::vector<double> varactor_V{-1.5, 0.0, 5.0};
  std::vector<double> varactor_C{7.9e-12, 5.8e-12, 5.3e-12};

  static TdoCircuit at_11mK();
  // 3.4 K fit: both capacitances about 0.1 pF higher
  static TdoCircuit at_3K4();
  void validate() const;
  double C(double V_VD) const;
};

double oscillation_frequency(double L, double C, double C_TD);
double oscillation_frequency(const TdoCircuit& c, double V_TD, double V_VD);

struct CapacitanceFit {
  rf::Estimate C, C0;  // 95% intervals
  double rms_residual = 0.0;  // Hz
  std::size_t n_points = 0;
};

CapacitanceFit fit_capacitances(const std::vector<double>& V_TD, const std::vector<double>& f, double L,
                                double V_d = 0.5);

struct IvCurve {
  std::vector<double> voltage;  // V, strictly monotone in either direction
  std::vector<double> current;  // A
  bool forward = true;          // sweep direction as recorded
  void validate() const;
};

struct NdrInterval {
  double V_lo = 0.0, V_hi = 0.0;  // where the smoothed dI/dV < 0
  double V_p = 0.0, I_p = 0.0;    // peak
  double V_v = 0.0, I_v = 0.0;    // valley
};

// smoothing window in samples (odd)
std::vector<NdrInterval> negative_resistance_region(const IvCurve& iv, int window = 5);

// Tunnel-diode shaped curve: I_p (V/V_p) exp(1 - V/V_p) + I_0 (exp(V/V_0) - 1), with I_0
// chosen so the valley sits at V_valley.
IvCurve synthetic_tunnel_diode(const std::vector<double>& V, double I_p = 10e-6, double V_p = 0.1,
                               double V_valley = 0.245, double V_0 = 0.025);

struct WaveformRecord {
  std::vector<double> samples;  // V
  double sample_rate = 0.0;     // Hz
  double duration = 0.0;        // s

  static WaveformRecord from_samples(std::vector<double> s, double rate);
  void validate() const;
};

// amplitude * sin(2 pi f t + phase), n samples
WaveformRecord synthetic_sine(double f, double amplitude, double rate, std::size_t n, double phase = 0.0);
// round to 2^bits levels over [-full_scale, full_scale]
std::vector<double> quantize(const std::vector<double>& x, double full_scale, int bits = 8);
// little-endian float32 samples times scale
WaveformRecord read_f32le(const std::string& path, double sample_rate, double scale = 1.0);

struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<std::size_t> counts;
};

struct WaveformStats {
  std::vector<double> envelope;
  double mean = 0.0;
  double sigma = 0.0;
  Histogram histogram;
};

// brick-wall band [center - bw/2, center + bw/2], analytic signal, |.|
WaveformStats analyze_waveform(const WaveformRecord& w, double center, double bw, int bins = 5000);

struct PowerSpectrum {
  std::vector<double> freqs;  // Hz, 0 .. rate/2
  std::vector<double> dBm;    // into 50 Ohm
  std::vector<double> rms;    // V
  std::size_t peak = 0;
  double parseval_rel_error = 0.0;
};

inline constexpr double dBm_floor = -300.0;

// rms_k = |X_k| / (sqrt(2) N/2) with N the unpadded length
PowerSpectrum power_spectrum(const WaveformRecord& w, std::size_t zero_pad_to = 0);

}  // namespace febench::tdo
