#include "febench/tdo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "febench/constants.hpp"
#include "febench/numerics.hpp"

namespace febench::tdo {

using phys::pi;

double diode_capacitance(double V_TD, double C0, double V_d) {
  require(C0 > 0.0 && V_d > 0.0, "diode_capacitance: C0 and V_d must be positive");
  if (!(V_TD < V_d)) {
    std::ostringstream os;
    os << "diode_capacitance: V_TD = " << V_TD << " V is not below the diffusion potential " << V_d << " V";
    throw ValidationError(os.str());
  }
  return C0 / std::sqrt(1.0 - V_TD / V_d);
}

TdoCircuit TdoCircuit::at_11mK() { return TdoCircuit{}; }

TdoCircuit TdoCircuit::at_3K4() {
  TdoCircuit c;
  c.C0 = 5.8e-12;
  for (auto& x : c.varactor_C) x += 0.1e-12;
  return c;
}

void TdoCircuit::validate() const {
  require(L > 0.0 && C0 > 0.0 && V_d > 0.0, "TdoCircuit: L, C0 and V_d must be positive");
  require(varactor_V.size() == varactor_C.size() && varactor_V.size() >= 3,
          "TdoCircuit: need at least 3 varactor anchors");
  for (std::size_t i = 0; i < varactor_V.size(); ++i) {
    require(varactor_C[i] > 0.0, "TdoCircuit: varactor capacitance must be positive");
    if (i > 0) require(varactor_V[i] > varactor_V[i - 1], "TdoCircuit: varactor voltages must increase");
  }
}

double TdoCircuit::C(double V_VD) const {
  validate();
  if (V_VD < varactor_V.front() || V_VD > varactor_V.back()) {
    std::ostringstream os;
    os << "TdoCircuit: V_VD = " << V_VD << " V outside the anchor range [" << varactor_V.front() << ", "
       << varactor_V.back() << "]";
    throw ValidationError(os.str());
  }
  const num::MonotoneCubic m(varactor_V, varactor_C);
  return m(V_VD);
}

double oscillation_frequency(double L, double C, double C_TD) {
  require(L > 0.0 && C >= 0.0 && C_TD >= 0.0 && C + C_TD > 0.0, "oscillation_frequency: bad L or C");
  return 1.0 / (2.0 * pi * std::sqrt(L * (C + C_TD)));
}

double oscillation_frequency(const TdoCircuit& c, double V_TD, double V_VD) {
  return oscillation_frequency(c.L, c.C(V_VD), diode_capacitance(V_TD, c.C0, c.V_d));
}

CapacitanceFit fit_capacitances(const std::vector<double>& V_TD, const std::vector<double>& f, double L,
                                double V_d) {
  require(V_TD.size() == f.size(), "fit_capacitances: V_TD and f differ in length");
  require(V_TD.size() >= 5, "fit_capacitances: need at least 5 points");
  require(L > 0.0 && V_d > 0.0, "fit_capacitances: L and V_d must be positive");
  const std::size_t n = f.size();
  std::vector<double> g(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(V_TD[i] < V_d, "fit_capacitances: V_TD must stay below V_d");
    require(f[i] > 0.0, "fit_capacitances: frequencies must be positive");
    g[i] = 1.0 / std::sqrt(1.0 - V_TD[i] / V_d);
    y[i] = 1.0 / (4.0 * pi * pi * L * f[i] * f[i]);  // C + C0 g
  }
  const double gm = std::accumulate(g.begin(), g.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sgg = 0.0, sgy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sgg += (g[i] - gm) * (g[i] - gm);
    sgy += (g[i] - gm) * (y[i] - ym);
  }
  if (sgg <= 0.0) throw NumericError("fit_capacitances: all points at the same V_TD, C and C0 are not separable");
  // linear start, then refine on the frequencies themselves
  const double C0_lin = sgy / sgg, C_lin = ym - C0_lin * gm;
  if (!(C0_lin > 0.0))
    throw NumericError("fit_capacitances: frequency does not fall with V_TD (flat or wrong-sign trend, C0 <= 0); "
                       "the data do not look like a biased tunnel-diode oscillator");
  const double sc = 1e-12;
  auto resid = [&](const std::vector<double>& p, std::vector<double>& r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double ct = (p[0] + p[1] * g[i]) * sc;
      r[i] = (ct > 0.0 ? 1.0 / (2.0 * pi * std::sqrt(L * ct)) : 0.0) - f[i];
    }
  };
  const auto fit = num::least_squares(resid, {C_lin / sc, C0_lin / sc}, n);
  if (!fit.converged) throw NumericError("fit_capacitances: least squares did not converge");
  CapacitanceFit out;
  out.n_points = n;
  out.rms_residual = std::sqrt(fit.chi2 / double(n));
  const double t = fit.dof > 0 ? num::student_t_quantile(0.975, double(fit.dof)) : 0.0;
  auto est = [&](std::size_t k) {
    rf::Estimate e;
    e.value = fit.params[k] * sc;
    e.stderr_ = std::sqrt(std::max(0.0, fit.covariance[k][k])) * sc;
    e.ci_low = e.value - t * e.stderr_;
    e.ci_high = e.value + t * e.stderr_;
    return e;
  };
  out.C = est(0);
  out.C0 = est(1);
  if (!(out.C0.value > 0.0 && out.C.value > 0.0))
    throw NumericError("fit_capacitances: fit gave a non-positive capacitance");
  return out;
}

void IvCurve::validate() const {
  require(voltage.size() == current.size(), "IvCurve: voltage and current differ in length");
  require(voltage.size() >= 10, "IvCurve: need at least 10 points");
  const bool up = voltage[1] > voltage[0];
  for (std::size_t i = 1; i < voltage.size(); ++i)
    require(up ? voltage[i] > voltage[i - 1] : voltage[i] < voltage[i - 1], "IvCurve: voltage axis is not monotone");
}

std::vector<NdrInterval> negative_resistance_region(const IvCurve& iv, int window) {
  iv.validate();
  require(window >= 1 && window % 2 == 1, "negative_resistance_region: window must be odd and >= 1");
  std::vector<double> V = iv.voltage, I = iv.current;
  if (V[1] < V[0]) {
    std::reverse(V.begin(), V.end());
    std::reverse(I.begin(), I.end());
  }
  const std::size_t n = V.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == n ? n - 1 : i + 1;
    d[i] = (I[b] - I[a]) / (V[b] - V[a]);
  }
  std::vector<double> s(n);
  const int h = window / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i < std::size_t(h) ? 0 : i - h, b = std::min(n - 1, i + h);
    double acc = 0.0;
    for (std::size_t k = a; k <= b; ++k) acc += d[k];
    s[i] = acc / double(b - a + 1);
  }
  std::vector<NdrInterval> out;
  std::size_t i = 0;
  while (i < n) {
    if (s[i] >= 0.0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && s[j + 1] < 0.0) ++j;
    NdrInterval r;
    r.V_lo = V[i];
    r.V_hi = V[j];
    // the smoothing can move the run edges by up to h samples
    const std::size_t a = i > std::size_t(h) + 1 ? i - h - 1 : 0, b = std::min(n - 1, j + h + 1);
    std::size_t kp = a, kv = i;
    for (std::size_t k = a; k <= j; ++k)
      if (I[k] > I[kp]) kp = k;
    for (std::size_t k = i; k <= b; ++k)
      if (I[k] < I[kv]) kv = k;
    r.V_p = V[kp];
    r.I_p = I[kp];
    r.V_v = V[kv];
    r.I_v = I[kv];
    out.push_back(r);
    i = j + 1;
  }
  return out;
}

IvCurve synthetic_tunnel_diode(const std::vector<double>& V, double I_p, double V_p, double V_valley, double V_0) {
  require(I_p > 0.0 && V_p > 0.0 && V_valley > V_p && V_0 > 0.0, "synthetic_tunnel_diode: bad parameters");
  // dI/dV = 0 at the valley fixes I_0
  const double tunnel_slope = I_p / V_p * (1.0 - V_valley / V_p) * std::exp(1.0 - V_valley / V_p);
  const double I_0 = -tunnel_slope * V_0 / std::exp(V_valley / V_0);
  IvCurve iv;
  iv.voltage = V;
  for (double v : V) iv.current.push_back(I_p * (v / V_p) * std::exp(1.0 - v / V_p) + I_0 * std::expm1(v / V_0));
  iv.forward = V.size() < 2 || V[1] > V[0];
  return iv;
}

WaveformRecord WaveformRecord::from_samples(std::vector<double> s, double rate) {
  WaveformRecord w;
  w.samples = std::move(s);
  w.sample_rate = rate;
  w.duration = rate > 0.0 ? double(w.samples.size()) / rate : 0.0;
  w.validate();
  return w;
}

void WaveformRecord::validate() const {
  require(!samples.empty(), "WaveformRecord: no samples");
  require(sample_rate > 0.0, "WaveformRecord: sample rate must be positive");
  require(std::abs(sample_rate * duration - double(samples.size())) <= 1.0,
          "WaveformRecord: rate * duration does not match the sample count");
}

WaveformRecord synthetic_sine(double f, double amplitude, double rate, std::size_t n, double phase) {
  require(n > 0 && rate > 0.0, "synthetic_sine: need samples and a positive rate");
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = amplitude * std::sin(2.0 * pi * f * double(i) / rate + phase);
  return WaveformRecord::from_samples(std::move(s), rate);
}

std::vector<double> quantize(const std::vector<double>& x, double full_scale, int bits) {
  require(full_scale > 0.0 && bits >= 1 && bits <= 32, "quantize: bad full scale or bit count");
  const double levels = std::ldexp(1.0, bits), lsb = 2.0 * full_scale / levels;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double k = std::round(x[i] / lsb);
    k = std::clamp(k, -levels / 2.0, levels / 2.0 - 1.0);
    out[i] = k * lsb;
  }
  return out;
}

WaveformRecord read_f32le(const std::string& path, double sample_rate, double scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_f32le: cannot open " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() % 4 != 0) throw IoError("read_f32le: " + path + " is not a whole number of float32 samples");
  std::vector<double> s(buf.size() / 4);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto* b = reinterpret_cast<const unsigned char*>(buf.data() + 4 * i);
    const std::uint32_t u = std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
                            std::uint32_t(b[3]) << 24;
    float v;
    std::memcpy(&v, &u, 4);
    s[i] = double(v) * scale;
  }
  if (s.empty()) throw IoError("read_f32le: " + path + " is empty");
  return WaveformRecord::from_samples(std::move(s), sample_rate);
}

WaveformStats analyze_waveform(const WaveformRecord& w, double center, double bw, int bins) {
  w.validate();
  require(bins >= 1, "analyze_waveform: need at least one histogram bin");
  const double nyq = 0.5 * w.sample_rate;
  if (!(bw > 0.0 && center - 0.5 * bw > 0.0 && center + 0.5 * bw < nyq)) {
    std::ostringstream os;
    os << "analyze_waveform: band " << center - 0.5 * bw << " .. " << center + 0.5 * bw
       << " Hz is not inside (0, Nyquist = " << nyq << " Hz)";
    throw ValidationError(os.str());
  }
  const std::size_t N = w.samples.size();
  auto X = num::fft_real(w.samples);
  const double df = w.sample_rate / double(N);
  // one-sided band, doubled: the inverse is the analytic signal of the filtered record
  for (std::size_t k = 0; k < N; ++k) {
    const double fk = double(k) * df;
    const bool in_band = k <= N / 2 && fk >= center - 0.5 * bw && fk <= center + 0.5 * bw;
    X[k] = in_band ? 2.0 * X[k] : num::cplx(0.0);
  }
  const auto z = num::ifft(X);
  WaveformStats st;
  st.envelope.resize(N);
  for (std::size_t i = 0; i < N; ++i) st.envelope[i] = std::abs(z[i]) / double(N);
  double m = 0.0;
  for (double e : st.envelope) m += e;
  st.mean = m / double(N);
  double v = 0.0;
  for (double e : st.envelope) v += (e - st.mean) * (e - st.mean);
  st.sigma = N > 1 ? std::sqrt(v / double(N - 1)) : 0.0;
  const auto [lo, hi] = std::minmax_element(st.envelope.begin(), st.envelope.end());
  st.histogram.lo = *lo;
  st.histogram.hi = *hi;
  st.histogram.counts.assign(std::size_t(bins), 0);
  const double width = (*hi - *lo) / bins;
  for (double e : st.envelope) {
    std::size_t b = width > 0.0 ? std::size_t((e - *lo) / width) : 0;
    st.histogram.counts[std::min(b, std::size_t(bins) - 1)]++;
  }
  return st;
}

PowerSpectrum power_spectrum(const WaveformRecord& w, std::size_t zero_pad_to) {
  w.validate();
  const std::size_t N = w.samples.size();
  const std::size_t M = std::max(N, zero_pad_to);
  std::vector<double> x = w.samples;
  x.resize(M, 0.0);
  const auto X = num::fft_real(x);
  PowerSpectrum ps;
  double p_time = 0.0, p_freq = 0.0;
  for (double s : w.samples) p_time += s * s;
  for (const auto& c : X) p_freq += std::norm(c);
  p_freq /= double(M);
  ps.parseval_rel_error = p_time > 0.0 ? std::abs(p_freq - p_time) / p_time : 0.0;
  for (std::size_t k = 0; k <= M / 2; ++k) {
    ps.freqs.push_back(double(k) * w.sample_rate / double(M));
    const double rms = std::abs(X[k]) / (std::sqrt(2.0) * double(N) / 2.0);
    ps.rms.push_back(rms);
    const double p = rms * rms / (0.001 * 50.0);
    ps.dBm.push_back(p > 0.0 ? std::max(dBm_floor, 10.0 * std::log10(p)) : dBm_floor);
    if (rms > ps.rms[ps.peak]) ps.peak = k;
  }
  return ps;
}

}  // namespace febench::tdo
