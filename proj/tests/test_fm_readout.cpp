#include <cmath>
#include <random>

#include "doctest.h"
#include "febench/corbino.hpp"
#include "febench/errors.hpp"
#include "febench/fm_readout.hpp"

using namespace febench;
using namespace febench::fm;

namespace {

// saturated-density distribution for the default bias, built once
const DetuningDistribution& saturated_distribution() {
  static const DetuningDistribution d = [] {
    corbino::CorbinoGeometry g;
    const auto p = corbino::saturated_density(g, corbino::BiasConfig::bottom(12.0, -90.0));
    std::vector<double> fields;
    for (double E = 0.0; E <= 8000.0; E += 250.0) fields.push_back(E);
    const auto st = rydberg::stark_response(rydberg::SurfaceParams::helium(), rydberg::Grid1D::helium(), fields);
    return corbino::detuning_distribution(p, st, 1e9);
  }();
  return d;
}

const qcap::KernelIntegral& kernel() {
  static const qcap::KernelIntegral k{qcap::TwoLevelDriveParams{}};
  return k;
}

std::vector<double> carriers_around(double f0) {
  std::vector<double> c;
  for (double x = -3e9; x <= 3e9 + 1.0; x += 100e6) c.push_back(f0 + x);
  return c;
}

// lobe maxima below and above f0
std::pair<std::size_t, std::size_t> lobes(const SweepResult& s, double f0) {
  std::size_t lo = 0, hi = 0;
  double vlo = -1.0, vhi = -1.0;
  for (std::size_t i = 0; i < s.carriers.size(); ++i) {
    if (s.carriers[i] < f0 && s.V_s[i] > vlo) vlo = s.V_s[i], lo = i;
    if (s.carriers[i] > f0 && s.V_s[i] > vhi) vhi = s.V_s[i], hi = i;
  }
  return {lo, hi};
}

}  // namespace

TEST_SUITE("fm-readout-sim") {
  TEST_CASE("Landau-Zener probability") {
    const auto r = lz_probability({0.83e6, 768e6, 1e3});
    CHECK(r.delta == doctest::Approx(0.2242).epsilon(1e-3));
    CHECK(r.P == doctest::Approx(0.244).epsilon(0.001 / 0.244));
    CHECK(r.scale == doctest::Approx(1.0 - r.P));
    CHECK(lz_probability({0.83e6, 768e6, 1e-3}).P < 1e-100);
    CHECK(lz_probability({0.0, 768e6, 1e3}).P == 1.0);
    CHECK(lz_probability({0.0, 768e6, 1e3}).scale == 0.0);
    CHECK_THROWS_AS(lz_probability({0.83e6, 0.0, 1e3}), ValidationError);
    // more adiabatic at higher f_ma^-1, less at higher f_mf
    CHECK(lz_probability({0.83e6, 528e6, 1e3}).P < r.P);
    CHECK(lz_probability({0.83e6, 768e6, 2e3}).P > r.P);
  }

  TEST_CASE("sideband spectrum structure") {
    const auto& d = saturated_distribution();
    const auto ro = Readout::helium();
    FmParams fm;
    fm.f_c = d.f_ry_peak + 1e9;
    SimOptions opt;
    opt.cycles = 16;
    const auto r = simulate_sidebands(d, fm, kernel(), ro, opt);
    CHECK(r.V_s > 0.0);
    CHECK(r.V_s_minus == doctest::Approx(r.V_s).epsilon(1e-9));
    CHECK(r.parseval_rel_error < 1e-9);
    CHECK(r.offsets.size() == r.amplitudes.size());
    // integer-cycle window: nothing between the harmonics of f_mf
    double leak = 0.0;
    for (std::size_t i = 0; i < r.offsets.size(); ++i) {
      const double m = r.offsets[i] / fm.f_mf;
      if (std::abs(m - std::round(m)) > 1e-9) leak = std::max(leak, r.amplitudes[i]);
    }
    CHECK(leak < 1e-2 * r.V_s);
  }

  TEST_CASE("window and sampling preconditions") {
    const auto& d = saturated_distribution();
    const auto ro = Readout::helium();
    FmParams fm;
    fm.f_c = d.f_ry_peak;
    SimOptions opt;
    opt.cycles = 8.5;
    CHECK_THROWS_AS(simulate_sidebands(d, fm, kernel(), ro, opt), ValidationError);
    opt.cycles = 4;
    CHECK_THROWS_AS(simulate_sidebands(d, fm, kernel(), ro, opt), ValidationError);
    opt.cycles = 8;
    opt.samples_per_period = 32;
    CHECK_THROWS_AS(simulate_sidebands(d, fm, kernel(), ro, opt), ValidationError);
    fm.f_mf = 0.0;
    CHECK_THROWS_AS(simulate_sidebands(d, fm, kernel(), ro), ValidationError);
  }

  TEST_CASE("doubling the window leaves the sideband unchanged") {
    const auto& d = saturated_distribution();
    const auto ro = Readout::helium();
    FmParams fm;
    fm.f_c = d.f_ry_peak - 0.8e9;
    SimOptions a, b;
    a.cycles = 8;
    b.cycles = 16;
    const double va = simulate_sidebands(d, fm, kernel(), ro, a).V_s;
    const double vb = simulate_sidebands(d, fm, kernel(), ro, b).V_s;
    CHECK(std::abs(vb / va - 1.0) < 1e-3);
  }

  TEST_CASE("small modulation matches the linearized sideband") {
    const auto& d = saturated_distribution();
    const auto ro = Readout::helium();
    for (double off : {-1e9, 0.7e9, 1e9})
      for (double fma : {150e6, 200e6, 250e6}) {
        FmParams fm;
        fm.f_c = d.f_ry_peak + off;
        fm.f_ma = fma;
        const double sim = simulate_sidebands(d, fm, kernel(), ro).V_s;
        CHECK(sim == doctest::Approx(analytic_sideband(d, fm, kernel(), ro)).epsilon(0.02));
      }
  }

  TEST_CASE("carrier sweep: zero at the peak, two lobes, high side larger") {
    const auto& d = saturated_distribution();
    const auto ro = Readout::helium();
    FmParams fm;
    const auto sw = sweep_carrier(carriers_around(d.f_ry_peak), d, fm, kernel(), ro);
    const auto [lo, hi] = lobes(sw, d.f_ry_peak);
    const double vmax = sw.V_s[sw.argmax];
    std::size_t at_peak = 30;  // carriers_around puts f0 at index 30
    CHECK(sw.carriers[at_peak] == doctest::Approx(d.f_ry_peak));
    CHECK(sw.V_s[at_peak] < 0.1 * vmax);
    CHECK(sw.carriers[lo] - d.f_ry_peak == doctest::Approx(-1e9).epsilon(0.5));
    CHECK(sw.carriers[hi] - d.f_ry_peak == doctest::Approx(1e9).epsilon(0.5));
    CHECK(sw.V_s[hi] > sw.V_s[lo]);
    CHECK(sw.argmax == hi);
    CHECK(sw.noise_floor == 0.0);
  }

  TEST_CASE("Landau-Zener suppression of the sweep") {
    const auto& d = saturated_distribution();
    const auto ro = Readout::helium();
    FmParams fm;
    SimOptions lz;
    lz.lz = true;
    const auto c = carriers_around(d.f_ry_peak);
    const auto plain = sweep_carrier(c, d, fm, kernel(), ro);
    const auto with = sweep_carrier(c, d, fm, kernel(), ro, lz);
    const double ratio = with.V_s[with.argmax] / plain.V_s[plain.argmax];
    CHECK(ratio < 1.0);
    CHECK(ratio >= 1.0 - lz_probability({0.83e6, fm.f_ma, fm.f_mf}).P - 1e-9);
    const auto [lo, hi] = lobes(with, d.f_ry_peak);
    CHECK(with.V_s[hi] > with.V_s[lo]);
  }

  TEST_CASE("sideband is nonincreasing in f_mf with Landau-Zener") {
    const auto& d = saturated_distribution();
    const auto ro = Readout::helium();
    SimOptions lz;
    lz.lz = true;
    double prev = INFINITY;
    for (double fmf : {100.0, 300.0, 1e3, 3e3, 1e4, 3e4, 1e5}) {
      FmParams fm;
      fm.f_c = d.f_ry_peak + 1.2e9;
      fm.f_mf = fmf;
      const double v = simulate_sidebands(d, fm, kernel(), ro, lz).V_s;
      CHECK(v <= prev * (1.0 + 1e-12));
      prev = v;
    }
  }

  TEST_CASE("scaling with V_RF and electron density") {
    const auto& d = saturated_distribution();
    auto ro = Readout::helium();
    FmParams fm;
    fm.f_c = d.f_ry_peak + 1.2e9;
    const double v1 = simulate_sidebands(d, fm, kernel(), ro).V_s;
    ro.V_RF *= 3.0;
    CHECK(simulate_sidebands(d, fm, kernel(), ro).V_s == doctest::Approx(3.0 * v1).epsilon(1e-9));
    ro = Readout::helium();
    CHECK(simulate_sidebands(scaled(d, 0.55), fm, kernel(), ro).V_s == doctest::Approx(0.55 * v1).epsilon(1e-9));
    const auto none = scaled(d, 0.0);
    const auto sw = sweep_carrier({d.f_ry_peak - 1e9, d.f_ry_peak, d.f_ry_peak + 1e9}, none, fm, kernel(), ro, {},
                                  12e-9, 1.0);
    for (double v : sw.V_s) CHECK(v == 0.0);
    CHECK(sw.noise_floor == doctest::Approx(12e-9));
  }

  TEST_CASE("LZ rate fit round trip") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<LzSeries> series;
    for (double fma : {528e6, 768e6}) {
      LzSeries s;
      s.f_ma = fma;
      for (double fmf = 200.0; fmf <= 20e3; fmf *= 1.35) {
        s.f_mf.push_back(fmf);
        const double a = fma == 528e6 ? 40e-9 : 55e-9;
        s.amplitude.push_back(a * lz_probability({0.83e6, fma, fmf}).scale * (1.0 + noise(rng)));
      }
      series.push_back(s);
    }
    const auto fit = fit_lz_rate(series, 20e3);
    CHECK(fit.converged);
    CHECK(fit.a.size() == 2);
    CHECK(fit.rabi.ci_low < 0.83e6);
    CHECK(fit.rabi.ci_high > 0.83e6);
    CHECK(fit.rabi.value == doctest::Approx(0.83e6).epsilon(0.1));
    CHECK(fit.a[0].value == doctest::Approx(40e-9).epsilon(0.1));
    // single-series overload over a restricted domain
    const auto one = fit_lz_rate(series[1].f_mf, series[1].amplitude, 768e6, 3e3);
    CHECK(one.n_points < series[1].f_mf.size());
    CHECK(one.rabi.ci_low < 0.83e6);
    CHECK(one.rabi.ci_high > 0.83e6);
  }

  TEST_CASE("LZ fit failure modes") {
    const std::vector<double> f{500.0, 1e3, 2e3, 4e3, 8e3};
    CHECK_THROWS_AS(fit_lz_rate(f, std::vector<double>(5, 0.0), 768e6, 20e3), NumericError);
    std::vector<double> a;
    for (double x : f) a.push_back(1e-8 * lz_probability({0.83e6, 768e6, x}).scale);
    CHECK_THROWS_AS(fit_lz_rate(f, a, 768e6, 20e3, 1.0), NumericError);
    CHECK_THROWS_AS(fit_lz_rate(f, a, 768e6, 1.5e3), ValidationError);
  }
}
