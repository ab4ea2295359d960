#include <gsl/gsl_integration.h>

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "febench/constants.hpp"
#include "febench/errors.hpp"
#include "febench/qcap.hpp"

using namespace febench;
using namespace febench::qcap;

namespace {

// adaptive quadrature of C_1 over [lo, hi]; hi = inf allowed
double quad_c1(const TwoLevelDriveParams& p, double lo, double hi, bool tunneling = false) {
  struct Ctx {
    const TwoLevelDriveParams* p;
    bool t;
    double scale;
  } ctx{&p, tunneling, 1.0 / single_electron_capacitance(0.0, p)};
  gsl_function f;
  f.function = [](double x, void* q) {
    auto* c = static_cast<Ctx*>(q);
    return c->scale * single_electron_capacitance(x, *c->p, c->t);
  };
  f.params = &ctx;
  gsl_integration_workspace* w = gsl_integration_workspace_alloc(2000);
  // geometric breakpoints around the 2t_c-wide peak; qags alone misses it on wide ranges
  auto piece = [&](double a, double b) {
    double r = 0.0, err = 0.0;
    if (std::isinf(b))
      gsl_integration_qagiu(&f, a, 1e-12 * p.rabi, 1e-10, 2000, w, &r, &err);
    else
      gsl_integration_qags(&f, a, b, 1e-12 * p.rabi, 1e-10, 2000, w, &r, &err);
    return r;
  };
  std::vector<double> cuts{lo};
  for (double x = p.rabi; x < hi; x *= 4.0)
    if (x > lo) cuts.push_back(x);
  cuts.push_back(hi);
  double r = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) r += piece(cuts[i], cuts[i + 1]);
  gsl_integration_workspace_free(w);
  return r / ctx.scale;
}

DetuningDistribution gaussian(double fc, double sigma, double bin, double n_total, double span_sigmas = 8.0) {
  DetuningDistribution d;
  d.bin_width = bin;
  const int half = int(std::ceil(span_sigmas * sigma / bin));
  double s = 0.0;
  for (int i = -half; i <= half; ++i) {
    const double f = fc + i * bin;
    d.f_ry.push_back(f);
    d.counts.push_back(std::exp(-0.5 * std::pow((f - fc) / sigma, 2)));
    s += d.counts.back();
  }
  for (double& c : d.counts) c *= n_total / s;
  d.total_electrons = n_total;
  d.f_ry_peak = fc;
  return d;
}

}  // namespace

TEST_SUITE("quantum-capacitance") {
  TEST_CASE("population difference and single-electron peak") {
    TwoLevelDriveParams p;
    const double chi = population_difference(p.rabi, p.T);
    CHECK(chi == doctest::Approx(1.245e-4).epsilon(0.01));
    // peak chi dq^2 / (2 h 2t_c)
    const double peak = single_electron_capacitance(0.0, p);
    CHECK(peak == doctest::Approx(chi * p.dq * p.dq / (2.0 * phys::h * p.rabi)).epsilon(1e-12));
    CHECK(peak == doctest::Approx(2.9e-25).epsilon(0.02));
    CHECK(population_difference(1e15, 0.01) == doctest::Approx(1.0));
    CHECK_THROWS_AS(population_difference(1e9, 0.0), ValidationError);
  }

  TEST_CASE("C_1 is even and falls off as eps^-3") {
    TwoLevelDriveParams p;
    for (double eps : {1e5, 1e6, 3.3e7, 2e9})
      CHECK(single_electron_capacitance(eps, p) == doctest::Approx(single_electron_capacitance(-eps, p)));
    // far out chi saturates; dE^3 ~ eps^3
    const double p1 = single_electron_capacitance(1e12, p), p2 = single_electron_capacitance(2e12, p);
    CHECK(p1 / p2 == doctest::Approx(8.0).epsilon(1e-6));
  }

  TEST_CASE("kernel integral matches adaptive quadrature") {
    TwoLevelDriveParams p;
    KernelIntegral k(p);
    CHECK(k(0.0) == 0.0);
    for (double x : {3e5, 0.83e6, 5e6, 1e8, 3e9, 2e10, 1e12}) {
      const double ref = quad_c1(p, 0.0, x);
      CHECK(k(x) == doctest::Approx(ref).epsilon(1e-6));
      CHECK(k(-x) == doctest::Approx(-ref).epsilon(1e-6));
    }
    const double total = 2.0 * quad_c1(p, 0.0, INFINITY);
    CHECK(k.total() == doctest::Approx(total).epsilon(1e-5));
  }

  TEST_CASE("total weight at zero temperature is dq^2 / h") {
    // chi = 1 everywhere: int a^2 / (2 (e^2 + a^2)^1.5) de = 1
    TwoLevelDriveParams p;
    p.T = 1e-6;
    KernelIntegral k(p);
    CHECK(k.total() == doctest::Approx(p.dq * p.dq / phys::h).epsilon(1e-5));
  }

  TEST_CASE("total weight with 2t_c far below k_B T is pi/2 chi(0) dq^2 / h") {
    TwoLevelDriveParams p;
    KernelIntegral k(p);
    const double chi0 = population_difference(p.rabi, p.T);
    CHECK(k.total() == doctest::Approx(0.5 * phys::pi * chi0 * p.dq * p.dq / phys::h).epsilon(0.005));
  }

  TEST_CASE("delta distribution gives N C_1") {
    TwoLevelDriveParams p;
    KernelIntegral k(p);
    const auto d = DetuningDistribution::delta(120e9, 37.0);
    for (double off : {0.0, 4e5, -2e6, 1e8})
      CHECK(ensemble_capacitance(120e9 + off, d, k) ==
            doctest::Approx(37.0 * single_electron_capacitance(-off, p)).epsilon(1e-12));
  }

  TEST_CASE("bin-averaged capacitance equals the bin mean of C_1") {
    TwoLevelDriveParams p;
    KernelIntegral k(p);
    const double w = 50e6;
    const auto d = DetuningDistribution::delta(120e9, 1.0, w);
    for (double off : {0.0, 1e7, 2.5e7, 3e7, 2e8}) {
      const double ref = quad_c1(p, -off - w / 2, -off + w / 2) / w;
      CHECK(ensemble_capacitance(120e9 + off, d, k) == doctest::Approx(ref).epsilon(1e-6));
    }
  }

  TEST_CASE("ensemble capacitance is linear in the distribution") {
    TwoLevelDriveParams p;
    KernelIntegral k(p);
    const auto a = gaussian(121e9, 1e9, 50e6, 1e4);
    auto b = a;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (double& c : b.counts) c = u(rng);
    b.total_electrons = b.sum();
    const auto ab = combined(scaled(a, 2.5), b);
    for (double f : {119e9, 121e9, 121.3e9}) {
      const double lhs = ensemble_capacitance(f, ab, k);
      const double rhs = 2.5 * ensemble_capacitance(f, a, k) + ensemble_capacitance(f, b, k);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }

  TEST_CASE("broad distribution approaches density times total weight") {
    // sigma >> kernel width: C_N ~ n(f) * int C_1
    TwoLevelDriveParams p;
    KernelIntegral k(p);
    const double sigma = 1e9, n = 1e6, w = 50e6;
    const auto d = gaussian(121e9, sigma, w, n);
    const double dens = n / (std::sqrt(2.0 * phys::pi) * sigma);
    CHECK(ensemble_capacitance(121e9, d, k) == doctest::Approx(dens * k.total()).epsilon(0.01));
  }

  TEST_CASE("tunneling term is small and vanishes at zero detuning") {
    TwoLevelDriveParams p;
    CHECK(tunneling_capacitance(0.0, p) == 0.0);
    for (double eps : {1e4, 1e5, 4e5, 0.83e6, -0.83e6}) {
      const double ct = tunneling_capacitance(eps, p);
      CHECK(ct >= 0.0);
      CHECK(ct < 0.01 * single_electron_capacitance(eps, p));
    }
    // no suppression when the relaxation rate dominates the probe
    TwoLevelDriveParams fast = p;
    fast.relaxation_rate = 1e12;
    CHECK(tunneling_capacitance(1e8, fast) > 100.0 * tunneling_capacitance(1e8, p));
    // far tails: the quantum term drops as eps^-3 while the tunneling term stays
    // flat out to ~k_B T, so there it is no longer small
    CHECK(tunneling_capacitance(1e9, p) > 10.0 * single_electron_capacitance(1e9, p));
  }

  TEST_CASE("modulation depth") {
    TwoLevelDriveParams p;
    KernelIntegral k(p);
    const auto d = gaussian(121e9, 1e9, 50e6, 1e6);
    Warnings w;
    // zero slope at the symmetric peak
    const auto at_peak = modulation_depth(121e9, 100e6, d, k, &w);
    CHECK(std::abs(at_peak.dC) < 1e-6 * at_peak.C0 * 100e6 / 1e9);
    CHECK(w.empty());
    CHECK(modulation_depth(120e9, 0.0, d, k).dC == 0.0);
    // below the peak the population rises with f_MW
    const auto lo = modulation_depth(120e9, 100e6, d, k);
    CHECK(lo.dC > 0.0);
    const auto hi = modulation_depth(122e9, 100e6, d, k);
    CHECK(hi.dC == doctest::Approx(-lo.dC).epsilon(1e-6));
    // linear in f_ma
    CHECK(modulation_depth(120e9, 200e6, d, k).dC == doctest::Approx(2.0 * lo.dC).epsilon(1e-12));
    // Gaussian slope oracle: dC/df = C(f) (f_c - f) / sigma^2 for a broad profile
    const double expect = 100e6 * lo.C0 * (121e9 - 120e9) / (1e9 * 1e9);
    CHECK(lo.dC == doctest::Approx(expect).epsilon(0.02));
  }

  TEST_CASE("modulation depth warnings and range errors") {
    TwoLevelDriveParams p;
    KernelIntegral k(p);
    const auto d = gaussian(121e9, 1e9, 50e6, 1e6);
    Warnings w;
    modulation_depth(120e9, 600e6, d, k, &w);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("470") != std::string::npos);
    CHECK_THROWS_AS(modulation_depth(140e9, 1e6, d, k), ValidationError);
    CHECK_THROWS_AS(modulation_depth(121e9, -1.0, d, k), ValidationError);
    DetuningDistribution narrow;
    narrow.f_ry = {121e9, 121e9 + 1e6};
    narrow.counts = {1.0, 1.0};
    narrow.bin_width = 1e6;
    narrow.total_electrons = 2.0;
    Warnings w2;
    check_coverage(narrow, p, &w2);
    CHECK(w2.size() == 1);
  }

  TEST_CASE("distribution validation") {
    DetuningDistribution d;
    CHECK_THROWS_AS(d.validate(), ValidationError);
    d.f_ry = {1.0, 2.0};
    d.counts = {1.0};
    CHECK_THROWS_AS(d.validate(), ValidationError);
    d.counts = {1.0, -1.0};
    CHECK_THROWS_AS(d.validate(), ValidationError);
    d.counts = {1.0, 1.0};
    d.total_electrons = 5.0;
    CHECK_THROWS_AS(d.validate(), ValidationError);
    d.total_electrons = 2.0;
    CHECK_NOTHROW(d.validate());
    TwoLevelDriveParams p;
    p.rabi = 0.0;
    CHECK_THROWS_AS(KernelIntegral{p}, ValidationError);
  }
}
