#include <gsl/gsl_integration.h>

#include <cmath>
#include <random>

#include "doctest.h"
#include "febench/constants.hpp"
#include "febench/errors.hpp"
#include "febench/neon_em.hpp"

using namespace febench;
using namespace febench::neon;

namespace {

const double w_r2 = 2.0 * phys::pi * 5.91e9;

CrossSection r2_with_neon() {
  auto cs = CrossSection::preset("resonator2");
  cs.neon_thickness = 270e-9;
  return cs;
}

const LoadedLine& r2_line() {
  static const LoadedLine line(r2_with_neon());
  return line;
}

// weighted average of the Lorentz sigma over [0, w_max] by adaptive quadrature
cplx quad_thermal(const SheetConductivityParams& p, double omega, const TrapEnsemble& ens) {
  struct Ctx {
    SheetConductivityParams p;
    double omega, beta, wmax;
    int part;  // 0 weight, 1 Re, 2 Im
  };
  auto run = [&](int part) {
    Ctx c{p, omega, std::isinf(ens.temperature) ? 0.0 : phys::hbar / (phys::kB * ens.temperature), ens.omega_a_max,
          part};
    gsl_function f;
    f.function = [](double wa, void* v) {
      auto* c = static_cast<Ctx*>(v);
      const double w = std::exp(c->beta * (wa - c->wmax));
      if (c->part == 0) return w;
      auto q = c->p;
      q.omega_a = wa;
      const cplx s = sheet_conductivity(q, c->omega, ConductivityModel::lorentz);
      return w * (c->part == 1 ? s.real() : s.imag());
    };
    f.params = &c;
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(2000);
    double r = 0.0, err = 0.0;
    gsl_integration_qag(&f, 0.0, ens.omega_a_max, 0.0, 1e-10, 2000, GSL_INTEG_GAUSS61, ws, &r, &err);
    gsl_integration_workspace_free(ws);
    return r;
  };
  const double norm = run(0);
  return {run(1) / norm, run(2) / norm};
}

}  // namespace

TEST_SUITE("neon-sheet-em") {
  TEST_CASE("Drude and Lorentz conductivity") {
    SheetConductivityParams p;
    p.n_e = 8e12;
    const double s0 = phys::e * phys::e * p.n_e * p.tau / phys::me;
    const cplx d = sheet_conductivity(p, w_r2, ConductivityModel::drude);
    CHECK(d.real() == doctest::Approx(s0 / (1.0 + std::pow(w_r2 * p.tau, 2))).epsilon(1e-12));
    CHECK(d.imag() < 0.0);  // inductive under exp(+i w t)
    CHECK(sheet_conductivity(p, w_r2, ConductivityModel::lorentz) == d);

    // deep traps turn the response capacitive
    p.omega_a = 2.0 * phys::pi * 100e9;
    CHECK(sheet_conductivity(p, w_r2, ConductivityModel::lorentz).imag() > 0.0);

    // Re sigma falls monotonically once w_a passes w; below that it moves by < (w tau)^2
    double prev = INFINITY;
    for (double wa = w_r2; wa < 2.0 * phys::pi * 200e9; wa *= 1.05) {
      p.omega_a = wa;
      const double re = sheet_conductivity(p, w_r2, ConductivityModel::lorentz).real();
      CHECK(re < prev);
      prev = re;
    }
    p.omega_a = 0.5 * w_r2;
    CHECK(sheet_conductivity(p, w_r2, ConductivityModel::lorentz).real() / d.real() - 1.0 <
          std::pow(w_r2 * p.tau, 2));

    // |Im sigma| peaks where (w_a^2 / w - w) tau = 1, close to sqrt(w / tau)
    double best = 0.0, at = 0.0;
    for (double wa = 1e10; wa < 1e12; wa *= 1.0001) {
      p.omega_a = wa;
      const double im = std::abs(sheet_conductivity(p, w_r2, ConductivityModel::lorentz).imag());
      if (im > best) best = im, at = wa;
    }
    CHECK(at == doctest::Approx(std::sqrt(w_r2 * w_r2 + w_r2 / p.tau)).epsilon(2e-4));
    CHECK(at == doctest::Approx(std::sqrt(w_r2 / p.tau)).epsilon(0.05));
  }

  TEST_CASE("passivity: Re sigma >= 0 for all models") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TrapEnsemble ens;
    for (int k = 0; k < 200; ++k) {
      SheetConductivityParams p;
      p.n_e = std::pow(10.0, 10.0 + 6.0 * u(rng));
      p.tau = std::pow(10.0, -13.0 + 2.0 * u(rng));
      p.omega_a = 2.0 * phys::pi * 300e9 * u(rng);
      const double w = 2.0 * phys::pi * std::pow(10.0, 8.0 + 3.0 * u(rng));
      ens.temperature = 0.1 + 10.0 * u(rng);
      for (auto m : {ConductivityModel::drude, ConductivityModel::lorentz, ConductivityModel::thermal})
        CHECK(sheet_conductivity(p, w, m, ens).real() >= 0.0);
    }
    SheetConductivityParams bad;
    bad.tau = 0.0;
    CHECK_THROWS_AS(sheet_conductivity(bad, w_r2, ConductivityModel::drude), ValidationError);
    CHECK_THROWS_AS(sheet_conductivity({}, 0.0, ConductivityModel::drude), ValidationError);
  }

  TEST_CASE("trap ensemble weights and limits") {
    TrapEnsemble ens;
    const auto w = ens.weights();
    REQUIRE(w.size() == 201);
    double sum = 0.0;
    for (double x : w) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w[200] > w[100]);
    CHECK(w[100] > w[1]);

    SheetConductivityParams p;
    p.n_e = 1e13;
    // 3.4 K against adaptive quadrature of the same weighted integral
    const cplx th = sheet_conductivity(p, w_r2, ConductivityModel::thermal, ens);
    const cplx ref = quad_thermal(p, w_r2, ens);
    CHECK(std::abs(th - ref) < 1e-3 * std::abs(ref));

    // T -> 0 concentrates on w_a_max
    TrapEnsemble cold = ens;
    cold.temperature = 1e-3;
    auto q = p;
    q.omega_a = ens.omega_a_max;
    const cplx top = sheet_conductivity(q, w_r2, ConductivityModel::lorentz);
    CHECK(std::abs(sheet_conductivity(p, w_r2, ConductivityModel::thermal, cold) - top) < 1e-6 * std::abs(top));

    // flat weights: the uniform average
    TrapEnsemble flat = ens;
    flat.temperature = INFINITY;
    const cplx fl = sheet_conductivity(p, w_r2, ConductivityModel::thermal, flat);
    CHECK(std::abs(fl - quad_thermal(p, w_r2, flat)) < 1e-3 * std::abs(fl));

    TrapEnsemble bad = ens;
    bad.points = 1;
    CHECK_THROWS_AS(bad.weights(), ValidationError);
  }

  TEST_CASE("film kinetic inductance and zero-point voltage") {
    const auto r = film_properties({}, 1.45e-3, 100e-9, 4.81e9);
    CHECK(r.L_square == doctest::Approx(9.6e-12).epsilon(0.01));
    CHECK(r.L_kin == doctest::Approx(139e-9).epsilon(0.01));
    CHECK(r.Z0 == doctest::Approx(1337.0).epsilon(0.01));
    CHECK(r.Z0 == doctest::Approx(2.0 * 4.81e9 * r.L_kin));
    // hand evaluation of the printed formula: 12.79 uV, 3.09 GHz
    CHECK(r.V0 == doctest::Approx(12.786e-6).epsilon(1e-3));
    CHECK(r.eV0_over_h() == doctest::Approx(3e9).epsilon(0.05));
    // same thing written through Z0: V0 = 2 w sqrt(hbar Z0 / pi)
    const double w = 2.0 * phys::pi * 4.81e9;
    CHECK(r.V0 == doctest::Approx(2.0 * w * std::sqrt(phys::hbar * r.Z0 / phys::pi)).epsilon(1e-12));
    const cplx s = film_conductivity({}, w);
    CHECK(s.real() == 0.0);
    CHECK(1.0 / (-s.imag() * w) == doctest::Approx(phys::mu0 * 390e-9 * 390e-9));
    CHECK_THROWS_AS(film_properties({}, 1.45e-3, 0.0, 4.81e9), ValidationError);
    CHECK_THROWS_AS(film_properties({0.0, 20e-9}, 1.45e-3, 100e-9, 4.81e9), ValidationError);
  }

  TEST_CASE("parallel-plate limit of the cross-section solver") {
    auto pp = CrossSection::parallel_plate(2e-6, 100e-9, 300e-9);
    pp.eps_substrate = 1.0;
    const double e0 = phys::eps0;
    CHECK(cross_section_capacitance(pp).C_l.real() == doctest::Approx(e0 * 2e-6 / 300e-9).epsilon(0.02));
    // series stack: silicon, neon, vacuum
    pp.eps_substrate = 11.4;
    pp.neon_thickness = 120e-9;
    const auto r = cross_section_capacitance(pp);
    CHECK(r.residual < 1e-8);
    CHECK(r.C_l.real() ==
          doctest::Approx(e0 * 2e-6 / (100e-9 / 11.4 + 120e-9 / 1.244 + 80e-9)).epsilon(0.02));
    CHECK(r.C_l.imag() == 0.0);
  }

  TEST_CASE("coplanar line: refinement, neon monotonicity, validation") {
    auto cs = CrossSection::preset("resonator1");
    const auto c1 = cross_section_capacitance(cs);
    CHECK(c1.residual < 1e-8);
    const auto c2 = cross_section_capacitance(cs.refined());
    CHECK(c2.unknowns > 3 * c1.unknowns);
    CHECK(std::abs(c2.C_l.real() / c1.C_l.real() - 1.0) < 0.01);
    // on silicon the line sits between the vacuum and full-silicon values
    const double vac = cs.eps_substrate;
    auto cv = cs;
    cv.eps_substrate = 1.0;
    const double Cv = cross_section_capacitance(cv).C_l.real();
    CHECK(c1.C_l.real() > Cv);
    CHECK(c1.C_l.real() < vac * Cv);

    double prev = c1.C_l.real();
    for (double t : {20e-9, 60e-9, 100e-9, 160e-9, 270e-9, 500e-9}) {
      cs.neon_thickness = t;
      const double C = cross_section_capacitance(cs).C_l.real();
      CHECK(C > prev);
      prev = C;
    }

    auto bad = CrossSection::preset("resonator1");
    bad.h_min = 5e-9;  // 20 nm metal with 4 cells
    CHECK_THROWS_AS(cross_section_capacitance(bad), ValidationError);
    bad = CrossSection::preset("resonator1");
    bad.neon_thickness = -1e-9;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_THROWS_AS(CrossSection::preset("resonator9"), ValidationError);
  }

  TEST_CASE("neon frequency shift and its inverse") {
    auto cs = CrossSection::preset("resonator1");
    CHECK(neon_frequency_shift(cs) == 0.0);
    CHECK(frequency_shift(1.0, 1.0) == 0.0);
    CHECK(frequency_shift(1.0, 1.02) == doctest::Approx(1.0 / std::sqrt(1.02) - 1.0));
    cs.neon_thickness = 120e-9;
    const double s = neon_frequency_shift(cs);
    CHECK(s < 0.0);
    CHECK(thickness_from_shift(cs, s) == doctest::Approx(120e-9).epsilon(0.01));
    CHECK(thickness_from_shift(cs, 0.0) == 0.0);
    CHECK_THROWS_AS(thickness_from_shift(cs, 0.001), ValidationError);
    CHECK_THROWS_AS(thickness_from_shift(cs, -0.05), ValidationError);
  }

  TEST_CASE("reduced loaded line matches the direct solve") {
    const auto cs = r2_with_neon();
    const auto& line = r2_line();
    for (cplx sigma : {cplx(1e-8, -1e-9), cplx(5e-7, -4e-8), cplx(2e-8, 6e-8)}) {
      const cplx Cs = line.C(sigma);
      const cplx Cd = cross_section_capacitance(cs, ElectronSheet{sigma}).C_l;
      CHECK(std::abs(Cs - Cd) < 1e-9 * std::abs(Cd));
      const auto a = line.response(sigma);
      const auto b = electron_loading_response(cs, sigma, w_r2);
      CHECK(a.shift == doctest::Approx(b.shift).epsilon(1e-7));
      CHECK(a.inv_Q_e == doctest::Approx(b.inv_Q_e).epsilon(1e-7));
    }
    CHECK(line.C0() == doctest::Approx(cross_section_capacitance(cs).C_l.real()).epsilon(1e-9));
  }

  TEST_CASE("electron loading: limits and perturbative agreement") {
    const auto cs = r2_with_neon();
    const auto& line = r2_line();
    const auto zero = electron_loading_response(cs, 0.0, w_r2);
    CHECK(zero.shift == 0.0);
    CHECK(zero.inv_Q_e == 0.0);
    CHECK(zero.warnings.empty());

    // weak sheet: first-order result and the full solve agree
    SheetConductivityParams p;
    p.n_e = 1e10;
    for (auto m : {ConductivityModel::drude, ConductivityModel::thermal}) {
      const cplx s = sheet_conductivity(p, w_r2, m);
      const auto full = line.response(s);
      const auto pert = line.response(s, LoadingMode::perturbative);
      CHECK(full.inv_Q_e == doctest::Approx(pert.inv_Q_e).epsilon(0.01));
      CHECK(full.shift == doctest::Approx(pert.shift).epsilon(0.02));
      CHECK(pert.Y_e == s * line.participation());
      CHECK(full.alpha == doctest::Approx(phys::pi * full.inv_Q_e / (2.0 * cs.length)));
    }
    // the sheet thickness regularization does not matter
    p.n_e = 8e12;
    const cplx s = sheet_conductivity(p, w_r2, ConductivityModel::drude);
    const auto a = electron_loading_response(cs, s, w_r2, LoadingMode::full, 2.5e-9, 1e-9);
    const auto b = electron_loading_response(cs, s, w_r2, LoadingMode::full, 2.5e-9, 2.5e-9);
    CHECK(b.shift == doctest::Approx(a.shift).epsilon(0.03));
    CHECK(b.inv_Q_e == doctest::Approx(a.inv_Q_e).epsilon(0.03));
  }

  TEST_CASE("electron loading: degenerate geometry and domain checks") {
    auto pp = CrossSection::parallel_plate(1e-6, 100e-9, 400e-9);
    pp.neon_thickness = 100e-9;
    const auto r = electron_loading_response(pp, cplx(1e-7, -1e-8), 2.0 * phys::pi * 5e9);
    CHECK_FALSE(r.warnings.empty());
    CHECK(std::abs(r.shift) < 1e-12);
    auto cs = r2_with_neon();
    cs.box_height = 272e-9;
    CHECK_THROWS_AS(electron_loading_response(cs, 1e-7, w_r2), ValidationError);
    CHECK_THROWS_AS(electron_loading_response(r2_with_neon(), 1e-7, w_r2, LoadingMode::full, 0.2e-9, 1e-9),
                    ValidationError);
  }

  TEST_CASE("loading shift is monotone in density and loss is passive") {
    const auto& line = r2_line();
    SheetConductivityParams p;
    // thermal-Lorentz: capacitive at every density
    double prev = 0.0;
    for (double n = 1e9; n < 3e15; n *= 1.6) {
      p.n_e = n;
      const auto r = line.response(p, ConductivityModel::thermal);
      CHECK(r.shift < prev);
      CHECK(r.inv_Q_e > 0.0);
      prev = r.shift;
    }
    // Drude: a weak sheet is inductive (shift > 0, tiny); screening wins above ~1e11 m^-2
    for (double tau : {1.9e-12, 4.7e-12}) {
      p.tau = tau;
      double top = 0.0;
      for (double n = 1e9; n < 1.2e11; n *= 1.3) {
        p.n_e = n;
        top = std::max(top, line.response(p, ConductivityModel::drude).shift);
      }
      CHECK(top > 0.0);
      CHECK(top < 1e-4);
      prev = INFINITY;
      for (double n = 1.2e11; n < 3e15; n *= 1.6) {
        p.n_e = n;
        const auto r = line.response(p, ConductivityModel::drude);
        CHECK(r.shift < prev);
        CHECK(r.inv_Q_e > 0.0);
        prev = r.shift;
      }
    }
  }

  TEST_CASE("Drude loss exceeds thermal-Lorentz loss at matched shift") {
    const auto& line = r2_line();
    SheetConductivityParams p;
    for (double target : {-0.002, -0.005, -0.009}) {
      auto q = p;
      q.n_e = density_for_shift(line, p, ConductivityModel::drude, target);
      const auto d = line.response(q, ConductivityModel::drude);
      q.n_e = density_for_shift(line, p, ConductivityModel::thermal, target);
      const auto t = line.response(q, ConductivityModel::thermal);
      CHECK(d.shift == doctest::Approx(target).epsilon(1e-4));
      CHECK(t.shift == doctest::Approx(target).epsilon(1e-4));
      CHECK(d.inv_Q_e > t.inv_Q_e);
    }
    // the Drude loss is far above the ~4e-4 seen in the measurement
    auto q = p;
    q.n_e = density_for_shift(line, p, ConductivityModel::drude, -0.009);
    CHECK(line.response(q, ConductivityModel::drude).inv_Q_e > 5.0 * 4e-4);
    CHECK_THROWS_AS(density_for_shift(line, p, ConductivityModel::drude, -0.5), ValidationError);
  }

  TEST_CASE("thermal-Lorentz loss at the measured shift") {
    const auto& line = r2_line();
    SheetConductivityParams p;
    p.n_e = density_for_shift(line, p, ConductivityModel::thermal, -0.009);
    const auto r = line.response(p, ConductivityModel::thermal);
    CHECK(r.inv_Q_e > 3.7e-4 / 3.0);
    CHECK(r.inv_Q_e < 3.7e-4 * 3.0);
    // averaging sigma first instead of the response gives a much lossier sheet
    TrapEnsemble ens;
    auto q = p;
    q.n_e = density_for_shift(line, p, ConductivityModel::thermal, -0.009, ens, ThermalAverage::conductivity);
    CHECK(line.response(q, ConductivityModel::thermal, ens, ThermalAverage::conductivity).inv_Q_e >
          3.0 * r.inv_Q_e);
  }
}
