#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "febench/errors.hpp"

namespace febench::neon {

using cplx = std::complex<double>;

// Time dependence exp(+i w t) throughout, so a lossy sheet has Re sigma > 0 and
// an inductive (free-electron) response has Im sigma < 0.

struct SheetConductivityParams {
  double n_e = 0.0;             // m^-2
  double tau = 1.9e-12;         // s
  double omega_a = 0.0;         // trap frequency, rad/s
  double layer_height = 2.5e-9; // above the neon surface, m
  double layer_thickness = 1e-9;  // dz of the conducting layer, m
  void validate() const;
};

struct TrapEnsemble {
  double omega_a_max;          // rad/s
  double temperature = 3.4;    // K; +inf gives a flat weight
  int points = 201;

  TrapEnsemble();
  void validate() const;
  std::vector<double> nodes() const;
  // trapezoid weights times exp(hbar w_a / kT), normalized to 1
  std::vector<double> weights() const;
};

enum class ConductivityModel { drude, lorentz, thermal };

cplx sheet_conductivity(const SheetConductivityParams& p, double omega, ConductivityModel model,
                        const TrapEnsemble& ens = {});

struct FilmParams {
  double penetration_depth = 390e-9;  // m
  double thickness = 20e-9;           // m
  void validate() const;
};

// thin-film response 1/(i mu0 w lambda^2)
cplx film_conductivity(const FilmParams& f, double omega);

struct NanowireResonator {
  double length = 1.45e-3;  // m
  double width = 100e-9;    // m
  double gap = 100e-9;      // m
  double f_r = 4.81e9;      // Hz
  double L_square = 0.0;    // H
  double L_kin = 0.0;       // H
  double Z0 = 0.0;          // Ohm
  double V0 = 0.0;          // V, zero-point rms voltage between the ends
  double eV0_over_h() const;
};

NanowireResonator film_properties(const FilmParams& f, double length, double width, double f_r, double gap = 0.0);

enum class CrossSectionKind { coplanar, parallel_plate };

// Half of a symmetric cross-section, y >= 0 (mirror plane at y = 0).
//
// coplanar: center strip of width w at potential 1, grounds from w/2 + gap to the box edge.
// Metal of thickness t_m sits on a silicon pedestal of height trench_depth; the gaps are
// etched down to z = 0. Neon fills from z = 0 up to neon_thickness. Grounded box at
// z = -box_depth and z = box_height, Neumann at y = box_half_width.
//
// parallel_plate: ground at z = 0, silicon up to substrate_height, neon above it up to
// neon_thickness more, then vacuum to an electrode at plate_height spanning the box.
struct CrossSection {
  CrossSectionKind kind = CrossSectionKind::coplanar;
  double width = 100e-9;
  double gap = 100e-9;
  double metal_thickness = 20e-9;
  double trench_depth = 60e-9;
  double neon_thickness = 0.0;  // measured from the trench floor
  double eps_substrate = 11.4;
  double eps_neon = 1.244;
  double f_r = 4.81e9;         // Hz, used for the electron response
  double length = 1.45e-3;     // m, for Q_e = pi / (2 alpha l)

  // parallel_plate only
  double substrate_height = 100e-9;
  double plate_height = 100e-9;

  // grid
  double h_min = 2.5e-9;
  double growth = 1.2;
  double h_max = 2e-6;
  double box_half_width = 20e-6;
  double box_height = 20e-6;
  double box_depth = 20e-6;

  // "resonator1" (100/100 nm, 4.81 GHz), "resonator2" (150/150 nm, 5.91 GHz),
  // "resonator3" (300/300 nm, 6.98 GHz)
  static CrossSection preset(const std::string& name);
  static CrossSection parallel_plate(double width, double substrate_height, double plate_height);
  double metal_top() const;
  // smallest structural length; the grid must put >= 8 cells across it
  double smallest_feature() const;
  void validate() const;
  CrossSection refined(int factor = 2) const;
};

struct ElectronSheet {
  cplx sigma;                   // sheet conductivity, S
  double height = 2.5e-9;       // above the neon surface
  double thickness = 1e-9;      // dz
};

struct CapacitanceResult {
  cplx C_l;               // F/m, complex with a conducting sheet
  double residual = 0.0;  // |A x - b| / |b|
  std::size_t unknowns = 0;
  std::size_t n_y = 0, n_z = 0;
};

// Quasi-static solve with the strip at unit potential; C_l from the discrete field energy.
CapacitanceResult cross_section_capacitance(const CrossSection& cs, const std::optional<ElectronSheet>& sheet = {});

// sqrt(C_without / C_with) - 1
double frequency_shift(double C_without, double C_with);
// shift from adding cs.neon_thickness of neon to the bare cross-section
double neon_frequency_shift(const CrossSection& cs);
// inverse of neon_frequency_shift by bisection over [0, t_max]
double thickness_from_shift(CrossSection cs, double shift, double t_max = 1e-6, double tol = 0.5e-9);

enum class LoadingMode { full, perturbative };

struct LoadingResult {
  double shift = 0.0;     // fractional frequency shift
  double inv_Q_e = 0.0;
  double alpha = 0.0;     // 1/m, back-reported from Q_e = pi / (2 alpha l)
  cplx Y_e;               // perturbative shunt admittance per length, S/m (perturbative mode)
  double C_l = 0.0;       // unloaded (neon only) C_l
  Warnings warnings;
};

LoadingResult electron_loading_response(const CrossSection& cs, cplx sigma, double omega,
                                        LoadingMode mode = LoadingMode::full, double layer_height = 2.5e-9,
                                        double layer_thickness = 1e-9);

enum class ThermalAverage {
  response,      // average shift and 1/Q_e over the trap ensemble (default)
  conductivity   // solve once with the ensemble-averaged sigma
};

// Cross-section with a fixed electron layer at omega = 2 pi f_r, reduced onto the layer
// nodes once so that each sheet conductivity costs a small dense solve.
class LoadedLine {
 public:
  explicit LoadedLine(const CrossSection& cs, double layer_height = 2.5e-9, double layer_thickness = 1e-9);
  double C0() const;             // neon only, F/m
  cplx C(cplx sigma) const;      // with the sheet
  double participation() const;  // 2 sum g (dphi)^2 at unit strip potential, 1/m
  double omega() const;
  LoadingResult response(cplx sigma, LoadingMode mode = LoadingMode::full) const;
  LoadingResult response(const SheetConductivityParams& p, ConductivityModel model, const TrapEnsemble& ens = {},
                         ThermalAverage avg = ThermalAverage::response) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// n_e giving the target shift (negative); bisection in log n_e.
double density_for_shift(const LoadedLine& line, SheetConductivityParams p, ConductivityModel model,
                         double target_shift, const TrapEnsemble& ens = {},
                         ThermalAverage avg = ThermalAverage::response, double n_lo = 1e10, double n_hi = 1e17);

}  // namespace febench::neon
