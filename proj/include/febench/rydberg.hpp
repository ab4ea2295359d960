#pragma once

#include <limits>
#include <vector>

namespace febench::rydberg {

struct SurfaceParams {
  double eps_s = 1.056;
  double z0 = 0.1e-9;                                   // m
  double V0 = std::numeric_limits<double>::infinity();  // J; infinity = hard wall
  double E_perp = 0.0;                                  // V/m

  double lambda() const { return (eps_s - 1.0) / (eps_s + 1.0); }
  void validate() const;

  static SurfaceParams helium(double E_perp = 0.0);  // eps 1.056, z0 0.1 nm, V0 1 eV
  static SurfaceParams neon(double E_perp = 0.0);    // eps 1.244, z0 0.23 nm, V0 0.7 eV
};

struct Grid1D {
  double z_max = 150e-9;
  int n_points = 4000;

  static Grid1D helium() { return {150e-9, 4000}; }
  static Grid1D neon() { return {40e-9, 4000}; }
};

// Interior sample points of the discretised problem. For a finite barrier the
// grid starts inside the barrier so that the wavefunction tail is resolved.
struct Discretization {
  std::vector<double> z;  // m
  double dz = 0.0;        // m
  double z_min = 0.0;     // Dirichlet boundary below the first point
};

Discretization discretize(const SurfaceParams& p, const Grid1D& g);

// V(z) on the interior points, in J.
std::vector<double> potential_profile(const SurfaceParams& p, const Grid1D& g);
double potential_at(const SurfaceParams& p, double z);

struct EnergySpectrum {
  std::vector<double> levels_hz;                // E_n / h, ascending
  std::vector<std::vector<double>> wavefunctions;  // sum |psi|^2 dz = 1
  std::vector<double> mean_heights;             // <z>_n, m
  std::vector<double> z;                        // sample points, m
  double dz = 0.0;
  double f12 = 0.0;  // Hz
  double z12 = 0.0;  // <1|z|2>, m (sign fixed by psi_n > 0 near the surface)
};

EnergySpectrum solve_spectrum(const SurfaceParams& p, const Grid1D& g, int n_states);

// -R_inf (Lambda/4)^2 / n^2 in Hz.
double hydrogenic_levels(double lambda, int n);
// Hydrogenic <z>_n = 1.5 n^2 a_B with a_B = 4 a_0 / Lambda.
double hydrogenic_mean_height(double lambda, int n);

struct StarkPoint {
  double E_perp = 0.0;         // V/m
  double f12 = 0.0;            // Hz, full solve
  double f12_first_order = 0.0;  // Hz, f12(0) + e E (<2|z|2> - <1|z|1>) / h
  double z1 = 0.0, z2 = 0.0;   // mean heights at this field
};

std::vector<StarkPoint> stark_response(const SurfaceParams& p, const Grid1D& g,
                                       const std::vector<double>& E_perp_list);

// 2 t_c / h = e E_e z12 / h and its inverse.
double rabi_from_field(double E_e, double z12);
double field_from_rabi(double rabi_hz, double z12);

}  // namespace febench::rydberg
