#pragma once

#include <Eigen/Dense>
#include <vector>

#include "febench/distribution.hpp"
#include "febench/errors.hpp"
#include "febench/rydberg.hpp"

namespace febench::corbino {

struct CorbinoGeometry {
  double D = 2e-3;                         // plate gap, m
  double outer_radius = 7.5e-3;            // m, Neumann wall
  double center_electrode_radius = 4e-3;   // m
  double middle_outer_radius = 5.65e-3;    // m, outer edge of the middle ring (~0.5 cm^2 rings)
  double ring_gap = 0.2e-3;                // m, potential interpolated linearly across gaps
  int n_z = 200;
  int n_r = 500;
  double electron_height = 1e-3;           // m

  double dz() const { return D / n_z; }
  double dr() const { return outer_radius / n_r; }
  int electron_row() const;  // grid row of the electron plane
  void validate() const;
};

// Bottom plate: center (BC), middle and outer (BG); top plate likewise.
struct BiasConfig {
  double bottom_center = 0.0, bottom_middle = 0.0, bottom_outer = 0.0;
  double top_center = 0.0, top_middle = 0.0, top_outer = 0.0;

  static BiasConfig bottom(double V_BC, double V_BG);
  double max_abs() const;
  void validate() const;
};

// Plate potential at radius r, linear across the inter-ring gaps.
double plate_potential(const CorbinoGeometry& g, const BiasConfig& b, bool top, double r);

enum class SolverMethod { sor, direct };

struct PotentialField {
  std::vector<double> r, z;  // node coordinates
  Eigen::MatrixXd phi;       // (n_z+1) x (n_r+1), row = z index
  double residual = 0.0;     // max |A phi - b| / diag, V
  int iterations = 0;

  // E_z at a row from the central difference (one-sided at the plates)
  std::vector<double> Ez_row(int i) const;
  // E_z between rows i and i+1
  std::vector<double> Ez_above(int i) const;
};

// Finite-volume cylindrical Poisson solve with the plates as Dirichlet
// boundaries and dphi/dr = 0 at r = R. charge_plane, if non-empty, holds the
// electron sheet density n_s(r_j) in m^-2 on the electron row (charge -e n_s).
PotentialField solve_laplace(const CorbinoGeometry& geo, const BiasConfig& bias,
                             const std::vector<double>& charge_plane = {}, SolverMethod method = SolverMethod::sor,
                             int max_iter = 200000);

// Potential of a ring of charge q (C) at (r_ring, z_ring) with all electrodes grounded.
PotentialField ring_green_function(const CorbinoGeometry& geo, double r_ring, double z_ring, double q = 1.0,
                                   SolverMethod method = SolverMethod::direct);

// Annulus area of node j (half cells at the axis and at the wall).
std::vector<double> annulus_areas(const CorbinoGeometry& geo);

// Charge on both plates (C), from the discrete normal flux.
double induced_plate_charge(const PotentialField& f, const CorbinoGeometry& geo);

struct RadialProfile {
  std::vector<double> r;         // m
  std::vector<double> n_s;       // m^-2
  std::vector<double> E_z;       // V/m, electrode field at the electron plane
  std::vector<double> E_residual;  // V/m, field just above the sheet with electrons
  double total_electrons = 0.0;
  double confinement_radius = 0.0;  // outermost occupied node, m
  int iterations = 0;
  bool empty = false;  // no confining region
};

RadialProfile saturated_density(const CorbinoGeometry& geo, const BiasConfig& bias, double eta = 0.5,
                                int max_iter = 5000);

// Electrons per annulus mapped through f12(E_z) into bins of bin_width, then
// convolved with a normalized Gaussian of standard deviation gauss_sigma.
DetuningDistribution detuning_distribution(const RadialProfile& profile,
                                           const std::vector<rydberg::StarkPoint>& stark, double gauss_sigma,
                                           double bin_width = 50e6);

}  // namespace febench::corbino
