#pragma once

#include <Eigen/Dense>
#include <vector>

#include "febench/errors.hpp"

namespace febench::magnet {

using Vec3 = Eigen::Vector3d;

// Uniformly magnetized rectangular block. M is mu0 * magnetization, in tesla.
struct MagnetBlock {
  Vec3 dims{1.5e-6, 1.5e-6, 100e-9};  // (a, b, t) along x, y, z
  Vec3 center{0.0, 0.0, 0.0};
  Vec3 M{0.0, 1.7, 0.0};
  void validate() const;
  // distance from p to the block surface, negative inside
  double signed_distance(const Vec3& p) const;
};

enum class FieldMethod { dipole, prism };

struct DipoleOptions {
  int order = 6;        // Gauss-Legendre points per axis in a leaf cell
  double eta = 0.5;     // leaf when cell size < eta * distance to the probe
  int max_depth = 40;
};

// Sum of the point-dipole fields of the block volume, adaptively subdivided toward p.
Vec3 block_field(const MagnetBlock& b, const Vec3& p, const DipoleOptions& opt = {});
// Closed form from the equivalent surface charge on the faces.
Vec3 prism_field(const MagnetBlock& b, const Vec3& p);
Vec3 block_field(const MagnetBlock& b, const Vec3& p, FieldMethod method);

// Field of a point dipole moment m (A m^2) at offset r from it.
Vec3 point_dipole_field(const Vec3& m, const Vec3& r);

// Two blocks magnetized along y facing each other across the resonator gap. The
// block z-centers sit at z = 0 and the electrons at z = dz, with the two sites at
// y = -d/2 and +d/2 around the assembly center.
struct MagnetAssembly {
  std::vector<MagnetBlock> blocks;
  double d = 100e-9;
  double dz = 146e-9;
  double misalignment_y = 0.0;  // sites shifted relative to the blocks
  std::vector<Vec3> resonator_offsets;  // resonator reference points, relative to the site midpoint
  FieldMethod method = FieldMethod::dipole;
  DipoleOptions dipole;
  double step = 1e-9;  // central-difference step

  // gap is the face-to-face spacing along y
  static MagnetAssembly two_block(double thickness = 100e-9, double gap = 500e-9, double M = 1.7);
  void validate() const;
  Vec3 field(const Vec3& p) const;
  Vec3 midpoint(double dz_) const;
  std::vector<Vec3> electron_sites() const;
  // dBz/dy at the electron midpoint for electron plane height dz_, T/m
  double gradient(double dz_) const;
};

struct GradientProfile {
  std::vector<double> dz;
  std::vector<double> dBz_dy;  // T/m, signed
  std::size_t argmax = 0;      // by magnitude
  double peak = 0.0;           // |dBz/dy| at argmax
  double peak_dz = 0.0;
};

GradientProfile assembly_gradient_profile(const MagnetAssembly& a, const std::vector<double>& dz_list);

struct CouplingReport {
  double gradient = 0.0;      // |dBz/dy| at the configured dz, T/m
  double b_perp = 0.0;        // rad/s
  double By_electron = 0.0;   // mean over the two sites, T
  double Bz_resonator = 0.0;  // max |Bz| over the resonator points, T
  double By_resonator = 0.0;  // max |By| over the resonator points, T
  double B_ext = 0.0;         // external y field for the target b_par, T
  double zeeman_mismatch = 0.0;  // ||B(site1)| - |B(site2)|| / |B|
};

// b_perp = g muB/hbar * dBz/dy * d
double b_perp_from_gradient(double gradient, double d, double g = 2.0023);
// B_ext with g muB (B_y + B_ext)/hbar = b_par_target
double required_external_field(double b_par_target, double By, double g = 2.0023);

CouplingReport coupling_and_offsets(const MagnetAssembly& a, double b_par_target = 2.0 * 3.14159265358979323846 * 4.8e9,
                                    double g = 2.0023);

// central-difference div B at p, same step as the assembly
double divergence(const MagnetAssembly& a, const Vec3& p);

}  // namespace febench::magnet
