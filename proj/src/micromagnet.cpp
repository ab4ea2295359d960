#include "febench/micromagnet.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "febench/constants.hpp"

namespace febench::magnet {

using phys::pi;

void MagnetBlock::validate() const {
  require(dims.minCoeff() > 0.0, "MagnetBlock: dimensions must be positive");
  require(M.norm() > 0.0, "MagnetBlock: magnetization must be nonzero");
  require(dims.allFinite() && center.allFinite() && M.allFinite(), "MagnetBlock: non-finite input");
}

double MagnetBlock::signed_distance(const Vec3& p) const {
  const Vec3 q = (p - center).cwiseAbs() - 0.5 * dims;
  const double outside = q.cwiseMax(0.0).norm();
  return outside > 0.0 ? outside : q.maxCoeff();
}

Vec3 point_dipole_field(const Vec3& m, const Vec3& r) {
  const double rn = r.norm();
  require(rn > 0.0, "point_dipole_field: zero separation");
  const Vec3 u = r / rn;
  return phys::mu0 / (4.0 * pi) * (3.0 * m.dot(u) * u - m) / (rn * rn * rn);
}

namespace {

void require_outside(const MagnetBlock& b, const Vec3& p) {
  b.validate();
  if (b.signed_distance(p) <= 1e-12 * b.dims.minCoeff())
    throw ValidationError("magnet: probe point is inside or on the block");
}

struct Quadrature {
  std::vector<double> x, w;  // on [-1, 1]
  explicit Quadrature(int n) {
    require(n >= 2 && n <= 64, "DipoleOptions: order must be in [2, 64]");
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> t(
        gsl_integration_glfixed_table_alloc(std::size_t(n)), gsl_integration_glfixed_table_free);
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(-1.0, 1.0, std::size_t(i), &x[i], &w[i], t.get());
  }
};

struct DipoleSum {
  const Vec3& M;
  const Vec3& p;
  const Quadrature& q;
  const DipoleOptions& opt;

  Vec3 leaf(const Vec3& lo, const Vec3& hi) const {
    const Vec3 c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    Vec3 B = Vec3::Zero();
    const int n = int(q.x.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const Vec3 r = p - Vec3(c.x() + h.x() * q.x[i], c.y() + h.y() * q.x[j], c.z() + h.z() * q.x[k]);
          const double r2 = r.squaredNorm(), r1 = std::sqrt(r2);
          B += q.w[i] * q.w[j] * q.w[k] * (3.0 * M.dot(r) * r / (r2 * r2 * r1) - M / (r2 * r1));
        }
    return B * h.prod();
  }

  Vec3 cell(const Vec3& lo, const Vec3& hi, int depth) const {
    const Vec3 ext = hi - lo;
    const double size = ext.maxCoeff();
    const double dist = (lo - p).cwiseMax(p - hi).cwiseMax(0.0).norm();
    if (size < opt.eta * dist) return leaf(lo, hi);
    if (depth >= opt.max_depth) throw NumericError("block_field: subdivision depth exceeded near the probe");
    // halve the long axes only, so thin blocks are not over-split in z
    int split[3];
    for (int a = 0; a < 3; ++a) split[a] = ext[a] > 0.5 * size ? 2 : 1;
    Vec3 B = Vec3::Zero();
    for (int i = 0; i < split[0]; ++i)
      for (int j = 0; j < split[1]; ++j)
        for (int k = 0; k < split[2]; ++k) {
          const Vec3 idx(i, j, k), s(split[0], split[1], split[2]);
          const Vec3 l = lo + ext.cwiseProduct(idx.cwiseQuotient(s));
          const Vec3 u = lo + ext.cwiseProduct((idx + Vec3::Ones()).cwiseQuotient(s));
          B += cell(l, u, depth + 1);
        }
    return B;
  }
};

// H (per unit surface charge, times 4 pi) of the rectangle [u1,u2] x [v1,v2] in its own plane,
// probe at the origin of the tangential coordinates and height w above the plane.
// Returns (H_u, H_v, H_w) pointing away from the sheet.
Vec3 rectangle(double u1, double u2, double v1, double v2, double w) {
  const double us[2] = {u1, u2}, vs[2] = {v1, v2};
  double Hu = 0.0, Hv = 0.0, Hw = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double s = i == 1 ? 1.0 : -1.0;
    // field components tangential to the plate: differences of asinh along the edge
    const double rho_u = std::hypot(us[i], w), rho_v = std::hypot(vs[i], w);
    if (rho_u == 0.0 || rho_v == 0.0) throw NumericError("prism_field: probe lies on a block edge line");
    Hu += s * (std::asinh(v2 / rho_u) - std::asinh(v1 / rho_u));
    Hv += s * (std::asinh(u2 / rho_v) - std::asinh(u1 / rho_v));
    for (int j = 0; j < 2; ++j) {
      const double sj = (i == j) ? 1.0 : -1.0;
      if (w != 0.0) {
        const double R = std::sqrt(us[i] * us[i] + vs[j] * vs[j] + w * w);
        Hw += sj * std::atan(us[i] * vs[j] / (w * R));
      }
    }
  }
  return Vec3(Hu, Hv, Hw);
}

}  // namespace

Vec3 block_field(const MagnetBlock& b, const Vec3& p, const DipoleOptions& opt) {
  require_outside(b, p);
  require(opt.eta > 0.0 && opt.eta <= 1.0, "DipoleOptions: eta must be in (0, 1]");
  const Quadrature q(opt.order);
  const DipoleSum sum{b.M, p, q, opt};
  return sum.cell(b.center - 0.5 * b.dims, b.center + 0.5 * b.dims, 0) / (4.0 * pi);
}

Vec3 prism_field(const MagnetBlock& b, const Vec3& p) {
  require_outside(b, p);
  const Vec3 lo = b.center - 0.5 * b.dims, hi = b.center + 0.5 * b.dims;
  Vec3 B = Vec3::Zero();
  // each magnetization component charges the two faces normal to it
  for (int n = 0; n < 3; ++n) {
    if (b.M[n] == 0.0) continue;
    const int a = (n + 1) % 3, c = (n + 2) % 3;
    for (int f = 0; f < 2; ++f) {
      const double sigma = f == 1 ? b.M[n] : -b.M[n];
      const double face = f == 1 ? hi[n] : lo[n];
      const Vec3 H = rectangle(lo[a] - p[a], hi[a] - p[a], lo[c] - p[c], hi[c] - p[c], p[n] - face);
      B[a] += sigma * H[0];
      B[c] += sigma * H[1];
      B[n] += sigma * H[2];
    }
  }
  return B / (4.0 * pi);
}

Vec3 block_field(const MagnetBlock& b, const Vec3& p, FieldMethod method) {
  return method == FieldMethod::prism ? prism_field(b, p) : block_field(b, p, DipoleOptions{});
}

MagnetAssembly MagnetAssembly::two_block(double thickness, double gap, double M) {
  require(thickness > 0.0 && gap > 0.0, "MagnetAssembly: thickness and gap must be positive");
  MagnetAssembly a;
  for (double s : {-1.0, 1.0}) {
    MagnetBlock b;
    b.dims.z() = thickness;
    b.center = Vec3(0.0, s * (0.5 * gap + 0.5 * b.dims.y()), 0.0);
    b.M = Vec3(0.0, M, 0.0);
    a.blocks.push_back(b);
  }
  // nanowire strip under the sites, 20 nm below the electron plane
  for (int i = 0; i <= 30; ++i)
    for (double y : {-50e-9, 0.0, 50e-9}) a.resonator_offsets.emplace_back(-1.5e-6 + i * 0.1e-6, y, -20e-9);
  return a;
}

void MagnetAssembly::validate() const {
  require(!blocks.empty(), "MagnetAssembly: no blocks");
  for (const auto& b : blocks) b.validate();
  require(d > 0.0, "MagnetAssembly: site separation d must be positive");
  require(step > 0.0, "MagnetAssembly: difference step must be positive");
}

Vec3 MagnetAssembly::field(const Vec3& p) const {
  Vec3 B = Vec3::Zero();
  for (const auto& b : blocks) B += method == FieldMethod::prism ? prism_field(b, p) : block_field(b, p, dipole);
  return B;
}

Vec3 MagnetAssembly::midpoint(double dz_) const { return Vec3(0.0, misalignment_y, dz_); }

std::vector<Vec3> MagnetAssembly::electron_sites() const {
  const Vec3 m = midpoint(dz), off(0.0, 0.5 * d, 0.0);
  return {m - off, m + off};
}

double MagnetAssembly::gradient(double dz_) const {
  validate();
  const Vec3 m = midpoint(dz_), h(0.0, step, 0.0);
  return (field(m + h).z() - field(m - h).z()) / (2.0 * step);
}

GradientProfile assembly_gradient_profile(const MagnetAssembly& a, const std::vector<double>& dz_list) {
  require(!dz_list.empty(), "assembly_gradient_profile: empty dz list");
  GradientProfile g;
  g.dz = dz_list;
  for (double z : dz_list) g.dBz_dy.push_back(a.gradient(z));
  for (std::size_t i = 0; i < g.dBz_dy.size(); ++i)
    if (std::abs(g.dBz_dy[i]) > g.peak) g.peak = std::abs(g.dBz_dy[i]), g.argmax = i;
  g.peak_dz = g.dz[g.argmax];
  return g;
}

double b_perp_from_gradient(double gradient, double d, double g) {
  return g * phys::muB / phys::hbar * std::abs(gradient) * d;
}

double required_external_field(double b_par_target, double By, double g) {
  require(b_par_target >= 0.0, "required_external_field: target must be >= 0");
  return b_par_target * phys::hbar / (g * phys::muB) - By;
}

CouplingReport coupling_and_offsets(const MagnetAssembly& a, double b_par_target, double g) {
  CouplingReport r;
  r.gradient = std::abs(a.gradient(a.dz));
  r.b_perp = b_perp_from_gradient(r.gradient, a.d, g);
  const auto sites = a.electron_sites();
  const Vec3 B1 = a.field(sites[0]), B2 = a.field(sites[1]);
  r.By_electron = 0.5 * (B1.y() + B2.y());
  r.zeeman_mismatch = std::abs(B1.norm() - B2.norm()) / std::max(B1.norm(), B2.norm());
  for (const auto& off : a.resonator_offsets) {
    const Vec3 B = a.field(a.midpoint(a.dz) + off);
    r.Bz_resonator = std::max(r.Bz_resonator, std::abs(B.z()));
    r.By_resonator = std::max(r.By_resonator, std::abs(B.y()));
  }
  r.B_ext = required_external_field(b_par_target, r.By_electron, g);
  return r;
}

double divergence(const MagnetAssembly& a, const Vec3& p) {
  double div = 0.0;
  for (int k = 0; k < 3; ++k) {
    Vec3 h = Vec3::Zero();
    h[k] = a.step;
    div += (a.field(p + h)[k] - a.field(p - h)[k]) / (2.0 * a.step);
  }
  return div;
}

}  // namespace febench::magnet
