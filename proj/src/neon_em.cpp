#include "febench/neon_em.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <array>
#include <limits>
#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_roots.h>

#include "febench/constants.hpp"

namespace febench::neon {

using phys::pi;

void SheetConductivityParams::validate() const {
  require(n_e >= 0.0, "SheetConductivityParams: n_e must be >= 0");
  require(tau > 0.0, "SheetConductivityParams: tau must be positive");
  require(omega_a >= 0.0, "SheetConductivityParams: omega_a must be >= 0");
  require(layer_height >= 0.0 && layer_thickness > 0.0, "SheetConductivityParams: bad layer geometry");
}

TrapEnsemble::TrapEnsemble() : omega_a_max(2.0 * pi * 200e9) {}

void TrapEnsemble::validate() const {
  require(omega_a_max > 0.0, "TrapEnsemble: omega_a_max must be positive");
  require(temperature > 0.0, "TrapEnsemble: temperature must be positive");
  require(points >= 2, "TrapEnsemble: need at least 2 points");
}

std::vector<double> TrapEnsemble::nodes() const {
  std::vector<double> w(points);
  for (int k = 0; k < points; ++k) w[k] = omega_a_max * k / (points - 1);
  return w;
}

std::vector<double> TrapEnsemble::weights() const {
  validate();
  const auto x = nodes();
  // relative to the top node so T -> 0 does not overflow
  const double beta = std::isinf(temperature) ? 0.0 : phys::hbar / (phys::kB * temperature);
  std::vector<double> w(points);
  double sum = 0.0;
  for (int k = 0; k < points; ++k) {
    const double trap = (k == 0 || k == points - 1) ? 0.5 : 1.0;
    w[k] = trap * std::exp(beta * (x[k] - omega_a_max));
    sum += w[k];
  }
  for (double& v : w) v /= sum;
  return w;
}

namespace {

cplx lorentz(double sigma0, double tau, double omega, double omega_a) {
  return sigma0 / cplx(1.0, (omega - omega_a * omega_a / omega) * tau);
}

}  // namespace

cplx sheet_conductivity(const SheetConductivityParams& p, double omega, ConductivityModel model,
                        const TrapEnsemble& ens) {
  p.validate();
  require(omega > 0.0, "sheet_conductivity: omega must be positive");
  const double sigma0 = phys::e * phys::e * p.n_e * p.tau / phys::me;
  switch (model) {
    case ConductivityModel::drude:
      return lorentz(sigma0, p.tau, omega, 0.0);
    case ConductivityModel::lorentz:
      return lorentz(sigma0, p.tau, omega, p.omega_a);
    case ConductivityModel::thermal: {
      const auto x = ens.nodes();
      const auto w = ens.weights();
      cplx s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * lorentz(sigma0, p.tau, omega, x[k]);
      return s;
    }
  }
  return 0.0;
}

void FilmParams::validate() const {
  require(penetration_depth > 0.0 && thickness > 0.0, "FilmParams: lambda and D must be positive");
}

cplx film_conductivity(const FilmParams& f, double omega) {
  f.validate();
  require(omega > 0.0, "film_conductivity: omega must be positive");
  return 1.0 / cplx(0.0, phys::mu0 * omega * f.penetration_depth * f.penetration_depth);
}

double NanowireResonator::eV0_over_h() const { return phys::e * V0 / phys::h; }

NanowireResonator film_properties(const FilmParams& f, double length, double width, double f_r, double gap) {
  f.validate();
  require(length > 0.0 && width > 0.0 && f_r > 0.0 && gap >= 0.0, "film_properties: geometry must be positive");
  NanowireResonator r;
  r.length = length;
  r.width = width;
  r.gap = gap;
  r.f_r = f_r;
  r.L_square = phys::mu0 * f.penetration_depth * f.penetration_depth / f.thickness;
  r.L_kin = r.L_square * length / width;
  r.Z0 = 2.0 * f_r * r.L_kin;
  const double w = 2.0 * pi * f_r;
  r.V0 = (1.0 / std::sqrt(2.0)) * (2.0 * r.L_kin / pi) * std::sqrt(2.0 * phys::hbar * w / r.L_kin) * w;
  return r;
}

// ---- cross-section ----

CrossSection CrossSection::preset(const std::string& name) {
  CrossSection cs;
  if (name == "resonator1") {
    cs.width = cs.gap = 100e-9;
    cs.f_r = 4.81e9;
  } else if (name == "resonator2") {
    cs.width = cs.gap = 150e-9;
    cs.f_r = 5.91e9;
  } else if (name == "resonator3") {
    cs.width = cs.gap = 300e-9;
    cs.f_r = 6.98e9;
  } else {
    throw ValidationError("CrossSection: unknown preset '" + name + "'");
  }
  return cs;
}

CrossSection CrossSection::parallel_plate(double width, double substrate_height, double plate_height) {
  CrossSection cs;
  cs.kind = CrossSectionKind::parallel_plate;
  cs.width = width;
  cs.substrate_height = substrate_height;
  cs.plate_height = plate_height;
  cs.box_half_width = width / 2;
  return cs;
}

double CrossSection::metal_top() const { return trench_depth + metal_thickness; }

double CrossSection::smallest_feature() const {
  if (kind == CrossSectionKind::parallel_plate)
    return std::min({width / 2, substrate_height, plate_height - substrate_height});
  double m = std::min({width / 2, gap, metal_thickness});
  if (trench_depth > 0.0) m = std::min(m, trench_depth);
  return m;
}

void CrossSection::validate() const {
  require(eps_substrate >= 1.0 && eps_neon >= 1.0, "CrossSection: permittivities must be >= 1");
  require(neon_thickness >= 0.0 && trench_depth >= 0.0, "CrossSection: layer thicknesses must be >= 0");
  require(width > 0.0 && gap > 0.0 && metal_thickness > 0.0, "CrossSection: strip geometry must be positive");
  require(f_r > 0.0 && length > 0.0, "CrossSection: f_r and length must be positive");
  require(h_min > 0.0 && growth > 1.0 && growth <= 2.0 && h_max >= h_min, "CrossSection: bad grid spec");
  if (kind == CrossSectionKind::parallel_plate) {
    require(substrate_height > 0.0 && plate_height > substrate_height + neon_thickness,
            "CrossSection: plate must sit above the dielectric stack");
  } else {
    require(box_half_width > width / 2 + gap + 4 * h_min, "CrossSection: box narrower than the strip and gaps");
    require(box_height > std::max(metal_top(), neon_thickness) && box_depth > 0.0,
            "CrossSection: box must contain the stack");
  }
  require(smallest_feature() >= 8.0 * h_min * (1.0 - 1e-9),
          "CrossSection: grid must resolve the smallest feature with >= 8 cells (reduce h_min)");
}

CrossSection CrossSection::refined(int factor) const {
  require(factor >= 1, "CrossSection::refined: factor must be >= 1");
  CrossSection cs = *this;
  cs.h_min /= factor;
  cs.h_max /= factor;
  cs.growth = std::pow(growth, 1.0 / factor);
  return cs;
}

namespace {

// Lines through every key coordinate, graded geometrically away from each one.
std::vector<double> graded_lines(std::vector<double> keys, double hmin, double r, double hmax) {
  std::sort(keys.begin(), keys.end());
  std::vector<double> k{keys[0]};
  for (double x : keys)
    if (x - k.back() > 1e-13) k.push_back(x);
  std::vector<double> out{k[0]};
  for (std::size_t s = 0; s + 1 < k.size(); ++s) {
    const double a = k[s], L = k[s + 1] - a;
    std::vector<double> steps;
    double h = hmin, acc = 0.0;
    while (L - 2.0 * acc >= 3.0 * h) {
      steps.push_back(h);
      acc += h;
      h = std::min(h * r, hmax);
    }
    const double mid = L - 2.0 * acc;
    const int n = std::max(1, int(std::ceil(mid / h - 1e-9)));
    double x = a;
    for (double st : steps) out.push_back(x += st);
    for (int q = 1; q <= n; ++q) out.push_back(a + acc + mid * q / n);
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
      x = out.back() + *it;
      out.push_back(x);
    }
    out.back() = k[s + 1];
  }
  return out;
}

// Finite-volume system on the graded grid. Base couplings are real; the electron layer
// adds -i sigma / omega * g on each face of a layer cell (g = (hz/2) / (hy dz)).
struct Assembly {
  std::vector<double> y, z;
  int ny = 0, nz = 0;
  std::vector<double> fixed;  // NaN marks a free node
  struct Edge {
    std::size_t a, b;
    double c;
  };
  std::vector<Edge> edges;
  std::vector<Edge> faces;
  bool parallel_plate = false;
};

struct Layer {
  double z_lo = 0.0, z_hi = 0.0;
};

Layer layer_geom(const CrossSection& cs, double height, double thickness) {
  require(height >= 0.0 && thickness > 0.0, "electron sheet: bad layer geometry");
  const double surface =
      cs.kind == CrossSectionKind::parallel_plate ? cs.substrate_height + cs.neon_thickness : cs.neon_thickness;
  require(height >= thickness / 2, "electron sheet: layer must sit above the neon surface");
  return {surface + height - thickness / 2, surface + height + thickness / 2};
}

Assembly assemble(const CrossSection& cs, const std::optional<Layer>& layer) {
  cs.validate();
  const bool pp = cs.kind == CrossSectionKind::parallel_plate;
  const double tol = 1e-13;
  const double surface = pp ? cs.substrate_height + cs.neon_thickness : cs.neon_thickness;

  std::vector<double> ky, kz;
  if (pp) {
    ky = {0.0, cs.width / 2};
    kz = {0.0, cs.substrate_height, surface, cs.plate_height};
  } else {
    ky = {0.0, cs.width / 2, cs.width / 2 + cs.gap, cs.box_half_width};
    kz = {-cs.box_depth, 0.0, cs.trench_depth, cs.metal_top(), cs.box_height};
    if (cs.neon_thickness > 0.0) kz.push_back(cs.neon_thickness);
  }
  if (layer) {
    const double top = pp ? cs.plate_height : cs.box_height;
    require(layer->z_hi < top - cs.h_min, "electron sheet lies outside the solved domain");
    kz.push_back(layer->z_lo);
    kz.push_back(layer->z_hi);
  }
  Assembly as;
  as.parallel_plate = pp;
  as.y = graded_lines(ky, cs.h_min, cs.growth, cs.h_max);
  as.z = graded_lines(kz, cs.h_min, cs.growth, cs.h_max);
  const auto& y = as.y;
  const auto& z = as.z;
  const int ny = as.ny = int(y.size()), nz = as.nz = int(z.size());

  const double y_strip = cs.width / 2, y_ground = cs.width / 2 + cs.gap;
  auto in_metal_z = [&](double zz) { return zz >= cs.trench_depth - tol && zz <= cs.metal_top() + tol; };

  const double nan = std::numeric_limits<double>::quiet_NaN();
  as.fixed.assign(std::size_t(ny) * nz, nan);
  auto id = [&](int i, int j) { return std::size_t(j) * ny + i; };
  for (int j = 0; j < nz; ++j)
    for (int i = 0; i < ny; ++i) {
      double v = nan;
      if (pp) {
        if (j == 0) v = 0.0;
        if (j == nz - 1) v = 1.0;
      } else {
        if (j == 0 || j == nz - 1) v = 0.0;
        else if (in_metal_z(z[j]) && y[i] <= y_strip + tol) v = 1.0;
        else if (in_metal_z(z[j]) && y[i] >= y_ground - tol) v = 0.0;
      }
      as.fixed[id(i, j)] = v;
    }

  // relative permittivity per cell
  std::vector<double> er(std::size_t(ny - 1) * (nz - 1));
  std::vector<char> in_layer(er.size(), 0);
  auto cid = [&](int i, int j) { return std::size_t(j) * (ny - 1) + i; };
  for (int j = 0; j + 1 < nz; ++j)
    for (int i = 0; i + 1 < ny; ++i) {
      const double yc = 0.5 * (y[i] + y[i + 1]), zc = 0.5 * (z[j] + z[j + 1]);
      double e = 1.0;
      bool vac = false;
      if (pp) {
        if (zc < cs.substrate_height) e = cs.eps_substrate;
        else if (zc < surface) e = cs.eps_neon;
        else vac = true;
      } else {
        const bool under_metal = yc < y_strip || yc > y_ground;
        if (zc < 0.0) e = cs.eps_substrate;
        else if (under_metal && zc < cs.trench_depth) e = cs.eps_substrate;
        else if (under_metal && zc < cs.metal_top()) e = 1.0;  // conductor interior
        else if (zc < cs.neon_thickness) e = cs.eps_neon;
        else vac = true;
      }
      er[cid(i, j)] = e;
      if (layer && vac && zc > layer->z_lo && zc < layer->z_hi) in_layer[cid(i, j)] = 1;
    }

  const double e0 = phys::eps0;
  as.edges.reserve(2 * as.fixed.size());
  for (int j = 0; j < nz; ++j)
    for (int i = 0; i < ny; ++i) {
      if (i + 1 < ny) {
        const double hy = y[i + 1] - y[i];
        double c = 0.0;
        if (j > 0) c += er[cid(i, j - 1)] * (z[j] - z[j - 1]) / 2.0;
        if (j + 1 < nz) c += er[cid(i, j)] * (z[j + 1] - z[j]) / 2.0;
        as.edges.push_back({id(i, j), id(i + 1, j), e0 * c / hy});
      }
      if (j + 1 < nz) {
        const double hz = z[j + 1] - z[j];
        double c = 0.0;
        if (i > 0) c += er[cid(i - 1, j)] * (y[i] - y[i - 1]) / 2.0;
        if (i + 1 < ny) c += er[cid(i, j)] * (y[i + 1] - y[i]) / 2.0;
        as.edges.push_back({id(i, j), id(i, j + 1), e0 * c / hz});
      }
    }
  if (layer) {
    const double dz = layer->z_hi - layer->z_lo;
    for (int j = 0; j + 1 < nz; ++j)
      for (int i = 0; i + 1 < ny; ++i) {
        if (!in_layer[cid(i, j)]) continue;
        const double g = (z[j + 1] - z[j]) / 2.0 / (y[i + 1] - y[i]) / dz;
        as.faces.push_back({id(i, j), id(i + 1, j), g});
        as.faces.push_back({id(i, j + 1), id(i + 1, j + 1), g});
      }
  }
  return as;
}

struct Solved {
  cplx C;
  double residual = 0.0;
  std::size_t unknowns = 0;
  double S = 0.0;  // 2 sum g (dphi)^2 over layer faces, full width
};

// Direct sparse solve with layer faces weighted by d = -i sigma / omega.
Solved solve_direct(const Assembly& as, cplx d) {
  std::vector<long> unk(as.fixed.size(), -1);
  long n = 0;
  for (std::size_t k = 0; k < as.fixed.size(); ++k)
    if (std::isnan(as.fixed[k])) unk[k] = n++;
  using SpMat = Eigen::SparseMatrix<cplx>;
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(4 * (as.edges.size() + as.faces.size()));
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  auto add = [&](std::size_t a, std::size_t b, cplx c) {
    const long ua = unk[a], ub = unk[b];
    if (ua >= 0) trip.emplace_back(ua, ua, c);
    if (ub >= 0) trip.emplace_back(ub, ub, c);
    if (ua >= 0 && ub >= 0) {
      trip.emplace_back(ua, ub, -c);
      trip.emplace_back(ub, ua, -c);
    } else if (ua >= 0) {
      rhs[ua] += c * as.fixed[b];
    } else if (ub >= 0) {
      rhs[ub] += c * as.fixed[a];
    }
  };
  for (const auto& e : as.edges) add(e.a, e.b, e.c);
  if (d != cplx(0.0))
    for (const auto& f : as.faces) add(f.a, f.b, d * f.c);
  SpMat A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) throw NumericError("cross_section_capacitance: factorization failed");
  const Eigen::VectorXcd x = lu.solve(rhs);
  Solved out;
  const double bn = rhs.norm();
  out.residual = bn > 0.0 ? (A * x - rhs).norm() / bn : 0.0;
  if (!(out.residual <= 1e-8)) throw NumericError("cross_section_capacitance: residual above 1e-8");

  auto phi = [&](std::size_t k) { return unk[k] >= 0 ? x[unk[k]] : cplx(as.fixed[k]); };
  // charge on the strip = discrete field energy at unit potential (bilinear, no conjugate)
  cplx Q = 0.0;
  for (const auto& e : as.edges) Q += e.c * std::pow(phi(e.a) - phi(e.b), 2);
  double S = 0.0;
  for (const auto& f : as.faces) {
    const cplx dp = phi(f.a) - phi(f.b);
    Q += d * f.c * dp * dp;
    S += f.c * std::norm(dp);
  }
  // the mirror half
  out.C = 2.0 * Q;
  out.S = 2.0 * S;
  out.unknowns = std::size_t(n);
  return out;
}

}  // namespace

CapacitanceResult cross_section_capacitance(const CrossSection& cs, const std::optional<ElectronSheet>& sheet) {
  std::optional<Layer> layer;
  cplx d = 0.0;
  if (sheet) {
    layer = layer_geom(cs, sheet->height, sheet->thickness);
    d = cplx(0.0, -1.0) * sheet->sigma / (2.0 * pi * cs.f_r);
  }
  const auto as = assemble(cs, layer);
  const auto s = solve_direct(as, d);
  CapacitanceResult r;
  r.C_l = s.C;
  r.residual = s.residual;
  r.unknowns = s.unknowns;
  r.n_y = std::size_t(as.ny);
  r.n_z = std::size_t(as.nz);
  return r;
}

double frequency_shift(double C_without, double C_with) {
  require(C_without > 0.0 && C_with > 0.0, "frequency_shift: capacitances must be positive");
  return std::sqrt(C_without / C_with) - 1.0;
}

namespace {

double real_capacitance(const CrossSection& cs) { return solve_direct(assemble(cs, {}), 0.0).C.real(); }

}  // namespace

double neon_frequency_shift(const CrossSection& cs) {
  if (cs.neon_thickness == 0.0) return 0.0;
  CrossSection bare = cs;
  bare.neon_thickness = 0.0;
  return frequency_shift(real_capacitance(bare), real_capacitance(cs));
}

double thickness_from_shift(CrossSection cs, double shift, double t_max, double tol) {
  require(t_max > 0.0 && tol > 0.0, "thickness_from_shift: bad search range");
  if (shift == 0.0) return 0.0;
  CrossSection bare = cs;
  bare.neon_thickness = 0.0;
  const double C0 = real_capacitance(bare);
  auto f = [&](double t) {
    cs.neon_thickness = t;
    return frequency_shift(C0, real_capacitance(cs));
  };
  const double f_max = f(t_max);
  if (shift > 0.0 || shift < f_max)
    throw ValidationError("thickness_from_shift: shift outside the thickness curve range [" + std::to_string(f_max) +
                          ", 0]");
  double lo = 0.0, hi = t_max;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > shift ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

void finish(LoadingResult& r, cplx C, double length) {
  require(C.real() > 0.0, "electron_loading_response: loaded line has no positive capacitance");
  r.shift = frequency_shift(r.C_l, C.real());
  // gamma l = i pi sqrt(C / Re C) on resonance; Q_e = pi / (2 alpha l)
  const cplx s = std::sqrt(C / C.real());
  r.inv_Q_e = -2.0 * s.imag();
  r.alpha = pi * r.inv_Q_e / (2.0 * length);
}

void perturbative(LoadingResult& r, cplx sigma, double S, double omega, double length) {
  r.Y_e = sigma * S;
  r.shift = -r.Y_e.imag() / (2.0 * omega * r.C_l);
  r.inv_Q_e = r.Y_e.real() / (omega * r.C_l);
  r.alpha = pi * r.inv_Q_e / (2.0 * length);
}

void check_participation(LoadingResult& r, double S, bool any_face, const CrossSection& cs) {
  const double scale = cs.kind == CrossSectionKind::parallel_plate ? cs.width : cs.width + 2.0 * cs.gap;
  if (!any_face || S * scale < 1e-10)
    r.warnings.push_back("electron_loading_response: degenerate geometry, the sheet sees no tangential field");
}

}  // namespace

LoadingResult electron_loading_response(const CrossSection& cs, cplx sigma, double omega, LoadingMode mode,
                                        double layer_height, double layer_thickness) {
  require(omega > 0.0, "electron_loading_response: omega must be positive");
  require(std::isfinite(sigma.real()) && std::isfinite(sigma.imag()), "electron_loading_response: bad sigma");
  const auto as = assemble(cs, layer_geom(cs, layer_height, layer_thickness));
  const auto base = solve_direct(as, 0.0);
  LoadingResult r;
  r.C_l = base.C.real();
  check_participation(r, base.S, !as.faces.empty(), cs);
  if (sigma == cplx(0.0)) return r;
  if (mode == LoadingMode::perturbative)
    perturbative(r, sigma, base.S, omega, cs.length);
  else
    finish(r, solve_direct(as, cplx(0.0, -1.0) * sigma / omega).C, cs.length);
  return r;
}

// Schur complement of the neon-only system onto the free nodes touched by the layer.
// Each new sigma then costs one small dense solve.
// With Z = L L^T and the layer faces as d F (d = -i sigma / omega), the reduced system
// Z + d F is diagonal in the eigenbasis of L^-1 F L^-T, so each sigma costs O(n).
struct LoadedLine::Impl {
  CrossSection cs;
  double omega = 0.0, height = 0.0, thickness = 0.0;
  Eigen::VectorXd lambda, p, q;  // eigenvalues; g and h in the eigenbasis
  double E_const = 0.0;          // v^T K_dd v - b_I^T A_II^-1 b_I
  double e_faces = 0.0;          // layer-face energy of the fixed nodes, per unit d
  double C0 = 0.0, S = 0.0;
  bool any_face = false;
};

LoadedLine::LoadedLine(const CrossSection& cs, double layer_height, double layer_thickness)
{
  auto mp = std::make_shared<Impl>();
  auto& m = *mp;
  m.cs = cs;
  m.omega = 2.0 * pi * cs.f_r;
  m.height = layer_height;
  m.thickness = layer_thickness;
  const auto as = assemble(cs, layer_geom(cs, layer_height, layer_thickness));
  m.any_face = !as.faces.empty();

  const std::size_t N = as.fixed.size();
  std::vector<long> red(N, -1), inner(N, -1);
  long nS = 0, nI = 0;
  for (const auto& f : as.faces)
    for (std::size_t k : {f.a, f.b})
      if (std::isnan(as.fixed[k]) && red[k] < 0) red[k] = nS++;
  for (std::size_t k = 0; k < N; ++k)
    if (std::isnan(as.fixed[k]) && red[k] < 0) inner[k] = nI++;

  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> tII, tIS;
  Eigen::MatrixXd ASS = Eigen::MatrixXd::Zero(nS, nS);
  Eigen::VectorXd bI = Eigen::VectorXd::Zero(nI), bS = Eigen::VectorXd::Zero(nS);
  double E_dd = 0.0;
  for (const auto& e : as.edges) {
    const bool fa = !std::isnan(as.fixed[e.a]), fb = !std::isnan(as.fixed[e.b]);
    if (fa && fb) {
      E_dd += e.c * std::pow(as.fixed[e.a] - as.fixed[e.b], 2);
      continue;
    }
    auto diag = [&](std::size_t k) {
      if (inner[k] >= 0) tII.emplace_back(inner[k], inner[k], e.c);
      else ASS(red[k], red[k]) += e.c;
    };
    auto off = [&](std::size_t p, std::size_t q) {
      if (inner[p] >= 0 && inner[q] >= 0) tII.emplace_back(inner[p], inner[q], -e.c);
      else if (red[p] >= 0 && red[q] >= 0) ASS(red[p], red[q]) -= e.c;
      else if (inner[p] >= 0) tIS.emplace_back(inner[p], red[q], -e.c);
    };
    auto rhs = [&](std::size_t k, double v) {
      if (inner[k] >= 0) bI[inner[k]] += e.c * v;
      else bS[red[k]] += e.c * v;
    };
    if (!fa) diag(e.a);
    if (!fb) diag(e.b);
    if (!fa && !fb) {
      off(e.a, e.b);
      off(e.b, e.a);
    } else if (!fa) {
      rhs(e.a, as.fixed[e.b]);
      E_dd += e.c * as.fixed[e.b] * as.fixed[e.b];
    } else {
      rhs(e.b, as.fixed[e.a]);
      E_dd += e.c * as.fixed[e.a] * as.fixed[e.a];
    }
  }
  SpMat AII(nI, nI), AIS(nI, nS);
  AII.setFromTriplets(tII.begin(), tII.end());
  AIS.setFromTriplets(tIS.begin(), tIS.end());
  AII.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(AII);
  lu.factorize(AII);
  if (lu.info() != Eigen::Success) throw NumericError("LoadedLine: factorization failed");
  const Eigen::VectorXd u = lu.solve(bI);
  Eigen::MatrixXd Z = ASS;
  const Eigen::VectorXd g = bS - AIS.transpose() * u;
  // Z -= A_SI A_II^-1 A_IS, in column blocks to bound memory
  const long block = 64;
  for (long c0 = 0; c0 < nS; c0 += block) {
    const long nc = std::min(block, nS - c0);
    const Eigen::MatrixXd cols = Eigen::MatrixXd(AIS.middleCols(c0, nc));
    const Eigen::MatrixXd W = lu.solve(cols);
    Z.middleCols(c0, nc).noalias() -= AIS.transpose() * W;
  }
  m.E_const = E_dd - bI.dot(u);

  // face Laplacian F, its fixed-node load h and constant e_faces
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(nS, nS);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(nS);
  for (const auto& f : as.faces) {
    const long a = red[f.a], b = red[f.b];
    const double va = a < 0 ? as.fixed[f.a] : 0.0, vb = b < 0 ? as.fixed[f.b] : 0.0;
    if (a >= 0) F(a, a) += f.c;
    if (b >= 0) F(b, b) += f.c;
    if (a >= 0 && b >= 0) {
      F(a, b) -= f.c;
      F(b, a) -= f.c;
    } else if (a >= 0) {
      h[a] += f.c * vb;
      m.e_faces += f.c * vb * vb;
    } else if (b >= 0) {
      h[b] += f.c * va;
      m.e_faces += f.c * va * va;
    } else {
      m.e_faces += f.c * (va - vb) * (va - vb);
    }
  }
  if (nS > 0) {
    const Eigen::LLT<Eigen::MatrixXd> llt(Z);
    if (llt.info() != Eigen::Success) throw NumericError("LoadedLine: reduced system is not positive definite");
    const auto L = llt.matrixL();
    Eigen::MatrixXd B = L.solve(F);
    B = L.solve(B.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (B + B.transpose()));
    if (es.info() != Eigen::Success) throw NumericError("LoadedLine: eigen decomposition failed");
    m.lambda = es.eigenvalues();
    m.p = es.eigenvectors().transpose() * L.solve(g);
    m.q = es.eigenvectors().transpose() * L.solve(h);
    const Eigen::VectorXd xS = llt.solve(g);
    m.C0 = 2.0 * (m.E_const - g.dot(xS));
    // participation: x^T F x plus the fixed-node terms, at sigma = 0
    m.S = 2.0 * (xS.dot(F * xS) - 2.0 * h.dot(xS) + m.e_faces);
  } else {
    m.C0 = 2.0 * m.E_const;
    m.S = 2.0 * m.e_faces;
  }
  impl_ = mp;
}

double LoadedLine::C0() const { return impl_->C0; }
double LoadedLine::participation() const { return impl_->S; }
double LoadedLine::omega() const { return impl_->omega; }

cplx LoadedLine::C(cplx sigma) const {
  const auto& m = *impl_;
  const cplx d = cplx(0.0, -1.0) * sigma / m.omega;
  // E = v^T K_dd v - b^T x with b = g + d h
  cplx btx = 0.0;
  for (long k = 0; k < m.lambda.size(); ++k) {
    const cplx r = m.p[k] + d * m.q[k];
    btx += r * r / (1.0 + d * m.lambda[k]);
  }
  return 2.0 * (m.E_const + d * m.e_faces - btx);
}

LoadingResult LoadedLine::response(cplx sigma, LoadingMode mode) const {
  const auto& m = *impl_;
  LoadingResult r;
  r.C_l = m.C0;
  check_participation(r, m.S, m.any_face, m.cs);
  if (sigma == cplx(0.0)) return r;
  if (mode == LoadingMode::perturbative)
    perturbative(r, sigma, m.S, m.omega, m.cs.length);
  else
    finish(r, C(sigma), m.cs.length);
  return r;
}

LoadingResult LoadedLine::response(const SheetConductivityParams& p, ConductivityModel model,
                                   const TrapEnsemble& ens, ThermalAverage avg) const {
  const auto& m = *impl_;
  require(std::abs(p.layer_height - m.height) < 1e-15 && std::abs(p.layer_thickness - m.thickness) < 1e-15,
          "LoadedLine::response: layer geometry differs from the one the line was built for");
  if (model != ConductivityModel::thermal || avg == ThermalAverage::conductivity)
    return response(sheet_conductivity(p, m.omega, model, ens));
  // average the line response over the trap ensemble
  const auto x = ens.nodes();
  const auto w = ens.weights();
  LoadingResult out;
  out.C_l = m.C0;
  check_participation(out, m.S, m.any_face, m.cs);
  SheetConductivityParams q = p;
  for (std::size_t k = 0; k < x.size(); ++k) {
    q.omega_a = x[k];
    const auto r = response(sheet_conductivity(q, m.omega, ConductivityModel::lorentz));
    out.shift += w[k] * r.shift;
    out.inv_Q_e += w[k] * r.inv_Q_e;
  }
  out.alpha = pi * out.inv_Q_e / (2.0 * m.cs.length);
  return out;
}

double density_for_shift(const LoadedLine& line, SheetConductivityParams p, ConductivityModel model,
                         double target_shift, const TrapEnsemble& ens, ThermalAverage avg, double n_lo,
                         double n_hi) {
  require(target_shift < 0.0, "density_for_shift: target shift must be negative");
  require(n_lo > 0.0 && n_hi > n_lo, "density_for_shift: bad density bracket");
  struct Ctx {
    const LoadedLine* line;
    SheetConductivityParams p;
    ConductivityModel model;
    const TrapEnsemble* ens;
    ThermalAverage avg;
    double target;
  } ctx{&line, p, model, &ens, avg, target_shift};
  gsl_function F;
  F.function = [](double logn, void* v) {
    auto* c = static_cast<Ctx*>(v);
    c->p.n_e = std::exp(logn);
    return c->line->response(c->p, c->model, *c->ens, c->avg).shift - c->target;
  };
  F.params = &ctx;
  const double a = std::log(n_lo), b = std::log(n_hi);
  if (!(F.function(a, &ctx) > 0.0 && F.function(b, &ctx) < 0.0))
    throw ValidationError("density_for_shift: target shift not bracketed by the density range");
  gsl_root_fsolver* s = gsl_root_fsolver_alloc(gsl_root_fsolver_brent);
  gsl_root_fsolver_set(s, &F, a, b);
  int status = GSL_CONTINUE;
  for (int it = 0; it < 100 && status == GSL_CONTINUE; ++it) {
    gsl_root_fsolver_iterate(s);
    status = gsl_root_test_interval(gsl_root_fsolver_x_lower(s), gsl_root_fsolver_x_upper(s), 1e-7, 0.0);
  }
  const double root = gsl_root_fsolver_root(s);
  gsl_root_fsolver_free(s);
  if (status != GSL_SUCCESS) throw NumericError("density_for_shift: root search did not converge");
  return std::exp(root);
}

}  // namespace febench::neon
