#include "febench/corbino.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "febench/constants.hpp"
#include "febench/numerics.hpp"

namespace febench::corbino {

using namespace febench::phys;

int CorbinoGeometry::electron_row() const {
  const double x = electron_height / dz();
  const int i = int(std::lround(x));
  require(std::abs(x - i) < 1e-6, "CorbinoGeometry: electron plane does not lie on a grid row");
  return i;
}

void CorbinoGeometry::validate() const {
  require(D > 0.0 && outer_radius > 0.0, "CorbinoGeometry: D and outer radius must be positive");
  require(n_z >= 100 && n_r >= 250, "CorbinoGeometry: grid must be at least half the default (100 x 250)");
  require(center_electrode_radius > 0.0 && center_electrode_radius + ring_gap < middle_outer_radius &&
              middle_outer_radius + ring_gap < outer_radius,
          "CorbinoGeometry: electrode radii must nest inside the outer radius");
  require(ring_gap >= 0.0, "CorbinoGeometry: ring gap must be >= 0");
  require(electron_height > 0.0 && electron_height < D, "CorbinoGeometry: electron plane must lie between the plates");
  const int i = electron_row();
  require(i > 0 && i < n_z, "CorbinoGeometry: electron row must be interior");
}

BiasConfig BiasConfig::bottom(double V_BC, double V_BG) {
  BiasConfig b;
  b.bottom_center = V_BC;
  b.bottom_middle = b.bottom_outer = V_BG;
  return b;
}

double BiasConfig::max_abs() const {
  return std::max({std::abs(bottom_center), std::abs(bottom_middle), std::abs(bottom_outer), std::abs(top_center),
                   std::abs(top_middle), std::abs(top_outer)});
}

void BiasConfig::validate() const {
  for (double v : {bottom_center, bottom_middle, bottom_outer, top_center, top_middle, top_outer})
    require(std::isfinite(v), "BiasConfig: electrode voltages must be finite");
}

double plate_potential(const CorbinoGeometry& g, const BiasConfig& b, bool top, double r) {
  const double vc = top ? b.top_center : b.bottom_center;
  const double vm = top ? b.top_middle : b.bottom_middle;
  const double vo = top ? b.top_outer : b.bottom_outer;
  const double r1 = g.center_electrode_radius, r2 = g.middle_outer_radius, gap = g.ring_gap;
  if (r <= r1) return vc;
  if (r < r1 + gap) return vc + (vm - vc) * (r - r1) / gap;
  if (r <= r2) return vm;
  if (r < r2 + gap) return vm + (vo - vm) * (r - r2) / gap;
  return vo;
}

std::vector<double> annulus_areas(const CorbinoGeometry& geo) {
  const int n = geo.n_r;
  const double dr = geo.dr();
  std::vector<double> a(n + 1);
  a[0] = pi * 0.25 * dr * dr;
  for (int j = 1; j < n; ++j) a[j] = 2.0 * pi * j * dr * dr;
  const double rw = (n - 0.5) * dr;
  a[n] = pi * (geo.outer_radius * geo.outer_radius - rw * rw);
  return a;
}

namespace {

struct Stencil {
  std::vector<double> aE, aW;
  double aZ = 0.0;
};

Stencil make_stencil(const CorbinoGeometry& geo) {
  const int n = geo.n_r;
  const double dr = geo.dr(), dz = geo.dz();
  Stencil s;
  s.aE.assign(n + 1, 0.0);
  s.aW.assign(n + 1, 0.0);
  s.aZ = 1.0 / (dz * dz);
  s.aE[0] = 4.0 / (dr * dr);
  for (int j = 1; j < n; ++j) {
    s.aE[j] = (j + 0.5) / (j * dr * dr);
    s.aW[j] = (j - 0.5) / (j * dr * dr);
  }
  const double rw = (n - 0.5) * dr;
  s.aW[n] = 2.0 * rw / ((geo.outer_radius * geo.outer_radius - rw * rw) * dr);
  return s;
}

// source f = rho / eps0 on the full grid, row-major (z rows)
std::vector<double> make_source(const CorbinoGeometry& geo, const std::vector<double>& charge_plane) {
  const int nr = geo.n_r + 1;
  std::vector<double> f(std::size_t(geo.n_z + 1) * nr, 0.0);
  if (charge_plane.empty()) return f;
  require(int(charge_plane.size()) == nr, "solve_laplace: charge plane must have n_r + 1 entries");
  const int ie = geo.electron_row();
  for (int j = 0; j < nr; ++j) f[std::size_t(ie) * nr + j] = -e * charge_plane[j] / (geo.dz() * eps0);
  return f;
}

void set_plates(const CorbinoGeometry& geo, const BiasConfig& bias, std::vector<double>& phi) {
  const int nr = geo.n_r + 1;
  for (int j = 0; j < nr; ++j) {
    const double r = j * geo.dr();
    phi[j] = plate_potential(geo, bias, false, r);
    phi[std::size_t(geo.n_z) * nr + j] = plate_potential(geo, bias, true, r);
  }
}

double max_residual(const CorbinoGeometry& geo, const Stencil& s, const std::vector<double>& phi,
                    const std::vector<double>& f) {
  const int nr = geo.n_r + 1;
  double m = 0.0;
  for (int i = 1; i < geo.n_z; ++i) {
    const double* p = &phi[std::size_t(i) * nr];
    for (int j = 0; j < nr; ++j) {
      const double diag = s.aE[j] + s.aW[j] + 2.0 * s.aZ;
      double sum = s.aZ * (p[j + nr] + p[j - nr]) + f[std::size_t(i) * nr + j];
      if (j < nr - 1) sum += s.aE[j] * p[j + 1];
      if (j > 0) sum += s.aW[j] * p[j - 1];
      m = std::max(m, std::abs(sum / diag - p[j]));
    }
  }
  return m;
}

int solve_sor(const CorbinoGeometry& geo, const Stencil& s, std::vector<double>& phi, const std::vector<double>& f,
              double tol, int max_iter, double& residual) {
  const int nr = geo.n_r + 1;
  // radial direction is all-Neumann, so the slowest Jacobi mode is uniform in r
  const double wz = 2.0 * s.aZ, wr = 2.0 / (geo.dr() * geo.dr());
  const double rho = (wz * std::cos(pi / geo.n_z) + wr) / (wz + wr);
  const double omega = 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));
  int it = 0;
  for (; it < max_iter; ++it) {
    for (int colour = 0; colour < 2; ++colour) {
      for (int i = 1; i < geo.n_z; ++i) {
        double* p = &phi[std::size_t(i) * nr];
        const double* fi = &f[std::size_t(i) * nr];
        for (int j = (i + colour) & 1; j < nr; j += 2) {
          const double diag = s.aE[j] + s.aW[j] + 2.0 * s.aZ;
          double sum = s.aZ * (p[j + nr] + p[j - nr]) + fi[j];
          if (j < nr - 1) sum += s.aE[j] * p[j + 1];
          if (j > 0) sum += s.aW[j] * p[j - 1];
          p[j] += omega * (sum / diag - p[j]);
        }
      }
    }
    if (it % 20 == 19) {
      residual = max_residual(geo, s, phi, f);
      if (residual < tol) return it + 1;
    }
  }
  residual = max_residual(geo, s, phi, f);
  return it;
}

// Sine transform in z diagonalizes the axial operator; each mode is a radial
// tridiagonal solve.
void solve_direct(const CorbinoGeometry& geo, const Stencil& s, std::vector<double>& phi,
                  const std::vector<double>& f) {
  const int nr = geo.n_r + 1, m = geo.n_z - 1;
  std::vector<double> buf(std::size_t(nr) * m);
  for (int j = 0; j < nr; ++j)
    for (int i = 1; i <= m; ++i) {
      double v = f[std::size_t(i) * nr + j];
      if (i == 1) v += s.aZ * phi[j];
      if (i == m) v += s.aZ * phi[std::size_t(geo.n_z) * nr + j];
      buf[std::size_t(j) * m + (i - 1)] = v;
    }
  int n[1] = {m};
  fftw_r2r_kind kind[1] = {FFTW_RODFT00};
  fftw_plan plan =
      fftw_plan_many_r2r(1, n, nr, buf.data(), nullptr, 1, m, buf.data(), nullptr, 1, m, kind, FFTW_ESTIMATE);
  fftw_execute(plan);
  std::vector<double> sub(nr), diag(nr), sup(nr), rhs(nr);
  for (int k = 0; k < m; ++k) {
    const double mu = (2.0 - 2.0 * std::cos(pi * (k + 1) / geo.n_z)) * s.aZ;
    for (int j = 0; j < nr; ++j) {
      sub[j] = -s.aW[j];
      sup[j] = -s.aE[j];
      diag[j] = s.aE[j] + s.aW[j] + mu;
      rhs[j] = buf[std::size_t(j) * m + k];
    }
    const auto x = num::solve_tridiagonal(sub, diag, sup, rhs);
    for (int j = 0; j < nr; ++j) buf[std::size_t(j) * m + k] = x[j];
  }
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  const double norm = 1.0 / (2.0 * (m + 1));
  for (int j = 0; j < nr; ++j)
    for (int i = 1; i <= m; ++i) phi[std::size_t(i) * nr + j] = buf[std::size_t(j) * m + (i - 1)] * norm;
}

PotentialField run(const CorbinoGeometry& geo, const BiasConfig& bias, const std::vector<double>& f,
                   SolverMethod method, int max_iter) {
  const int nr = geo.n_r + 1, nz = geo.n_z + 1;
  const Stencil s = make_stencil(geo);
  std::vector<double> phi(std::size_t(nz) * nr, 0.0);
  set_plates(geo, bias, phi);
  PotentialField out;
  if (method == SolverMethod::direct) {
    solve_direct(geo, s, phi, f);
    out.residual = max_residual(geo, s, phi, f);
    out.iterations = 1;
  } else {
    // linear start between the plates
    for (int i = 1; i < geo.n_z; ++i)
      for (int j = 0; j < nr; ++j)
        phi[std::size_t(i) * nr + j] =
            phi[j] + (phi[std::size_t(geo.n_z) * nr + j] - phi[j]) * double(i) / geo.n_z;
    // scale for the tolerance: boundary voltage, or a direct estimate for pure charge
    double scale = bias.max_abs();
    if (scale == 0.0) {
      std::vector<double> tmp = phi;
      solve_direct(geo, s, tmp, f);
      for (double v : tmp) scale = std::max(scale, std::abs(v));
    }
    if (scale == 0.0) scale = 1.0;
    const double tol = 1e-8 * scale;
    out.iterations = solve_sor(geo, s, phi, f, tol, max_iter, out.residual);
    if (out.residual >= tol) {
      std::ostringstream os;
      os << "solve_laplace: SOR did not converge in " << max_iter << " sweeps, residual " << out.residual << " V";
      throw NumericError(os.str());
    }
  }
  out.r.resize(nr);
  out.z.resize(nz);
  for (int j = 0; j < nr; ++j) out.r[j] = j * geo.dr();
  for (int i = 0; i < nz; ++i) out.z[i] = i * geo.dz();
  out.phi.resize(nz, nr);
  for (int i = 0; i < nz; ++i)
    for (int j = 0; j < nr; ++j) out.phi(i, j) = phi[std::size_t(i) * nr + j];
  return out;
}

}  // namespace

std::vector<double> PotentialField::Ez_row(int i) const {
  const int nz = int(phi.rows());
  require(i >= 0 && i < nz, "Ez_row: row out of range");
  std::vector<double> e(phi.cols());
  for (int j = 0; j < phi.cols(); ++j) {
    if (i == 0)
      e[j] = -(phi(1, j) - phi(0, j)) / (z[1] - z[0]);
    else if (i == nz - 1)
      e[j] = -(phi(i, j) - phi(i - 1, j)) / (z[i] - z[i - 1]);
    else
      e[j] = -(phi(i + 1, j) - phi(i - 1, j)) / (z[i + 1] - z[i - 1]);
  }
  return e;
}

std::vector<double> PotentialField::Ez_above(int i) const {
  require(i >= 0 && i + 1 < phi.rows(), "Ez_above: row out of range");
  std::vector<double> e(phi.cols());
  for (int j = 0; j < phi.cols(); ++j) e[j] = -(phi(i + 1, j) - phi(i, j)) / (z[i + 1] - z[i]);
  return e;
}

PotentialField solve_laplace(const CorbinoGeometry& geo, const BiasConfig& bias,
                             const std::vector<double>& charge_plane, SolverMethod method, int max_iter) {
  geo.validate();
  bias.validate();
  return run(geo, bias, make_source(geo, charge_plane), method, max_iter);
}

PotentialField ring_green_function(const CorbinoGeometry& geo, double r_ring, double z_ring, double q,
                                   SolverMethod method) {
  geo.validate();
  const double xr = r_ring / geo.dr(), xz = z_ring / geo.dz();
  const int j = int(std::lround(xr)), i = int(std::lround(xz));
  require(std::abs(xr - j) < 1e-6 && std::abs(xz - i) < 1e-6, "ring_green_function: ring must sit on a grid node");
  require(i > 0 && i < geo.n_z && j >= 0 && j <= geo.n_r, "ring_green_function: ring outside the cell interior");
  const int nr = geo.n_r + 1;
  std::vector<double> f(std::size_t(geo.n_z + 1) * nr, 0.0);
  f[std::size_t(i) * nr + j] = q / (annulus_areas(geo)[j] * geo.dz() * eps0);
  return run(geo, BiasConfig{}, f, method, 200000);
}

double induced_plate_charge(const PotentialField& fld, const CorbinoGeometry& geo) {
  const auto a = annulus_areas(geo);
  const int n = int(fld.phi.rows()) - 1;
  const double dz = geo.dz();
  double q = 0.0;
  for (int j = 0; j <= geo.n_r; ++j) {
    const double sb = -eps0 * (fld.phi(1, j) - fld.phi(0, j)) / dz;
    const double st = eps0 * (fld.phi(n, j) - fld.phi(n - 1, j)) / dz;
    q += a[j] * (sb + st);
  }
  return q;
}

RadialProfile saturated_density(const CorbinoGeometry& geo, const BiasConfig& bias, double eta, int max_iter) {
  geo.validate();
  bias.validate();
  require(eta > 0.0 && eta <= 1.0, "saturated_density: eta must be in (0, 1]");
  const int nr = geo.n_r + 1, ie = geo.electron_row();
  const auto ext = solve_laplace(geo, bias, {}, SolverMethod::direct);
  const auto e_above = ext.Ez_above(ie);

  RadialProfile out;
  out.r = ext.r;
  out.E_z = ext.Ez_row(ie);
  out.n_s.assign(nr, 0.0);
  out.E_residual = e_above;
  // electrons are pulled down where the field above the sheet points up
  if (*std::max_element(e_above.begin(), e_above.end()) <= 0.0) {
    out.empty = true;
    return out;
  }
  double vref = std::abs(bias.bottom_center - bias.top_center);
  if (vref == 0.0) vref = bias.max_abs();
  const double tol = 1e-3 * vref / geo.D;

  const BiasConfig grounded;
  std::vector<double>& n = out.n_s;
  int it = 0;
  double res = 0.0;
  for (; it < max_iter; ++it) {
    const auto own = solve_laplace(geo, grounded, n, SolverMethod::direct).Ez_above(ie);
    res = 0.0;
    for (int j = 0; j < nr; ++j) {
      const double E = e_above[j] + own[j];
      out.E_residual[j] = E;
      res = std::max(res, n[j] > 0.0 ? std::abs(E) : std::max(E, 0.0));
    }
    if (res < tol) break;
    for (int j = 0; j < nr; ++j) n[j] = std::max(0.0, n[j] + eta * eps0 * out.E_residual[j] / e);
  }
  if (res >= tol) {
    std::ostringstream os;
    os << "saturated_density: no convergence in " << max_iter << " iterations, residual " << res << " V/m";
    throw NumericError(os.str());
  }
  out.iterations = it;
  const auto a = annulus_areas(geo);
  for (int j = 0; j < nr; ++j) {
    out.total_electrons += n[j] * a[j];
    if (n[j] > 0.0) out.confinement_radius = out.r[j];
  }
  return out;
}

DetuningDistribution detuning_distribution(const RadialProfile& profile,
                                           const std::vector<rydberg::StarkPoint>& stark, double gauss_sigma,
                                           double bin_width) {
  require(bin_width > 0.0, "detuning_distribution: bin width must be positive");
  require(gauss_sigma >= 0.0, "detuning_distribution: Gaussian width must be >= 0");
  require(stark.size() >= 3, "detuning_distribution: need at least 3 Stark points");
  require(!profile.empty && profile.total_electrons > 0.0, "detuning_distribution: empty electron profile");
  std::vector<rydberg::StarkPoint> sp = stark;
  std::sort(sp.begin(), sp.end(), [](const auto& a, const auto& b) { return a.E_perp < b.E_perp; });
  std::vector<double> ex, fy;
  for (const auto& p : sp) {
    ex.push_back(p.E_perp);
    fy.push_back(p.f12);
  }
  const num::MonotoneCubic f_of_E(ex, fy);

  // annulus areas from the (uniform) radial grid
  const std::size_t nr = profile.r.size();
  require(profile.n_s.size() == nr && profile.E_z.size() == nr, "detuning_distribution: profile arrays differ");
  const double dr = profile.r[1] - profile.r[0];
  const double R = profile.r.back();
  std::vector<double> f_j, n_j;
  for (std::size_t j = 0; j < nr; ++j) {
    if (profile.n_s[j] <= 0.0) continue;
    const double E = profile.E_z[j];
    if (E < f_of_E.xmin() || E > f_of_E.xmax()) {
      std::ostringstream os;
      os << "detuning_distribution: E_z = " << E << " V/m outside the Stark curve [" << f_of_E.xmin() << ", "
         << f_of_E.xmax() << "]";
      throw ValidationError(os.str());
    }
    double area;
    if (j == 0)
      area = pi * 0.25 * dr * dr;
    else if (j == nr - 1)
      area = pi * (R * R - (R - 0.5 * dr) * (R - 0.5 * dr));
    else
      area = 2.0 * pi * profile.r[j] * dr;
    f_j.push_back(f_of_E(E));
    n_j.push_back(profile.n_s[j] * area);
  }

  const int K = gauss_sigma > 0.0 ? int(std::ceil(6.0 * gauss_sigma / bin_width)) : 0;
  const auto [fmin, fmax] = std::minmax_element(f_j.begin(), f_j.end());
  const long k0 = std::lround(*fmin / bin_width) - K;
  const long k1 = std::lround(*fmax / bin_width) + K;
  const std::size_t nb = std::size_t(k1 - k0 + 1);
  std::vector<double> raw(nb, 0.0);
  for (std::size_t q = 0; q < f_j.size(); ++q) raw[std::size_t(std::lround(f_j[q] / bin_width) - k0)] += n_j[q];

  std::vector<double> kern(2 * K + 1);
  double ks = 0.0;
  for (int m = -K; m <= K; ++m) {
    kern[m + K] = K == 0 ? 1.0 : std::exp(-0.5 * std::pow(m * bin_width / gauss_sigma, 2));
    ks += kern[m + K];
  }
  for (double& w : kern) w /= ks;

  DetuningDistribution d;
  d.bin_width = bin_width;
  d.f_ry.resize(nb);
  d.counts.assign(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) d.f_ry[b] = double(k0 + long(b)) * bin_width;
  for (std::size_t b = 0; b < nb; ++b) {
    if (raw[b] == 0.0) continue;
    for (int m = -K; m <= K; ++m) {
      const long t = long(b) + m;
      if (t >= 0 && t < long(nb)) d.counts[std::size_t(t)] += raw[b] * kern[m + K];
    }
  }
  d.total_electrons = d.sum();
  d.f_ry_peak = d.f_ry[std::max_element(d.counts.begin(), d.counts.end()) - d.counts.begin()];
  return d;
}

}  // namespace febench::corbino
