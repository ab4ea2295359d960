#include "febench/rydberg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "febench/constants.hpp"
#include "febench/errors.hpp"
#include "febench/numerics.hpp"

namespace febench::rydberg {

using namespace febench::phys;

namespace {
constexpr double kCoulomb = e * e / (4.0 * pi * eps0);  // J m
constexpr double kBohr = 4.0 * pi * eps0 * hbar * hbar / (me * e * e);

// Number of eigenvalues of the tridiagonal (diag d, off-diagonal -1) below x.
int sturm_count(const std::vector<double>& d, double x) {
  int count = 0;
  double q = d[0] - x;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (q == 0.0) q = 1e-300;
    q = d[i] - x - 1.0 / q;
    if (q < 0.0) ++count;
  }
  return count;
}
}  // namespace

void SurfaceParams::validate() const {
  require(eps_s > 1.0, "SurfaceParams: dielectric constant must exceed 1");
  require(z0 >= 0.0, "SurfaceParams: z0 must be >= 0");
  require(V0 > 0.0, "SurfaceParams: barrier must be positive");
  require(E_perp >= 0.0, "SurfaceParams: E_perp must be >= 0");
  if (z0 == 0.0 && std::isfinite(V0))
    throw ValidationError("SurfaceParams: z0 = 0 with a finite barrier puts the image singularity on the grid");
}

SurfaceParams SurfaceParams::helium(double E) { return {1.056, 0.1e-9, 1.0 * eV, E}; }
SurfaceParams SurfaceParams::neon(double E) { return {1.244, 0.23e-9, 0.7 * eV, E}; }

double potential_at(const SurfaceParams& p, double z) {
  if (z <= 0.0) {
    if (!std::isfinite(p.V0)) throw ValidationError("potential_at: z <= 0 is outside a hard-wall domain");
    return p.V0;
  }
  return -kCoulomb * (p.lambda() / 4.0) / (z + p.z0) + e * z * p.E_perp;
}

Discretization discretize(const SurfaceParams& p, const Grid1D& g) {
  p.validate();
  require(g.n_points >= 200, "Grid1D: n_points must be >= 200");
  require(g.z_max > 0.0, "Grid1D: z_max must be positive");
  // <z>_2 estimate; a 3x margin keeps the documented helium default valid
  if (g.z_max < 3.0 * hydrogenic_mean_height(p.lambda(), 2))
    throw ValidationError("Grid1D: z_max too small for the second state");

  Discretization d;
  const int n = g.n_points;
  d.dz = g.z_max / double(n + 1);
  if (std::isfinite(p.V0)) {
    // whole number of cells in the barrier so that z = 0 is a grid point;
    // otherwise the sampled image potential depends on the grid phase
    const double kappa = std::sqrt(2.0 * me * p.V0) / hbar;
    const double depth = 12.0 / kappa;
    const int m = int(std::ceil(depth / ((g.z_max + depth) / double(n + 1))));
    require(m < n / 2, "Grid1D: barrier region would take most of the grid");
    d.dz = g.z_max / double(n + 1 - m);
    d.z_min = -double(m) * d.dz;
  }
  d.z.resize(n);
  const long m = std::lround(-d.z_min / d.dz);
  for (int i = 0; i < n; ++i) d.z[i] = d.dz * double(i + 1 - m);
  return d;
}

std::vector<double> potential_profile(const SurfaceParams& p, const Grid1D& g) {
  const Discretization d = discretize(p, g);
  std::vector<double> v(d.z.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = potential_at(p, d.z[i]);
  return v;
}

EnergySpectrum solve_spectrum(const SurfaceParams& p, const Grid1D& g, int n_states) {
  require(n_states >= 2, "solve_spectrum: n_states must be >= 2");
  const Discretization disc = discretize(p, g);
  const std::size_t n = disc.z.size();
  require(n_states < int(n), "solve_spectrum: too many states for grid");

  // H / E_s = tridiag(-1, 2 + V/E_s, -1) with E_s = hbar^2 / (2 m dz^2)
  const double Es = hbar * hbar / (2.0 * me * disc.dz * disc.dz);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = potential_at(p, disc.z[i]);
    // the barrier step sits on a node: use the cell average, image term integrated
    // exactly over [0, dz/2] so a tiny z0 does not put a deep spike on the grid
    if (disc.z[i] == 0.0) {
      const double half = 0.5 * disc.dz;
      const double image = -kCoulomb * (p.lambda() / 4.0) * std::log1p(half / p.z0);
      v = (p.V0 * half + image + 0.5 * e * p.E_perp * half * half) / disc.dz;
    }
    diag[i] = 2.0 + v / Es;
  }

  double lo = *std::min_element(diag.begin(), diag.end()) - 2.0;
  double hi = *std::max_element(diag.begin(), diag.end()) + 2.0;

  EnergySpectrum out;
  out.z = disc.z;
  out.dz = disc.dz;
  std::vector<double> ones(n, -1.0);
  for (int k = 0; k < n_states; ++k) {
    // bisection for the (k+1)-th smallest eigenvalue
    double a = lo, b = hi;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      const double mid = 0.5 * (a + b);
      if (sturm_count(diag, mid) > k)
        b = mid;
      else
        a = mid;
    }
    const double lam = 0.5 * (a + b);
    if (!(sturm_count(diag, b) > k && sturm_count(diag, a) <= k)) {
      std::ostringstream os;
      os << "solve_spectrum: bisection failed for state " << k + 1 << " (n_points=" << n
         << ", dz=" << disc.dz << " m)";
      throw NumericError(os.str());
    }

    // inverse iteration with a tiny shift off the eigenvalue
    const double shift = lam - 1e-12 * std::max(1.0, std::abs(lam));
    std::vector<double> sd(n), x(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) sd[i] = diag[i] - shift;
    for (int it = 0; it < 4; ++it) {
      x = num::solve_tridiagonal(ones, sd, ones, x);
      double nrm = 0.0;
      for (double v : x) nrm += v * v;
      nrm = std::sqrt(nrm);
      if (!std::isfinite(nrm) || nrm == 0.0) throw NumericError("solve_spectrum: inverse iteration diverged");
      for (double& v : x) v /= nrm;
    }
    double norm = 0.0;
    for (double v : x) norm += v * v * disc.dz;
    const double scale = 1.0 / std::sqrt(norm);
    // sign: first lobe away from the wall is positive
    std::size_t imax = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(x[i]) > 1e-3 * std::abs(x[imax]) && std::abs(x[i]) > 1e-12) {
        imax = i;
        break;
      }
    const double sgn = x[imax] < 0.0 ? -1.0 : 1.0;
    for (double& v : x) v *= scale * sgn;

    double zm = 0.0;
    for (std::size_t i = 0; i < n; ++i) zm += x[i] * x[i] * disc.z[i] * disc.dz;
    out.levels_hz.push_back(lam * Es / h);
    out.wavefunctions.push_back(std::move(x));
    out.mean_heights.push_back(zm);
  }
  out.f12 = out.levels_hz[1] - out.levels_hz[0];
  double z12 = 0.0;
  for (std::size_t i = 0; i < n; ++i) z12 += out.wavefunctions[0][i] * disc.z[i] * out.wavefunctions[1][i] * disc.dz;
  out.z12 = z12;
  return out;
}

double hydrogenic_levels(double lambda, int n) {
  require(n >= 1, "hydrogenic_levels: n must be >= 1");
  const double l4 = lambda / 4.0;
  return -rydberg_J * l4 * l4 / (double(n) * double(n)) / h;
}

double hydrogenic_mean_height(double lambda, int n) {
  require(lambda > 0.0 && n >= 1, "hydrogenic_mean_height: bad arguments");
  return 1.5 * double(n) * double(n) * 4.0 * kBohr / lambda;
}

std::vector<StarkPoint> stark_response(const SurfaceParams& p, const Grid1D& g,
                                       const std::vector<double>& E_perp_list) {
  require(!E_perp_list.empty(), "stark_response: empty field list");
  SurfaceParams p0 = p;
  p0.E_perp = 0.0;
  const EnergySpectrum s0 = solve_spectrum(p0, g, 2);
  const double slope = e * (s0.mean_heights[1] - s0.mean_heights[0]) / h;

  std::vector<StarkPoint> out;
  out.reserve(E_perp_list.size());
  for (double E : E_perp_list) {
    require(E >= 0.0, "stark_response: fields must be >= 0");
    SurfaceParams pe = p;
    pe.E_perp = E;
    const EnergySpectrum s = solve_spectrum(pe, g, 2);
    if (s.mean_heights[1] > g.z_max / 3.0)
      throw ValidationError("stark_response: <z>_2 exceeds z_max/3, enlarge the grid");
    out.push_back({E, s.f12, s0.f12 + slope * E, s.mean_heights[0], s.mean_heights[1]});
  }
  return out;
}

double rabi_from_field(double E_e, double z12) {
  require(E_e >= 0.0 && z12 > 0.0, "rabi_from_field: need E_e >= 0 and z12 > 0");
  return e * E_e * z12 / h;
}

double field_from_rabi(double rabi_hz, double z12) {
  require(rabi_hz >= 0.0 && z12 > 0.0, "field_from_rabi: need rate >= 0 and z12 > 0");
  return rabi_hz * h / (e * z12);
}

}  // namespace febench::rydberg
