#include "febench/qubit_core.hpp"

#include <cmath>
#include <random>

#include "febench/errors.hpp"

namespace febench::qubit {

namespace {
constexpr double kTol = 1e-12;
}

DensityMatrix::DensityMatrix(const Mat2& rho) : rho_(rho) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kTol)
    throw ValidationError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > kTol) throw ValidationError("density matrix trace != 1");
  Eigen::SelfAdjointEigenSolver<Mat2> es(rho);
  if (es.eigenvalues().minCoeff() < -kTol) throw ValidationError("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::pure(cplx a0, cplx a1) {
  Eigen::Vector2cd v(a0, a1);
  const double n = v.norm();
  require(n > 0.0, "pure state needs a nonzero vector");
  v /= n;
  return DensityMatrix(v * v.adjoint());
}

Mat2 pauli_x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}

Mat2 pauli_y() {
  Mat2 m;
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

Mat2 pauli_z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}

Bloch bloch_map(const DensityMatrix& rho) {
  const Mat2& r = rho.matrix();
  return {(r * pauli_x()).trace().real(), (r * pauli_y()).trace().real(), (r * pauli_z()).trace().real()};
}

DensityMatrix density_from_bloch(const Bloch& r) {
  const double len = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  if (len > 1.0 + 1e-9) throw ValidationError("Bloch vector longer than 1");
  Mat2 rho = 0.5 * (Mat2::Identity() + r[0] * pauli_x() + r[1] * pauli_y() + r[2] * pauli_z());
  // tiny overshoot past the sphere is clamped by the PSD check tolerance
  return DensityMatrix(rho);
}

Mat2 psd_sqrt(const Mat2& m) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(m);
  Eigen::Vector2d ev = es.eigenvalues();
  for (int i = 0; i < 2; ++i) ev[i] = ev[i] > 0.0 ? std::sqrt(ev[i]) : 0.0;
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const Mat2 s = psd_sqrt(rho.matrix());
  Mat2 inner = s * sigma.matrix() * s;
  inner = 0.5 * (inner + inner.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat2> es(inner);
  double f = 0.0;
  for (int i = 0; i < 2; ++i) f += es.eigenvalues()[i] > 0.0 ? std::sqrt(es.eigenvalues()[i]) : 0.0;
  return std::clamp(f, 0.0, 1.0);
}

FidelityEstimate average_gate_fidelity(const Channel& channel, const Mat2& ideal, std::size_t samples,
                                       std::uint64_t seed) {
  if (samples == 0) throw ValidationError("average_gate_fidelity: samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    Eigen::Vector2cd psi(cplx(gauss(rng), gauss(rng)), cplx(gauss(rng), gauss(rng)));
    psi.normalize();
    const Mat2 out = channel(psi * psi.adjoint());
    const Eigen::Vector2cd target = ideal * psi;
    const double f = (target.adjoint() * out * target)(0, 0).real();
    sum += f;
    sum2 += f * f;
  }
  const double n = double(samples);
  FidelityEstimate est;
  est.mean = sum / n;
  const double var = samples > 1 ? std::max(0.0, (sum2 - n * est.mean * est.mean) / (n - 1.0)) : 0.0;
  est.stderr_ = std::sqrt(var / n);
  return est;
}

Mat4 exchange_evolution(double g, double t) {
  require(g > 0.0 && t >= 0.0, "exchange_evolution: need g > 0 and t >= 0");
  const double c = std::cos(g * t), s = std::sin(g * t);
  Mat4 u = Mat4::Zero();
  u(0, 0) = 1.0;
  u(1, 1) = c;
  u(1, 2) = cplx(0.0, -s);
  u(2, 1) = cplx(0.0, -s);
  u(2, 2) = c;
  u(3, 3) = 1.0;
  return u;
}

Mat4 iswap() {
  Mat4 u = Mat4::Zero();
  u(0, 0) = 1.0;
  u(1, 2) = cplx(0.0, 1.0);
  u(2, 1) = cplx(0.0, 1.0);
  u(3, 3) = 1.0;
  return u;
}

bool is_unitary(const Mat4& u, double tol) {
  return (u.adjoint() * u - Mat4::Identity()).cwiseAbs().maxCoeff() <= tol;
}

bool JcParams::dispersive() const { return std::abs(omega_q - omega_0) > 10.0 * g; }

double dispersive_shift(const JcParams& p) {
  require(p.omega_0 > 0.0 && p.omega_q > 0.0 && p.g >= 0.0, "dispersive_shift: frequencies must be positive");
  if (!p.dispersive()) throw ValidationError("dispersive_shift: |omega_q - omega_0| <= 10 g, not dispersive");
  return p.g * p.g / (p.omega_q - p.omega_0);
}

}  // namespace febench::qubit
