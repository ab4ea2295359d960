#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <functional>

namespace febench::qubit {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Bloch = std::array<double, 3>;

// Validated 2x2 density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  explicit DensityMatrix(const Mat2& rho);
  static DensityMatrix pure(cplx a0, cplx a1);
  const Mat2& matrix() const { return rho_; }

 private:
  Mat2 rho_;
};

Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();

Bloch bloch_map(const DensityMatrix& rho);
DensityMatrix density_from_bloch(const Bloch& r);

// F = Tr sqrt(sqrt(rho) sigma sqrt(rho)).
double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// Principal square root of a Hermitian PSD matrix, eigenvalues clamped at 0.
Mat2 psd_sqrt(const Mat2& m);

struct FidelityEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

using Channel = std::function<Mat2(const Mat2&)>;

// Monte-Carlo Haar average of <psi|U^dag E(|psi><psi|) U|psi>.
FidelityEstimate average_gate_fidelity(const Channel& channel, const Mat2& ideal, std::size_t samples,
                                       std::uint64_t seed = 1);

// exp(-iHt/hbar) for H = hbar g (s1+ s2- + s1- s2+), basis |00>,|01>,|10>,|11>.
Mat4 exchange_evolution(double g, double t);
Mat4 iswap();
bool is_unitary(const Mat4& u, double tol = 1e-10);

struct JcParams {
  double omega_0 = 0.0;  // rad/s
  double omega_q = 0.0;  // rad/s
  double g = 0.0;        // rad/s
  bool dispersive() const;
};

// chi = g^2 / (omega_q - omega_0).
double dispersive_shift(const JcParams& p);

}  // namespace febench::qubit
