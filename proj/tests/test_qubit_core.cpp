#include <cmath>
#include <random>

#include "doctest.h"
#include "febench/errors.hpp"
#include "febench/qubit_core.hpp"

using namespace febench;
using namespace febench::qubit;

namespace {

DensityMatrix random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Bloch r{u(rng), u(rng), u(rng)};
  double len = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  if (len > 1.0)
    for (double& c : r) c /= len * 1.0000001;
  return density_from_bloch(r);
}

}  // namespace

TEST_SUITE("qubit-core") {
  TEST_CASE("bloch map of basis states") {
    auto r = bloch_map(DensityMatrix::pure(1.0, 0.0));
    CHECK(r[0] == doctest::Approx(0.0));
    CHECK(r[1] == doctest::Approx(0.0));
    CHECK(r[2] == doctest::Approx(1.0));

    auto plus = bloch_map(DensityMatrix::pure(1.0, 1.0));
    CHECK(plus[0] == doctest::Approx(1.0));
    CHECK(plus[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(plus[2] == doctest::Approx(0.0).epsilon(1e-12));

    auto mixed = density_from_bloch({0.0, 0.0, 0.0});
    CHECK((mixed.matrix() - 0.5 * Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("bloch round trip preserves the vector") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 200; ++k) {
      DensityMatrix rho = random_state(rng);
      auto r = bloch_map(rho);
      auto back = density_from_bloch(r);
      CHECK((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(r[0] * r[0] + r[1] * r[1] + r[2] * r[2] <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("invalid density matrices are rejected") {
    Mat2 m;
    m << 1.0, 0.5, 0.0, 0.0;
    CHECK_THROWS_AS(DensityMatrix{m}, ValidationError);
    CHECK_THROWS_AS(DensityMatrix{Mat2::Identity()}, ValidationError);
    Mat2 neg;
    neg << 1.5, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(DensityMatrix{neg}, ValidationError);
    CHECK_THROWS_AS(density_from_bloch({1.0, 1.0, 0.0}), ValidationError);
  }

  TEST_CASE("state fidelity closed forms") {
    auto zero = DensityMatrix::pure(1.0, 0.0);
    auto one = DensityMatrix::pure(0.0, 1.0);
    auto mixed = density_from_bloch({0.0, 0.0, 0.0});
    CHECK(state_fidelity(zero, zero) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(state_fidelity(zero, one) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(state_fidelity(zero, mixed) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("state fidelity is bounded and symmetric over random pairs") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 1000; ++k) {
      auto a = random_state(rng);
      auto b = random_state(rng);
      const double fab = state_fidelity(a, b);
      const double fba = state_fidelity(b, a);
      CHECK(fab >= 0.0);
      CHECK(fab <= 1.0);
      // sqrt of a near-singular PSD matrix costs about half the digits
      CHECK(std::abs(fab - fba) < 1e-8);
      // closed form for qubits: F^2 = Tr(rho sigma) + 2 sqrt(det rho det sigma)
      const double tr = (a.matrix() * b.matrix()).trace().real();
      const double dets = std::max(0.0, a.matrix().determinant().real() * b.matrix().determinant().real());
      CHECK(std::abs(fab - std::sqrt(tr + 2.0 * std::sqrt(dets))) < 1e-8);
    }
  }

  TEST_CASE("average gate fidelity against analytic Haar averages") {
    const Mat2 I = Mat2::Identity();
    const Mat2 X = pauli_x();
    auto perfect = average_gate_fidelity([&](const Mat2& r) { return X * r * X.adjoint(); }, X, 2000, 3);
    CHECK(perfect.mean == doctest::Approx(1.0).epsilon(1e-12));

    auto depol = average_gate_fidelity([&](const Mat2&) { return Mat2(0.5 * I); }, I, 20000, 5);
    CHECK(std::abs(depol.mean - 0.5) < 1e-12);

    auto wrong = average_gate_fidelity([](const Mat2& r) { return r; }, X, 40000, 9);
    CHECK(std::abs(wrong.mean - 1.0 / 3.0) < 4.0 * wrong.stderr_);

    CHECK_THROWS_AS(average_gate_fidelity([](const Mat2& r) { return r; }, I, 0), ValidationError);
  }

  TEST_CASE("stderr shrinks as one over root samples") {
    const Mat2 X = pauli_x();
    auto f = [](const Mat2& r) { return r; };
    auto a = average_gate_fidelity(f, X, 2000, 21);
    auto b = average_gate_fidelity(f, X, 32000, 21);
    CHECK(a.stderr_ / b.stderr_ == doctest::Approx(4.0).epsilon(0.1));
  }

  TEST_CASE("exchange evolution matches the printed block form") {
    const double g = 2.0 * M_PI * 1e6;
    CHECK((exchange_evolution(g, 0.0) - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-15);

    const double t = 0.3e-6;
    Mat4 u = exchange_evolution(g, t);
    CHECK(u(1, 1).real() == doctest::Approx(std::cos(g * t)));
    CHECK(u(1, 2).imag() == doctest::Approx(-std::sin(g * t)));
    CHECK(is_unitary(u));

    // exp(-iHt) with H = hbar g (s+ s- + s- s+), built independently
    Mat4 H = Mat4::Zero();
    H(1, 2) = g;
    H(2, 1) = g;
    Eigen::SelfAdjointEigenSolver<Mat4> es(H);
    Eigen::Vector4cd ph;
    for (int i = 0; i < 4; ++i) ph[i] = std::exp(cplx(0.0, -es.eigenvalues()[i] * t));
    Mat4 ref = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    CHECK((u - ref).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("iSWAP sign convention") {
    const double g = 1.0e6;
    Mat4 quarter = exchange_evolution(g, M_PI / (2.0 * g));
    // the printed U(t) reaches the conjugate iSWAP at pi/2g and iSWAP at 3pi/2g
    CHECK((quarter - iswap().conjugate()).cwiseAbs().maxCoeff() < 1e-10);
    Mat4 three = exchange_evolution(g, 3.0 * M_PI / (2.0 * g));
    CHECK((three - iswap()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(is_unitary(iswap()));
  }

  TEST_CASE("excitation transfer under iSWAP picks up +i") {
    const cplx alpha(0.6, 0.0), beta(0.0, 0.8);
    // (alpha|g> + beta|e>) (x) |up>, with |g>,|up> = |0>
    Eigen::Vector4cd in(alpha, 0.0, beta, 0.0);
    Eigen::Vector4cd out = iswap() * in;
    CHECK(std::abs(out[0] - alpha) < 1e-12);
    CHECK(std::abs(out[1] - cplx(0.0, 1.0) * beta) < 1e-12);
    CHECK(std::abs(out[2]) < 1e-12);
    Eigen::Vector4cd out_u = exchange_evolution(1.0, M_PI / 2.0) * in;
    CHECK(std::abs(out_u[1] - cplx(0.0, -1.0) * beta) < 1e-12);
  }

  TEST_CASE("exchange evolution is periodic") {
    const double g = 3.7e5;
    for (double t : {0.0, 1e-6, 4.2e-6, 9.9e-6}) {
      Mat4 a = exchange_evolution(g, t);
      Mat4 b = exchange_evolution(g, t + 2.0 * M_PI / g);
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
    }
    CHECK_THROWS_AS(exchange_evolution(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(exchange_evolution(1.0, -1.0), ValidationError);
  }

  TEST_CASE("dispersive shift") {
    const double tp = 2.0 * M_PI;
    JcParams p{tp * 4.8e9, tp * 8.0e9, tp * 150e6};
    CHECK(dispersive_shift(p) / tp == doctest::Approx(7.03125e6).epsilon(1e-9));
    JcParams flip{tp * 8.0e9, tp * 4.8e9, tp * 150e6};
    CHECK(dispersive_shift(flip) == doctest::Approx(-dispersive_shift(p)));
    JcParams zero{tp * 4.8e9, tp * 8.0e9, 0.0};
    CHECK(dispersive_shift(zero) == 0.0);
    JcParams resonant{tp * 4.8e9, tp * 4.9e9, tp * 150e6};
    CHECK_THROWS_AS(dispersive_shift(resonant), ValidationError);
  }

  TEST_CASE("exponential decay helper consistency") {
    // T1 relaxation of the excited population under amplitude damping
    const double T1 = 10e-6, t = 3e-6;
    const double p = std::exp(-t / T1);
    Mat2 rho;
    rho << 1.0 - p, 0.0, 0.0, p;
    auto r = bloch_map(DensityMatrix(rho));
    CHECK(r[2] == doctest::Approx(1.0 - 2.0 * p));
  }
}
