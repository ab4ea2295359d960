#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

namespace febench::num {

using cplx = std::complex<double>;

std::vector<double> linspace(double a, double b, std::size_t n);

// Solves a tridiagonal system. sub[0] and sup[n-1] are ignored.
std::vector<double> solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                      const std::vector<double>& sup, const std::vector<double>& rhs);

// Monotone cubic (Steffen) interpolant over strictly increasing x.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);
  ~MonotoneCubic();
  MonotoneCubic(const MonotoneCubic&) = delete;
  MonotoneCubic& operator=(const MonotoneCubic&) = delete;
  MonotoneCubic(MonotoneCubic&&) noexcept;
  MonotoneCubic& operator=(MonotoneCubic&&) noexcept;

  double operator()(double x) const;
  double derivative(double x) const;
  double xmin() const { return x_.front(); }
  double xmax() const { return x_.back(); }

 private:
  struct Impl;
  std::vector<double> x_, y_;
  std::unique_ptr<Impl> impl_;
};

// Unnormalized DFT, X_k = sum_n x_n exp(-2 pi i k n / N).
std::vector<cplx> fft(const std::vector<cplx>& x);
std::vector<cplx> fft_real(const std::vector<double>& x);
// Unnormalized inverse, x_n = sum_k X_k exp(+2 pi i k n / N).
std::vector<cplx> ifft(const std::vector<cplx>& X);

double student_t_quantile(double p, double dof);

// Weighted nonlinear least squares: minimize sum_i (w_i r_i(p))^2 where the
// residual callback returns unweighted r_i. Trust-region Levenberg-Marquardt.
struct LsqResult {
  std::vector<double> params;
  std::vector<std::vector<double>> covariance;  // scaled by reduced chi^2
  double chi2 = 0.0;
  std::size_t dof = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<void(const std::vector<double>& p, std::vector<double>& r)>;

LsqResult least_squares(const ResidualFn& f, std::vector<double> p0, std::size_t n_residuals,
                        const std::vector<double>& weights = {}, std::size_t max_iter = 500,
                        double xtol = 1e-12, double gtol = 1e-12);

// Minimum of f on [lo, hi]: coarse scan of n_scan points, then Brent inside
// the bracket around the best scan point.
double minimize_scalar(const std::function<double(double)>& f, double lo, double hi, int n_scan = 41);

}  // namespace febench::num
