#include "febench/numerics.hpp"

#include <fftw3.h>
#include <gsl/gsl_blas.h>
#include <gsl/gsl_cdf.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_interp.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multifit_nlinear.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "febench/errors.hpp"

namespace febench::num {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

std::vector<double> solve_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                      const std::vector<double>& sup, const std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n), d(n), x(n);
  double m = diag[0];
  if (m == 0.0) throw NumericError("tridiagonal solve: zero pivot");
  c[0] = n > 1 ? sup[0] / m : 0.0;
  d[0] = rhs[0] / m;
  for (std::size_t i = 1; i < n; ++i) {
    m = diag[i] - sub[i] * c[i - 1];
    if (m == 0.0) throw NumericError("tridiagonal solve: zero pivot");
    c[i] = i + 1 < n ? sup[i] / m : 0.0;
    d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

struct MonotoneCubic::Impl {
  gsl_interp* interp = nullptr;
  gsl_interp_accel* acc = nullptr;
  ~Impl() {
    if (interp) gsl_interp_free(interp);
    if (acc) gsl_interp_accel_free(acc);
  }
};

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), impl_(std::make_unique<Impl>()) {
  require(x_.size() == y_.size() && x_.size() >= 3, "MonotoneCubic: need >= 3 matching points");
  for (std::size_t i = 1; i < x_.size(); ++i)
    require(x_[i] > x_[i - 1], "MonotoneCubic: x must be strictly increasing");
  impl_->interp = gsl_interp_alloc(gsl_interp_steffen, x_.size());
  impl_->acc = gsl_interp_accel_alloc();
  gsl_interp_init(impl_->interp, x_.data(), y_.data(), x_.size());
}

MonotoneCubic::~MonotoneCubic() = default;
MonotoneCubic::MonotoneCubic(MonotoneCubic&&) noexcept = default;
MonotoneCubic& MonotoneCubic::operator=(MonotoneCubic&&) noexcept = default;

double MonotoneCubic::operator()(double x) const {
  if (x < x_.front() || x > x_.back()) throw ValidationError("MonotoneCubic: x outside table range");
  // a private accelerator keeps concurrent calls safe
  return gsl_interp_eval(impl_->interp, x_.data(), y_.data(), x, nullptr);
}

double MonotoneCubic::derivative(double x) const {
  if (x < x_.front() || x > x_.back()) throw ValidationError("MonotoneCubic: x outside table range");
  return gsl_interp_eval_deriv(impl_->interp, x_.data(), y_.data(), x, nullptr);
}

namespace {

std::vector<cplx> run_dft(const std::vector<cplx>& in, int sign) {
  const int n = static_cast<int>(in.size());
  std::vector<cplx> out(in.size());
  if (n == 0) return out;
  auto* buf_in = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  auto* buf_out = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  fftw_plan plan = fftw_plan_dft_1d(n, buf_in, buf_out, sign, FFTW_ESTIMATE);
  std::memcpy(buf_in, in.data(), sizeof(fftw_complex) * n);
  fftw_execute(plan);
  for (int i = 0; i < n; ++i) out[i] = cplx(buf_out[i][0], buf_out[i][1]);
  fftw_destroy_plan(plan);
  fftw_free(buf_in);
  fftw_free(buf_out);
  return out;
}

}  // namespace

std::vector<cplx> fft(const std::vector<cplx>& x) { return run_dft(x, FFTW_FORWARD); }

std::vector<cplx> fft_real(const std::vector<double>& x) {
  std::vector<cplx> c(x.begin(), x.end());
  return run_dft(c, FFTW_FORWARD);
}

std::vector<cplx> ifft(const std::vector<cplx>& X) { return run_dft(X, FFTW_BACKWARD); }

double student_t_quantile(double p, double dof) {
  require(p > 0.0 && p < 1.0 && dof > 0.0, "student_t_quantile: bad arguments");
  return gsl_cdf_tdist_Pinv(p, dof);
}

namespace {

struct LsqCtx {
  const ResidualFn* f;
  std::vector<double> p;
  std::vector<double> r;
};

int lsq_f(const gsl_vector* x, void* data, gsl_vector* out) {
  auto* ctx = static_cast<LsqCtx*>(data);
  for (std::size_t i = 0; i < ctx->p.size(); ++i) ctx->p[i] = gsl_vector_get(x, i);
  (*ctx->f)(ctx->p, ctx->r);
  for (std::size_t i = 0; i < ctx->r.size(); ++i) {
    if (!std::isfinite(ctx->r[i])) return GSL_EDOM;
    gsl_vector_set(out, i, ctx->r[i]);
  }
  return GSL_SUCCESS;
}

}  // namespace

LsqResult least_squares(const ResidualFn& f, std::vector<double> p0, std::size_t n_residuals,
                        const std::vector<double>& weights, std::size_t max_iter, double xtol,
                        double gtol) {
  const std::size_t np = p0.size();
  require(np > 0 && n_residuals >= np, "least_squares: need at least as many residuals as parameters");
  require(weights.empty() || weights.size() == n_residuals, "least_squares: weight size mismatch");

  gsl_set_error_handler_off();
  LsqCtx ctx{&f, p0, std::vector<double>(n_residuals)};
  gsl_multifit_nlinear_fdf fdf;
  fdf.f = lsq_f;
  fdf.df = nullptr;  // forward-difference Jacobian
  fdf.fvv = nullptr;
  fdf.n = n_residuals;
  fdf.p = np;
  fdf.params = &ctx;

  gsl_multifit_nlinear_parameters params = gsl_multifit_nlinear_default_parameters();
  gsl_multifit_nlinear_workspace* w =
      gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &params, n_residuals, np);
  gsl_vector_view x0 = gsl_vector_view_array(p0.data(), np);
  std::vector<double> wts = weights;
  for (auto& v : wts) v = v * v;  // GSL weights multiply squared residuals
  gsl_vector_view wv = gsl_vector_view_array(wts.data(), wts.size());
  if (wts.empty())
    gsl_multifit_nlinear_init(&x0.vector, &fdf, w);
  else
    gsl_multifit_nlinear_winit(&x0.vector, &wv.vector, &fdf, w);

  int info = 0;
  int status = gsl_multifit_nlinear_driver(max_iter, xtol, gtol, 0.0, nullptr, nullptr, &info, w);

  LsqResult res;
  res.params.resize(np);
  gsl_vector* x = gsl_multifit_nlinear_position(w);
  for (std::size_t i = 0; i < np; ++i) res.params[i] = gsl_vector_get(x, i);
  gsl_vector* rv = gsl_multifit_nlinear_residual(w);
  double chi2 = 0.0;
  gsl_blas_ddot(rv, rv, &chi2);
  res.chi2 = chi2;
  res.dof = n_residuals - np;
  res.iterations = gsl_multifit_nlinear_niter(w);
  // a start already at the minimum stalls; accept if J^T r vanishes relative to |J| |r|
  bool stationary = false;
  if (status != GSL_SUCCESS) {
    gsl_matrix* Jm = gsl_multifit_nlinear_jac(w);
    gsl_vector* gr = gsl_vector_alloc(np);
    gsl_blas_dgemv(CblasTrans, 1.0, Jm, rv, 0.0, gr);
    double jn = 0.0;
    for (std::size_t a = 0; a < Jm->size1; ++a)
      for (std::size_t b = 0; b < np; ++b) jn += gsl_matrix_get(Jm, a, b) * gsl_matrix_get(Jm, a, b);
    // or r is at the rounding floor: below what a 1e-10 relative step in p would produce
    stationary = gsl_blas_dnrm2(gr) <= 1e-6 * std::sqrt(jn) * std::sqrt(chi2) ||
                 std::sqrt(chi2) <= 1e-10 * std::sqrt(jn) * gsl_blas_dnrm2(x);
    gsl_vector_free(gr);
  }
  res.converged = status == GSL_SUCCESS || stationary;

  gsl_matrix* J = gsl_multifit_nlinear_jac(w);
  gsl_matrix* cov = gsl_matrix_alloc(np, np);
  gsl_multifit_nlinear_covar(J, 0.0, cov);
  const double scale = res.dof > 0 ? chi2 / double(res.dof) : 1.0;
  res.covariance.assign(np, std::vector<double>(np));
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < np; ++j) res.covariance[i][j] = gsl_matrix_get(cov, i, j) * scale;
  gsl_matrix_free(cov);
  gsl_multifit_nlinear_free(w);
  return res;
}

double minimize_scalar(const std::function<double(double)>& f, double lo, double hi, int n_scan) {
  require(hi > lo && n_scan >= 3, "minimize_scalar: bad bracket");
  std::vector<double> xs = linspace(lo, hi, std::size_t(n_scan));
  std::vector<double> fs(xs.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    fs[i] = f(xs[i]);
    if (fs[i] < fs[best]) best = i;
  }
  if (best == 0 || best + 1 == xs.size()) return xs[best];
  if (!(fs[best] < fs[best - 1] && fs[best] < fs[best + 1])) return xs[best];

  struct Ctx {
    const std::function<double(double)>* f;
  } ctx{&f};
  gsl_function gf;
  gf.function = [](double x, void* p) { return (*static_cast<Ctx*>(p)->f)(x); };
  gf.params = &ctx;
  gsl_min_fminimizer* m = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
  gsl_min_fminimizer_set_with_values(m, &gf, xs[best], fs[best], xs[best - 1], fs[best - 1], xs[best + 1],
                                     fs[best + 1]);
  double x = xs[best];
  for (int it = 0; it < 100; ++it) {
    if (gsl_min_fminimizer_iterate(m) != GSL_SUCCESS) break;
    x = gsl_min_fminimizer_x_minimum(m);
    const double a = gsl_min_fminimizer_x_lower(m), b = gsl_min_fminimizer_x_upper(m);
    if (gsl_min_test_interval(a, b, 0.0, 1e-10) == GSL_SUCCESS) break;
  }
  gsl_min_fminimizer_free(m);
  return x;
}

}  // namespace febench::num
