#include "cdxstats/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cdxstats {

namespace {

constexpr int kMaxIterations = 200;
constexpr int kMaxHalvings = 30;
constexpr double kParamTolerance = 1e-10;

// Solves the n x n system in place (partial pivoting). a is row-major with
// the right-hand side appended as column n.
void solve_augmented(double* a, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(a[r * (n + 1) + col]) >
          std::fabs(a[pivot * (n + 1) + col]))
        pivot = r;
    }
    if (std::fabs(a[pivot * (n + 1) + col]) < 1e-300)
      throw SingularSystemError("singular normal equations");
    if (pivot != col) {
      for (int c = 0; c <= n; ++c)
        std::swap(a[col * (n + 1) + c], a[pivot * (n + 1) + c]);
    }
    double d = a[col * (n + 1) + col];
    for (int c = col; c <= n; ++c) a[col * (n + 1) + c] /= d;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a[r * (n + 1) + col];
      if (f == 0.0) continue;
      for (int c = col; c <= n; ++c)
        a[r * (n + 1) + c] -= f * a[col * (n + 1) + c];
    }
  }
}

double sum_squared_residuals(std::span<const double> x,
                             std::span<const double> y, FitModel model,
                             std::span<const double> p) {
  double ssr = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double r = eval_model(model, p, x[k]) - y[k];
    ssr += r * r;
  }
  return ssr;
}

FitResult finish(std::span<const double> x, std::span<const double> y,
                 FitModel model, std::span<const double> p) {
  const std::size_t n = x.size();
  const std::size_t np = model == FitModel::Linear ? 2 : 3;

  // normal matrix J^T J and its inverse via per-column solves
  double jtj[9] = {};
  double row[3];
  for (std::size_t k = 0; k < n; ++k) {
    model_jacobian(model, p, x[k], std::span<double>(row, np));
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t j = 0; j < np; ++j)
        jtj[i * np + j] += row[i] * row[j];
  }

  double ssr = sum_squared_residuals(x, y, model, p);
  double variance =
      n > np ? ssr / static_cast<double>(n - np) : 0.0;

  FitResult result;
  result.model = model;
  for (std::size_t i = 0; i < np; ++i) result.params[i] = p[i];
  result.residual_rms = std::sqrt(ssr / static_cast<double>(n));

  for (std::size_t i = 0; i < np; ++i) {
    // column i of (J^T J)^-1 from a linear solve
    double aug[12];
    for (std::size_t r = 0; r < np; ++r) {
      for (std::size_t c = 0; c < np; ++c)
        aug[r * (np + 1) + c] = jtj[r * np + c];
      aug[r * (np + 1) + np] = (r == i) ? 1.0 : 0.0;
    }
    solve_augmented(aug, static_cast<int>(np));
    double cov_ii = aug[i * (np + 1) + np] * variance;
    double se = cov_ii > 0 ? std::sqrt(cov_ii) : 0.0;
    double denom = std::max(std::fabs(result.params[i]), 1e-300);
    result.err_pct[i] = 100.0 * se / denom;
  }
  result.max_err_pct = *std::max_element(result.err_pct.begin(),
                                         result.err_pct.begin() + np);
  return result;
}

FitResult fit_linear(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  double det = static_cast<double>(n) * sxx - sx * sx;
  if (std::fabs(det) < 1e-300)
    throw SingularSystemError("collinear x values in linear fit");
  double a = (static_cast<double>(n) * sxy - sx * sy) / det;
  double b = (sxx * sy - sx * sxy) / det;
  double p[2] = {a, b};
  return finish(x, y, FitModel::Linear, std::span<const double>(p, 2));
}

FitResult fit_exponential(std::span<const double> x,
                          std::span<const double> y) {
  const std::size_t n = x.size();

  // initial guess: c0 slightly below min(y), then a log-linear regression
  // of (y - c0) gives a0 and b0
  double ymin = y[0], ymax = y[0];
  for (double v : y) {
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  double margin = std::max(1e-6, 0.05 * (ymax - ymin));
  double c0 = ymin - margin;

  double sx = 0, sl = 0, sxx = 0, sxl = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double l = std::log(y[k] - c0);
    sx += x[k];
    sl += l;
    sxx += x[k] * x[k];
    sxl += x[k] * l;
  }
  double det = static_cast<double>(n) * sxx - sx * sx;
  if (std::fabs(det) < 1e-300)
    throw SingularSystemError("collinear x values in exponential fit");
  double slope = (static_cast<double>(n) * sxl - sx * sl) / det;
  double intercept = (sxx * sl - sx * sxl) / det;
  double p[3] = {std::exp(intercept), std::exp(slope), c0};
  p[1] = std::max(p[1], 1e-6);

  double ssr = sum_squared_residuals(x, y, FitModel::Exponential,
                                     std::span<const double>(p, 3));
  const double initial_ssr = ssr;
  double row[3];

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // assemble J^T J | J^T r
    double aug[12] = {};
    for (std::size_t k = 0; k < n; ++k) {
      model_jacobian(FitModel::Exponential, std::span<const double>(p, 3),
                     x[k], std::span<double>(row, 3));
      double r =
          eval_model(FitModel::Exponential, std::span<const double>(p, 3),
                     x[k]) - y[k];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) aug[i * 4 + j] += row[i] * row[j];
        aug[i * 4 + 3] += row[i] * r;
      }
    }
    for (int i = 0; i < 3; ++i) aug[i * 4 + 3] = -aug[i * 4 + 3];
    solve_augmented(aug, 3);
    double step[3] = {aug[3], aug[7], aug[11]};

    // multiplicative step halving on residual increase; b stays positive
    double t = 1.0;
    double cand[3];
    double cand_ssr = std::numeric_limits<double>::infinity();
    for (int h = 0; h <= kMaxHalvings; ++h) {
      cand[0] = p[0] + t * step[0];
      cand[1] = p[1] + t * step[1];
      cand[2] = p[2] + t * step[2];
      if (cand[1] > 0) {
        cand_ssr = sum_squared_residuals(x, y, FitModel::Exponential,
                                         std::span<const double>(cand, 3));
        if (cand_ssr <= ssr) break;
      }
      t *= 0.5;
    }
    if (!(cand_ssr <= ssr) || cand[1] <= 0) {
      // no acceptable step; treat the current point as converged
      break;
    }

    double rel_change = 0.0;
    for (int i = 0; i < 3; ++i) {
      double denom = std::max(std::fabs(p[i]), 1e-12);
      rel_change = std::max(rel_change, std::fabs(t * step[i]) / denom);
    }
    p[0] = cand[0];
    p[1] = cand[1];
    p[2] = cand[2];
    ssr = cand_ssr;
    if (rel_change < kParamTolerance) break;
    if (iter == kMaxIterations - 1 && ssr > initial_ssr) {
      throw NonConvergenceError("exponential fit diverged");
    }
  }
  return finish(x, y, FitModel::Exponential, std::span<const double>(p, 3));
}

}  // namespace

std::string_view fit_model_name(FitModel m) {
  return m == FitModel::Linear ? "linear" : "exponential";
}

double eval_model(FitModel model, std::span<const double> p, double x) {
  if (model == FitModel::Linear) return p[0] * x + p[1];
  return p[0] * std::pow(p[1], x) + p[2];
}

void model_jacobian(FitModel model, std::span<const double> p, double x,
                    std::span<double> out) {
  if (model == FitModel::Linear) {
    out[0] = x;
    out[1] = 1.0;
    return;
  }
  double bx = std::pow(p[1], x);
  out[0] = bx;
  out[1] = p[0] * x * std::pow(p[1], x - 1.0);
  out[2] = 1.0;
}

double FitResult::predict(double x) const {
  return eval_model(model, std::span<const double>(params.data(), n_params()),
                    x);
}

FitResult fit(std::span<const double> x, std::span<const double> y,
              FitModel model) {
  std::size_t np = model == FitModel::Linear ? 2 : 3;
  if (x.size() != y.size() || x.size() < np)
    throw FitError("fit needs at least " + std::to_string(np) + " points");
  if (model == FitModel::Exponential) return fit_exponential(x, y);
  return fit_linear(x, y);
}

}  // namespace cdxstats
