#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace cdxstats {

// The two trend models used in the reports: f(x) = a*x + b and
// f(x) = a*b^x + c, with x counted in years from a fixed origin year
// (1996 by default in the CLI).
enum class FitModel { Linear, Exponential };
std::string_view fit_model_name(FitModel m);

class FitError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class SingularSystemError : public FitError {
  using FitError::FitError;
};
class NonConvergenceError : public FitError {
  using FitError::FitError;
};

struct FitResult {
  FitModel model = FitModel::Linear;
  std::array<double, 3> params{};    // a, b[, c]
  std::array<double, 3> err_pct{};   // asymptotic standard error, % of |param|
  double max_err_pct = 0.0;
  double residual_rms = 0.0;
  std::size_t n_params() const { return model == FitModel::Linear ? 2 : 3; }

  double predict(double x) const;
};

// Least squares fit. Linear is solved in closed form; Exponential runs
// damped Gauss-Newton from a log-linear initial guess until the relative
// parameter change drops below 1e-10 (at most 200 iterations, at most 30
// step halvings per iteration). Throws SingularSystemError on degenerate
// inputs and NonConvergenceError when the iteration cap is hit with a
// diverging residual.
FitResult fit(std::span<const double> x, std::span<const double> y,
              FitModel model);

// Model value and analytic Jacobian row (d f / d params) at x.
double eval_model(FitModel model, std::span<const double> params, double x);
void model_jacobian(FitModel model, std::span<const double> params, double x,
                    std::span<double> out);

}  // namespace cdxstats
