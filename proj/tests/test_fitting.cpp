#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cdxstats/fitting.hpp"

using namespace cdxstats;

namespace {

std::vector<double> xs(int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

std::vector<double> eval_all(FitModel model, std::span<const double> p,
                             std::span<const double> x) {
  std::vector<double> y;
  for (double xi : x) y.push_back(eval_model(model, p, xi));
  return y;
}

}  // namespace

TEST_CASE("linear fit recovers the aging trend exactly") {
  auto x = xs(18);
  double p[] = {0.74, 4.89};
  auto y = eval_all(FitModel::Linear, p, x);
  FitResult r = fit(x, y, FitModel::Linear);
  CHECK(std::fabs(r.params[0] - 0.74) < 1e-9);
  CHECK(std::fabs(r.params[1] - 4.89) < 1e-9);
  CHECK(r.residual_rms < 1e-9);
  CHECK(r.err_pct[0] < 1e-6);
  CHECK(r.max_err_pct >= r.err_pct[0]);
}

TEST_CASE("two point interpolation") {
  std::vector<double> x{0, 1}, y{1, 3};
  FitResult r = fit(x, y, FitModel::Linear);
  CHECK(r.params[0] == doctest::Approx(2.0));
  CHECK(r.params[1] == doctest::Approx(1.0));
  CHECK(r.residual_rms == doctest::Approx(0.0));
}

TEST_CASE("linear fit is affine equivariant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> noise(-1, 1);
  auto x = xs(18);
  std::vector<double> y;
  for (double xi : x) y.push_back(3.0 * xi + 7.0 + noise(rng));
  FitResult base = fit(x, y, FitModel::Linear);
  for (double k : {2.0, -0.5, 10.0}) {
    std::vector<double> scaled;
    for (double v : y) scaled.push_back(k * v);
    FitResult r = fit(x, scaled, FitModel::Linear);
    CHECK(r.params[0] == doctest::Approx(k * base.params[0]));
    CHECK(r.params[1] == doctest::Approx(k * base.params[1]));
  }
}

TEST_CASE("exponential fit recovers the volume trend") {
  auto x = xs(18);
  double p[] = {22.82, 1.38, 300.18};
  auto y = eval_all(FitModel::Exponential, p, x);
  FitResult r = fit(x, y, FitModel::Exponential);
  CHECK(std::fabs(r.params[0] - 22.82) / 22.82 < 1e-4);
  CHECK(std::fabs(r.params[1] - 1.38) / 1.38 < 1e-4);
  CHECK(std::fabs(r.params[2] - 300.18) / 300.18 < 1e-4);
  CHECK(r.residual_rms < 1e-4);
}

TEST_CASE("exponential recovery across the parameter box") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ua(0.1, 500.0);
  std::uniform_real_distribution<double> ub(1.05, 2.0);
  std::uniform_real_distribution<double> uc(0.0, 800.0);
  auto x = xs(18);
  for (int iter = 0; iter < 200; ++iter) {
    double p[] = {ua(rng), ub(rng), uc(rng)};
    auto y = eval_all(FitModel::Exponential, p, x);
    FitResult r = fit(x, y, FitModel::Exponential);
    CAPTURE(p[0]);
    CAPTURE(p[1]);
    CAPTURE(p[2]);
    CHECK(std::fabs(r.params[0] - p[0]) / p[0] < 1e-4);
    CHECK(std::fabs(r.params[1] - p[1]) / p[1] < 1e-4);
    CHECK(std::fabs(r.params[2] - p[2]) / std::max(p[2], 1.0) < 1e-4);
  }
}

TEST_CASE("exponential jacobian matches central differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ua(0.5, 100.0);
  std::uniform_real_distribution<double> ub(1.05, 2.0);
  std::uniform_real_distribution<double> uc(0.0, 500.0);
  std::uniform_real_distribution<double> ux(0.0, 17.0);
  for (int iter = 0; iter < 500; ++iter) {
    double p[] = {ua(rng), ub(rng), uc(rng)};
    double x = ux(rng);
    double jac[3];
    model_jacobian(FitModel::Exponential, std::span<const double>(p, 3), x,
                   jac);
    for (int i = 0; i < 3; ++i) {
      double h = 1e-5 * std::max(1.0, std::fabs(p[i]));
      double plus[3] = {p[0], p[1], p[2]};
      double minus[3] = {p[0], p[1], p[2]};
      plus[i] += h;
      minus[i] -= h;
      double fd =
          (eval_model(FitModel::Exponential, std::span<const double>(plus, 3),
                      x) -
           eval_model(FitModel::Exponential,
                      std::span<const double>(minus, 3), x)) /
          (2 * h);
      double denom = std::max(std::fabs(fd), 1e-9);
      CAPTURE(i);
      CHECK(std::fabs(jac[i] - fd) / denom < 1e-6);
    }
  }
}

TEST_CASE("paper prediction arithmetic") {
  FitResult volume;
  volume.model = FitModel::Exponential;
  volume.params = {22.82, 1.38, 300.18};
  CHECK(std::fabs(volume.predict(24) / volume.predict(18) - 6.7) < 0.1);
  CHECK(std::fabs(volume.predict(20) / volume.predict(18) - 1.9) < 0.05);

  FitResult aging;
  aging.model = FitModel::Linear;
  aging.params = {0.74, 4.89, 0};
  CHECK(aging.predict(24) == doctest::Approx(22.65));
  CHECK(std::fabs(aging.predict(24) - 23.0) < 0.5);
  CHECK(std::fabs(aging.predict(42) - 36.0) < 0.5);

  FitResult birth_size;
  birth_size.model = FitModel::Linear;
  birth_size.params = {866, 1320, 0};
  CHECK(std::fabs(birth_size.predict(42) / birth_size.predict(20) - 2.02) <
        0.05);
}

TEST_CASE("degenerate inputs") {
  SUBCASE("collinear x is singular") {
    std::vector<double> x{2, 2, 2, 2}, y{1, 2, 3, 4};
    CHECK_THROWS_AS(fit(x, y, FitModel::Linear), SingularSystemError);
    CHECK_THROWS_AS(fit(x, y, FitModel::Exponential), SingularSystemError);
  }
  SUBCASE("too few points") {
    std::vector<double> x{1}, y{2};
    CHECK_THROWS_AS(fit(x, y, FitModel::Linear), FitError);
    std::vector<double> x2{1, 2}, y2{2, 3};
    CHECK_THROWS_AS(fit(x2, y2, FitModel::Exponential), FitError);
  }
}

TEST_CASE("asymptotic errors scale with noise") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto x = xs(18);
  std::vector<double> y;
  for (double xi : x) y.push_back(5.0 * xi + 100.0 + noise(rng));
  FitResult r = fit(x, y, FitModel::Linear);
  CHECK(r.err_pct[0] > 0.0);
  CHECK(r.residual_rms > 0.0);
  CHECK(r.residual_rms < 2.0);
  std::vector<double> y2;
  for (double xi : x) y2.push_back(5.0 * xi + 100.0 + 0.01 * noise(rng));
  FitResult r2 = fit(x, y2, FitModel::Linear);
  CHECK(r2.err_pct[0] < r.err_pct[0]);
}
