#include "streamcov/functions.hpp"

#include <cmath>
#include <limits>

namespace streamcov {

bool is_completely_monotone_family(ScalarKind k) {
  switch (k) {
    case ScalarKind::CmPowExp:
    case ScalarKind::CmNegPow:
    case ScalarKind::CmSech:
    case ScalarKind::CmCauchy:
      return true;
    default:
      return false;
  }
}

bool is_bernstein_family(ScalarKind k) { return !is_completely_monotone_family(k); }

const std::vector<std::string>& scalar_param_names(ScalarKind k) {
  static const std::vector<std::string> cn = {"c", "nu"};
  static const std::vector<std::string> cng = {"c", "nu", "gamma"};
  static const std::vector<std::string> kbl = {"kappa", "beta", "lambda"};
  static const std::vector<std::string> lb = {"lambda", "beta"};
  static const std::vector<std::string> kb = {"kappa", "beta"};
  switch (k) {
    case ScalarKind::CmPowExp:
    case ScalarKind::CmNegPow:
    case ScalarKind::CmSech:
      return cn;
    case ScalarKind::CmCauchy:
      return cng;
    case ScalarKind::BfPowerPlusOne:
    case ScalarKind::BfLogRatio:
      return kbl;
    case ScalarKind::BfPowerPlusBeta:
      return lb;
    case ScalarKind::BfExpSaturate:
      return kb;
  }
  return cn;
}

namespace {

void expect(bool ok, const char* what) {
  if (!ok) fail(Errc::OutOfDomainParam, what);
}

}  // namespace

void check_scalar_params(const ScalarFamily& f) {
  const auto& names = scalar_param_names(f.kind);
  if (f.params.size() != names.size())
    fail(Errc::OutOfDomainParam, "wrong parameter count for scalar family");
  const auto& p = f.params;
  switch (f.kind) {
    case ScalarKind::CmPowExp:
      expect(p[0] > 0.0, "CmPowExp requires c > 0");
      expect(p[1] > 0.0 && p[1] <= 1.0, "CmPowExp requires 0 < nu <= 1");
      break;
    case ScalarKind::CmNegPow:
      expect(p[0] > 0.0, "CmNegPow requires c > 0");
      expect(p[1] < 0.0, "CmNegPow requires nu < 0");
      break;
    case ScalarKind::CmSech:
      expect(p[0] > 0.0, "CmSech requires c > 0");
      expect(p[1] > 0.0, "CmSech requires nu > 0");
      break;
    case ScalarKind::CmCauchy:
      expect(p[0] > 0.0, "CmCauchy requires c > 0");
      expect(p[1] > 0.0, "CmCauchy requires nu > 0");
      expect(p[2] > 0.0 && p[2] <= 1.0, "CmCauchy requires 0 < gamma <= 1");
      break;
    case ScalarKind::BfPowerPlusOne:
      expect(p[0] > 0.0, "BfPowerPlusOne requires kappa > 0");
      expect(p[1] >= 0.0 && p[1] <= 1.0, "BfPowerPlusOne requires 0 <= beta <= 1");
      expect(p[2] > 0.0 && p[2] <= 1.0, "BfPowerPlusOne requires 0 < lambda <= 1");
      break;
    case ScalarKind::BfLogRatio:
      expect(p[0] > 0.0, "BfLogRatio requires kappa > 0");
      expect(p[1] > 1.0, "BfLogRatio requires beta > 1");
      expect(p[2] > 0.0 && p[2] <= 1.0, "BfLogRatio requires 0 < lambda <= 1");
      break;
    case ScalarKind::BfPowerPlusBeta:
      expect(p[0] > 0.0 && p[0] <= 1.0, "BfPowerPlusBeta requires 0 < lambda <= 1");
      expect(p[1] > 0.0, "BfPowerPlusBeta requires beta > 0");
      break;
    case ScalarKind::BfExpSaturate:
      expect(p[0] > 0.0, "BfExpSaturate requires kappa > 0");
      expect(p[1] > 1.0, "BfExpSaturate requires beta > 1");
      break;
  }
}

double eval_scalar(const ScalarFamily& f, double t) {
  if (t < 0.0) fail(Errc::OutOfDomainParam, "scalar families are defined for t >= 0");
  const auto& p = f.params;
  switch (f.kind) {
    case ScalarKind::CmPowExp:
      return std::exp(-p[0] * std::pow(t, p[1]));
    case ScalarKind::CmNegPow:
      // diverges at t = 0; well defined on (0, inf)
      return std::exp(p[0] * std::pow(t, p[1]));
    case ScalarKind::CmSech: {
      const double e = p[0] * std::sqrt(t);
      return std::pow(2.0 / (std::exp(e) + std::exp(-e)), p[1]);
    }
    case ScalarKind::CmCauchy:
      return std::pow(1.0 + p[0] * std::pow(t, p[2]), -p[1]);
    case ScalarKind::BfPowerPlusOne:
      return std::pow(p[0] * std::pow(t, p[2]) + 1.0, p[1]);
    case ScalarKind::BfLogRatio:
      return std::log(p[0] * std::pow(t, p[2]) + p[1]) / std::log(p[1]);
    case ScalarKind::BfPowerPlusBeta:
      return std::pow(t, p[0]) + p[1];
    case ScalarKind::BfExpSaturate:
      return p[1] - std::exp(-p[0] * t);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::function<double(double)> scalar_fn(const ScalarFamily& f) {
  check_scalar_params(f);
  return [f](double t) { return eval_scalar(f, t); };
}

std::function<double(double)> fn_product(std::function<double(double)> a,
                                         std::function<double(double)> b) {
  return [a = std::move(a), b = std::move(b)](double t) { return a(t) * b(t); };
}

std::function<double(double)> fn_sum(std::function<double(double)> a,
                                     std::function<double(double)> b) {
  return [a = std::move(a), b = std::move(b)](double t) { return a(t) + b(t); };
}

void check_kernel_params(const Kernel& k) {
  if (!(k.theta1 > 0.0)) fail(Errc::OutOfDomainParam, "kernel requires theta1 > 0");
  if (k.kind == KernelKind::Exponential && !(k.theta2 > 0.0))
    fail(Errc::OutOfDomainParam, "exponential kernel requires theta2 > 0");
}

double eval_kernel(const Kernel& k, double x) {
  if (x < 0.0) return 0.0;
  switch (k.kind) {
    case KernelKind::Exponential:
      return k.theta1 * std::exp(-x / k.theta2);
    case KernelKind::Mariah:
      return 0.5 / (1.0 + x / k.theta1);
  }
  return 0.0;
}

namespace {

// j-th derivative estimate by the central difference of order j.  The step
// grows with the order: h_j = max(t,1) * eps^(1/(j+2)) keeps truncation and
// roundoff below the check tolerance (the j = 2 value is ~1e-4 * max(t,1)).
double central_diff(const std::function<double(double)>& f, double t, int j) {
  if (j == 0) return f(t);
  static const double eps = std::numeric_limits<double>::epsilon();
  double h = std::max(t, 1.0) * std::pow(eps, 1.0 / (j + 2));
  // keep all sample points strictly positive
  if (t - 0.5 * j * h <= 0.0) h = 1.8 * t / j;
  double acc = 0.0;
  double binom = 1.0;
  for (int i = 0; i <= j; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    acc += sign * binom * f(t + (0.5 * j - i) * h);
    binom = binom * (j - i) / (i + 1);
  }
  return acc / std::pow(h, j);
}

}  // namespace

MonotonicityReport check_complete_monotonicity(const std::function<double(double)>& f,
                                               std::span<const double> grid, int order) {
  constexpr double kTol = -1e-6;
  MonotonicityReport rep;
  for (double t : grid) {
    if (!(t > 0.0)) continue;
    ++rep.points_checked;
    for (int j = 0; j <= order; ++j) {
      const double dj = central_diff(f, t, j);
      const double signed_est = ((j % 2 == 0) ? 1.0 : -1.0) * dj;
      rep.worst = std::min(rep.worst, signed_est);
      if (signed_est < kTol) {
        rep.all_pass = false;
        rep.failures.push_back({t, j, signed_est});
      }
    }
  }
  return rep;
}

MonotonicityReport check_complete_monotonicity(const ScalarFamily& f,
                                               std::span<const double> grid, int order) {
  check_scalar_params(f);
  return check_complete_monotonicity([&f](double t) { return eval_scalar(f, t); }, grid, order);
}

}  // namespace streamcov
