#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "streamcov/error.hpp"

namespace streamcov {

/// The catalog of scalar building blocks: completely monotone functions phi
/// and positive Bernstein functions psi.  Parameter layouts:
///   CmPowExp        exp(-c t^nu)                      {c, nu}
///   CmNegPow        exp(c t^nu), nu < 0               {c, nu}
///   CmSech          (2 / (e^{c sqrt t} + e^{-c sqrt t}))^nu   {c, nu}
///   CmCauchy        (1 + c t^gamma)^{-nu}             {c, nu, gamma}
///   BfPowerPlusOne  (kappa t^lambda + 1)^beta         {kappa, beta, lambda}
///   BfLogRatio      log(kappa t^lambda + beta)/log(beta)  {kappa, beta, lambda}
///   BfPowerPlusBeta t^lambda + beta                   {lambda, beta}
///   BfExpSaturate   beta - exp(-kappa t)              {kappa, beta}
enum class ScalarKind {
  CmPowExp,
  CmNegPow,
  CmSech,
  CmCauchy,
  BfPowerPlusOne,
  BfLogRatio,
  BfPowerPlusBeta,
  BfExpSaturate,
};

struct ScalarFamily {
  ScalarKind kind = ScalarKind::CmPowExp;
  std::vector<double> params;
};

bool is_completely_monotone_family(ScalarKind k);
bool is_bernstein_family(ScalarKind k);
const std::vector<std::string>& scalar_param_names(ScalarKind k);

/// Throws OutOfDomainParam when a parameter leaves its box.
void check_scalar_params(const ScalarFamily& f);

double eval_scalar(const ScalarFamily& f, double t);

/// Convenience: the family as a plain callable.
std::function<double(double)> scalar_fn(const ScalarFamily& f);

/// Pointwise product / sum of callables; completely monotone inputs give a
/// completely monotone result, which is how composite phi's are built.
std::function<double(double)> fn_product(std::function<double(double)> a,
                                         std::function<double(double)> b);
std::function<double(double)> fn_sum(std::function<double(double)> a,
                                     std::function<double(double)> b);

/// Unilateral moving-average kernels; zero for x < 0.
///   Exponential  g(x) = theta1 exp(-x/theta2)
///   Mariah       g(x) = (1/2) / (1 + x/theta1)
enum class KernelKind { Exponential, Mariah };

struct Kernel {
  KernelKind kind = KernelKind::Exponential;
  double theta1 = 1.0;
  double theta2 = 1.0;  // unused by Mariah
};

void check_kernel_params(const Kernel& k);
double eval_kernel(const Kernel& k, double x);

struct MonotonicityFailure {
  double t = 0.0;
  int order = 0;
  double estimate = 0.0;  // signed (-1)^j * D_j estimate that violated the bound
};

struct MonotonicityReport {
  bool all_pass = true;
  int points_checked = 0;
  double worst = 0.0;  // most negative signed estimate seen
  std::vector<MonotonicityFailure> failures;
};

/// Finite-difference check of the alternating-derivative-sign property
/// (-1)^j f^(j)(t) >= 0 for j = 0..order on the given grid in (0, inf).
/// Estimates use central differences with a per-order step; tolerance -1e-6.
MonotonicityReport check_complete_monotonicity(const std::function<double(double)>& f,
                                               std::span<const double> grid, int order);

MonotonicityReport check_complete_monotonicity(const ScalarFamily& f,
                                               std::span<const double> grid, int order);

}  // namespace streamcov
