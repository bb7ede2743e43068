#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "streamcov/functions.hpp"
#include "streamcov/network.hpp"

namespace streamcov {

// ---------------------------------------------------------------------------
// Model zoo.  All families evaluate a unit-scale profile C0; the observation
// covariance is sigma2 * C0 plus a pure spatial nugget on coincident sites.
// ---------------------------------------------------------------------------

/// (kappa d^b + 1)^-tau * exp(-c (u^2 / (kappa d^b + 1)^beta)^nu);
/// beta is the space-time interaction parameter, beta = 0 is separable.
struct Model1Params {
  double c = 1, nu = 1, kappa = 1, beta = 0.5, tau = 0.5, b = 1;
};

/// 2^nu (d^b + 1)^-alpha {exp(c u^a / sqrt(d^b + 1)) + exp(-c u^a / sqrt(d^b + 1))}^-nu
struct Model2Params {
  double a = 1, alpha = 1, b = 1, c = 1, nu = 1;
};

/// Powered linear with sill: (1 - (d/alpha + u/beta)^nu)_+^delta, compactly
/// supported; delta must satisfy delta >= 2*ceil(m/2) + 1 for a tree with m
/// leaves.
struct Model3Params {
  double alpha = 1, beta = 1, nu = 1, delta = 7;
};

/// Mariah tail-up times a cosine plus an exponential tail-down times an
/// exponential in time; three branches by flow relation.
struct Model4Params {
  double theta1 = 1, theta2 = 1, theta3 = 1, theta4 = 1;
};

/// Inverse-linear metric form (d/theta1 + u^theta3/theta2 + 1)^-theta4.
struct Model5Params {
  double theta1 = 1, theta2 = 1, theta3 = 1, theta4 = 1;
};

/// Model 1 with the interaction frozen at zero.
struct SeparableParams {
  double c = 1, nu = 1, kappa = 1, tau = 0.5, b = 1;
};

struct TailUpParams {
  Kernel kernel;
};

struct TailDownParams {
  Kernel kernel;
};

/// psi(d^b)^-alpha * phi(u^{2a} / psi(d^b)) with phi completely monotone and
/// psi a positive Bernstein function; alpha >= 1/2, a, b in (0, 1].
struct GneitingParams {
  ScalarFamily phi{ScalarKind::CmPowExp, {1.0, 1.0}};
  ScalarFamily psi{ScalarKind::BfPowerPlusOne, {1.0, 1.0, 1.0}};
  double alpha = 0.5, a = 1.0, b = 1.0;
};

enum class Variant { Model1, Model2, Model3, Model4, Model5, Separable, TailUp, TailDown, Gneiting };

const char* variant_name(Variant v);

struct CovModel {
  Variant variant = Variant::Model5;
  std::variant<Model1Params, Model2Params, Model3Params, Model4Params, Model5Params,
               SeparableParams, TailUpParams, TailDownParams, GneitingParams>
      params{Model5Params{}};
  double sigma2 = 1.0;
  double nugget = 0.0;
};

/// Throws InvalidParams (message names the violated inequality),
/// DeltaTooSmallForTree, or HypothesisViolation.  leaf_count enables the
/// Model 3 bound check.
void check_model_params(const CovModel& m, std::optional<int> leaf_count = {});

// --- scalar evaluators -----------------------------------------------------

double cov_model1(double d, double u, const Model1Params& p);
double cov_model2(double d, double u, const Model2Params& p);
double cov_model3(double d, double u, const Model3Params& p, int leaf_count);
double cov_model4(const FlowRelation& rel, double weight, double u, const Model4Params& p);
double cov_model5(double d, double u, const Model5Params& p);
double cov_separable(double d, double u, const SeparableParams& p);

/// Tail-up moving-average covariance: zero for flow-unconnected pairs,
/// weight times the kernel self-convolution integral otherwise.  Closed
/// forms: exponential -> (theta1^2 theta2 / 2) exp(-d/theta2); Mariah ->
/// (1/2) log(d/theta1 + 1) / (d/theta1), continuous value 1/2 at d = 0
/// (the kernel is rescaled so the zero-lag value is 1/2).
double cov_tailup(const FlowRelation& rel, double weight, const Kernel& k);

/// Tail-down covariance; exponential kernel has the closed form
/// (theta1^2 theta2 / 2) exp(-d/theta2) in both branches, the Mariah branch
/// integrals are evaluated by adaptive quadrature (abs tol 1e-10).
double cov_taildown(const FlowRelation& rel, const Kernel& k);

double cov_gneiting(double d, double u, const GneitingParams& p);

/// Corollary-style scale mixture over a mixing density supported on (0, inf):
/// \int C_S(d; a) C_T(u; a) mu'(a) da by adaptive quadrature (abs tol 1e-9).
double cov_scale_mixture(const std::function<double(double, double)>& cov_s,
                         const std::function<double(double, double)>& cov_t,
                         const std::function<double(double)>& mixing_density, double d, double u,
                         double abs_tol = 1e-9);

// --- pair-level evaluation ---------------------------------------------------

/// Everything a model needs to evaluate one record pair.  rel is present only
/// on directed networks; isotropic families use d alone.
struct PairContext {
  double d = 0.0;
  std::optional<FlowRelation> rel;
  double weight = 1.0;
  double u = 0.0;
  bool same_site = false;
};

/// C0 for the pair.  Flow-direction families require ctx.rel (NotDirected
/// otherwise); Model 3 requires the leaf count.
double unit_covariance(const CovModel& m, const PairContext& ctx, int leaf_count = -1);

/// sigma2 * C0 + nugget * 1{same site}; the nugget is purely spatial and
/// applies at any time lag.
double full_covariance(const CovModel& m, const PairContext& ctx, int leaf_count = -1);

// --- precomputed pairwise structure ------------------------------------------

/// Site-pair geometry computed once per dataset: network metric, flow
/// relations, and tail-up weights.  On trees the metric is the geodesic
/// distance; on graphs with cycles the resistance metric is used instead
/// (the two agree on trees).  Immutable after construction.
class PairTable {
 public:
  PairTable(const NetworkIndex& idx, std::span<const PointOnNetwork> sites);

  int n_sites() const { return n_; }
  int leaf_count() const { return leaves_; }
  bool directed() const { return directed_; }

  PairContext context(int i, int j, double u) const;
  double distance(int i, int j) const { return d_(i, j); }

 private:
  int n_ = 0;
  int leaves_ = 0;
  bool directed_ = false;
  Eigen::MatrixXd d_, a_, b_, w_;
  std::vector<char> kind_;  // FlowKind per pair (row-major), directed only
  std::vector<char> same_;  // spatial coincidence per pair (row-major)
};

enum class Exec { Serial, Parallel };

/// Assembles the symmetric record-pair matrix for an arbitrary pair kernel.
/// Rows are distributed over OpenMP threads in the Parallel mode; every entry
/// is computed by the same expression either way, so the two modes agree
/// bitwise.
template <class F>
Eigen::MatrixXd assemble_matrix(F&& entry, const PairTable& table,
                                std::span<const int> site_of_record,
                                std::span<const double> times, Exec exec = Exec::Parallel) {
  const int n = static_cast<int>(site_of_record.size());
  Eigen::MatrixXd m(n, n);
  auto fill_row = [&](int i) {
    for (int j = i; j < n; ++j) {
      const PairContext ctx =
          table.context(site_of_record[i], site_of_record[j], std::abs(times[i] - times[j]));
      const double v = entry(ctx);
      m(i, j) = v;
      m(j, i) = v;
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < n; ++i) fill_row(i);
  } else {
    for (int i = 0; i < n; ++i) fill_row(i);
  }
  return m;
}

Eigen::MatrixXd build_covariance_matrix(const CovModel& model, const PairTable& table,
                                        std::span<const int> site_of_record,
                                        std::span<const double> times,
                                        Exec exec = Exec::Parallel);

/// One record per point convenience overload.
Eigen::MatrixXd build_covariance_matrix(const CovModel& model, const Network& net,
                                        std::span<const PointOnNetwork> points,
                                        std::span<const double> times,
                                        Exec exec = Exec::Parallel);

using PairEvaluator = std::function<double(const PairContext&)>;

Eigen::MatrixXd build_matrix(const PairEvaluator& entry, const PairTable& table,
                             std::span<const int> site_of_record, std::span<const double> times,
                             Exec exec = Exec::Parallel);

}  // namespace streamcov
