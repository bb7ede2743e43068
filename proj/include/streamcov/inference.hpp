#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamcov/models.hpp"

namespace streamcov {

/// Space-time observation records: responses with a linear mean over
/// covariates (intercept column included in X), sites deduplicated so that
/// spatially coincident records share a site index.  The network index and
/// the site-pair table are built once and shared by record subsets.
struct Dataset {
  Network net;
  std::vector<PointOnNetwork> sites;
  std::vector<int> site_of_record;
  std::vector<double> time_of_record;
  Eigen::VectorXd response;
  Eigen::MatrixXd X;

  std::shared_ptr<const NetworkIndex> index;
  std::shared_ptr<const PairTable> table;

  int n_records() const { return static_cast<int>(site_of_record.size()); }
  int n_sites() const { return static_cast<int>(sites.size()); }

  /// Covariates WITHOUT the intercept; a leading column of ones is added.
  /// Throws DimensionMismatch / DuplicateRecord.
  static Dataset build(Network net, std::vector<PointOnNetwork> record_sites,
                       std::vector<double> times, Eigen::VectorXd response,
                       Eigen::MatrixXd covariates);

  /// Record subset sharing the network index, pair table, and site list.
  Dataset subset(std::span<const int> records) const;
};

// --- parameter plumbing for fitting ------------------------------------------

enum class Xform {
  Log,             // (0, inf)
  Logit01,         // [0, 1] boxes (open in the transform)
  Logit02,         // (0, 2]
  Above,           // lo + softplus(raw)
  AboveHalfBeta,   // model1 tau >= beta/2, slack softplus-transformed
  AboveDeltaBound, // model3 delta >= 2*ceil(m/2)+1
  NegLog,          // (-inf, 0)
};

struct ParamSpec {
  std::string name;
  Xform xf = Xform::Log;
  double lo = 0.0;  // used by Above
};

/// Full parameter list for the variant, covariance parameters first
/// (sigma2, nugget last).  Order matters: model1 lists beta before tau.
std::vector<ParamSpec> param_specs(const CovModel& m);
double get_param(const CovModel& m, const std::string& name);
void set_param(CovModel& m, const std::string& name, double value);

// --- Gaussian machinery -------------------------------------------------------

struct FitOptions {
  int max_evals = 4000;
  double ftol = 1e-9;
  int restarts = 2;
  Exec exec = Exec::Parallel;
};

struct FitResult {
  CovModel model;
  Eigen::VectorXd beta;
  double loglik = 0.0;
  double bic = 0.0;
  int n_params = 0;  // free covariance parameters + regression coefficients
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  int jitter_retries = 0;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> observed;
  std::optional<double> crps;
  bool on_training_record = false;
};

struct PredictionResult {
  std::vector<Prediction> rows;
  std::vector<std::string> warnings;
};

struct KrigeTarget {
  PointOnNetwork site;
  double time = 0.0;
  Eigen::VectorXd x;  // covariates including the intercept
  std::optional<double> observed;
};

/// Gaussian log likelihood with the given mean coefficients, computed through
/// a Cholesky factorization (the explicit inverse is never formed).
double log_likelihood(const Dataset& data, const CovModel& model, const Eigen::VectorXd& beta,
                      Exec exec = Exec::Parallel);

/// Generalized least squares profile of the linear mean.
Eigen::VectorXd profile_beta(const Dataset& data, const CovModel& model,
                             Exec exec = Exec::Parallel);

/// Maximum likelihood over the named free covariance parameters (beta is
/// profiled at every step).  Parameters are optimized on transformed
/// unconstrained scales; an empty free list reduces to one GLS solve.
FitResult fit_ml(const Dataset& data, const CovModel& init,
                 const std::vector<std::string>& free_names, const FitOptions& opt = {});

/// Universal kriging predictor with the variance correction for the
/// estimated mean.  Exact interpolation at training records when nugget = 0.
PredictionResult krige(const Dataset& data, const CovModel& model,
                       std::span<const KrigeTarget> targets, Exec exec = Exec::Parallel);

/// Closed-form Gaussian CRPS: sd * [w(2 Phi(w) - 1) + 2 phi(w) - 1/sqrt(pi)],
/// w = (y - mean)/sd.  Throws NonpositiveSd.
double crps_gaussian(double mean, double sd, double y);

struct FoldMetrics {
  int fold = 0;
  int n_test = 0;
  double loglik = 0.0;
  double bic = 0.0;
  double rmspe = 0.0;
  double crps = 0.0;
};

struct CvResult {
  std::vector<FoldMetrics> folds;
  double loglik = 0.0, bic = 0.0, rmspe = 0.0, crps = 0.0;  // averages
  std::vector<int> fold_of_site;
};

/// K-fold cross validation split BY SITE: every record of a held-out site
/// leaves together.  The assignment is a deterministic seed-driven shuffle
/// of the canonically ordered sites, so record order does not matter.
CvResult cross_validate(const Dataset& data, const CovModel& init,
                        const std::vector<std::string>& free_names, int k, std::uint64_t seed,
                        const FitOptions& opt = {});

/// Gaussian sample z = X beta + L eps with L the Cholesky factor of the
/// model covariance; deterministic for a given seed.
Eigen::VectorXd simulate(const Dataset& design, const CovModel& model, const Eigen::VectorXd& beta,
                         std::uint64_t seed, Exec exec = Exec::Parallel);

}  // namespace streamcov
