#include "streamcov/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "streamcov/rng.hpp"
#include "streamcov/simplex.hpp"

namespace streamcov {

// --- Dataset -------------------------------------------------------------------

Dataset Dataset::build(Network net, std::vector<PointOnNetwork> record_sites,
                       std::vector<double> times, Eigen::VectorXd response,
                       Eigen::MatrixXd covariates) {
  Dataset d;
  const int n = static_cast<int>(record_sites.size());
  if (static_cast<int>(times.size()) != n || response.size() != n ||
      (covariates.size() != 0 && covariates.rows() != n))
    fail(Errc::DimensionMismatch, "records, times, responses and covariates must align");

  d.net = std::move(net);
  d.index = std::make_shared<NetworkIndex>(d.net);
  d.time_of_record = std::move(times);
  d.response = std::move(response);

  // deduplicate spatially coincident sites
  d.site_of_record.resize(n);
  for (int r = 0; r < n; ++r) {
    d.index->check_point(record_sites[r]);
    int found = -1;
    for (int s = 0; s < static_cast<int>(d.sites.size()) && found < 0; ++s)
      if (d.index->same_point(d.sites[s], record_sites[r])) found = s;
    if (found < 0) {
      found = static_cast<int>(d.sites.size());
      d.sites.push_back(record_sites[r]);
    }
    d.site_of_record[r] = found;
  }

  std::set<std::pair<int, double>> seen;
  for (int r = 0; r < n; ++r)
    if (!seen.insert({d.site_of_record[r], d.time_of_record[r]}).second)
      fail(Errc::DuplicateRecord, "duplicated (site, time) record at row " + std::to_string(r));

  const int k = covariates.size() == 0 ? 0 : static_cast<int>(covariates.cols());
  d.X.resize(n, k + 1);
  d.X.col(0).setOnes();
  if (k > 0) d.X.rightCols(k) = covariates;

  d.table = std::make_shared<PairTable>(*d.index, d.sites);
  return d;
}

Dataset Dataset::subset(std::span<const int> records) const {
  Dataset d;
  d.net = net;
  d.sites = sites;
  d.index = index;
  d.table = table;
  const int m = static_cast<int>(records.size());
  d.site_of_record.resize(m);
  d.time_of_record.resize(m);
  d.response.resize(m);
  d.X.resize(m, X.cols());
  for (int i = 0; i < m; ++i) {
    const int r = records[i];
    d.site_of_record[i] = site_of_record[r];
    d.time_of_record[i] = time_of_record[r];
    d.response(i) = response(r);
    d.X.row(i) = X.row(r);
  }
  return d;
}

// --- parameter specs -----------------------------------------------------------

namespace {

Xform scalar_param_xform(ScalarKind kind, const std::string& pname) {
  switch (kind) {
    case ScalarKind::CmPowExp:
      return pname == "nu" ? Xform::Logit01 : Xform::Log;
    case ScalarKind::CmNegPow:
      return pname == "nu" ? Xform::NegLog : Xform::Log;
    case ScalarKind::CmSech:
      return Xform::Log;
    case ScalarKind::CmCauchy:
      return pname == "gamma" ? Xform::Logit01 : Xform::Log;
    case ScalarKind::BfPowerPlusOne:
      return pname == "kappa" ? Xform::Log : Xform::Logit01;
    case ScalarKind::BfLogRatio:
      if (pname == "kappa") return Xform::Log;
      return pname == "beta" ? Xform::Above : Xform::Logit01;
    case ScalarKind::BfPowerPlusBeta:
      return pname == "lambda" ? Xform::Logit01 : Xform::Log;
    case ScalarKind::BfExpSaturate:
      return pname == "beta" ? Xform::Above : Xform::Log;
  }
  return Xform::Log;
}

double scalar_param_lo(ScalarKind kind, const std::string& pname) {
  if ((kind == ScalarKind::BfLogRatio || kind == ScalarKind::BfExpSaturate) && pname == "beta")
    return 1.0;
  return 0.0;
}

}  // namespace

std::vector<ParamSpec> param_specs(const CovModel& m) {
  std::vector<ParamSpec> s;
  switch (m.variant) {
    case Variant::Model1:
      s = {{"c", Xform::Log},   {"nu", Xform::Logit01}, {"kappa", Xform::Log},
           {"beta", Xform::Logit01}, {"tau", Xform::AboveHalfBeta}, {"b", Xform::Logit01}};
      break;
    case Variant::Model2:
      s = {{"a", Xform::Logit01},
           {"alpha", Xform::Above, 0.5},
           {"b", Xform::Logit01},
           {"c", Xform::Log},
           {"nu", Xform::Log}};
      break;
    case Variant::Model3:
      s = {{"alpha", Xform::Log},
           {"beta", Xform::Log},
           {"nu", Xform::Logit01},
           {"delta", Xform::AboveDeltaBound}};
      break;
    case Variant::Model4:
    case Variant::Model5:
      s = {{"theta1", Xform::Log}, {"theta2", Xform::Log}, {"theta3", Xform::Log},
           {"theta4", Xform::Log}};
      if (m.variant == Variant::Model5) s[2].xf = Xform::Logit02;
      break;
    case Variant::Separable:
      s = {{"c", Xform::Log},
           {"nu", Xform::Logit01},
           {"kappa", Xform::Log},
           {"tau", Xform::Log},
           {"b", Xform::Logit01}};
      break;
    case Variant::TailUp:
    case Variant::TailDown: {
      const Kernel& k = m.variant == Variant::TailUp
                            ? std::get<TailUpParams>(m.params).kernel
                            : std::get<TailDownParams>(m.params).kernel;
      s = {{"theta1", Xform::Log}};
      if (k.kind == KernelKind::Exponential) s.push_back({"theta2", Xform::Log});
      break;
    }
    case Variant::Gneiting: {
      const auto& p = std::get<GneitingParams>(m.params);
      for (const auto& n : scalar_param_names(p.phi.kind))
        s.push_back({"phi." + n, scalar_param_xform(p.phi.kind, n),
                     scalar_param_lo(p.phi.kind, n)});
      for (const auto& n : scalar_param_names(p.psi.kind))
        s.push_back({"psi." + n, scalar_param_xform(p.psi.kind, n),
                     scalar_param_lo(p.psi.kind, n)});
      s.push_back({"alpha", Xform::Above, 0.5});
      s.push_back({"a", Xform::Logit01});
      s.push_back({"b", Xform::Logit01});
      break;
    }
  }
  s.push_back({"sigma2", Xform::Log});
  s.push_back({"nugget", Xform::Log});
  return s;
}

namespace {

double* param_slot(CovModel& m, const std::string& name) {
  if (name == "sigma2") return &m.sigma2;
  if (name == "nugget") return &m.nugget;
  switch (m.variant) {
    case Variant::Model1: {
      auto& p = std::get<Model1Params>(m.params);
      if (name == "c") return &p.c;
      if (name == "nu") return &p.nu;
      if (name == "kappa") return &p.kappa;
      if (name == "beta") return &p.beta;
      if (name == "tau") return &p.tau;
      if (name == "b") return &p.b;
      break;
    }
    case Variant::Model2: {
      auto& p = std::get<Model2Params>(m.params);
      if (name == "a") return &p.a;
      if (name == "alpha") return &p.alpha;
      if (name == "b") return &p.b;
      if (name == "c") return &p.c;
      if (name == "nu") return &p.nu;
      break;
    }
    case Variant::Model3: {
      auto& p = std::get<Model3Params>(m.params);
      if (name == "alpha") return &p.alpha;
      if (name == "beta") return &p.beta;
      if (name == "nu") return &p.nu;
      if (name == "delta") return &p.delta;
      break;
    }
    case Variant::Model4: {
      auto& p = std::get<Model4Params>(m.params);
      if (name == "theta1") return &p.theta1;
      if (name == "theta2") return &p.theta2;
      if (name == "theta3") return &p.theta3;
      if (name == "theta4") return &p.theta4;
      break;
    }
    case Variant::Model5: {
      auto& p = std::get<Model5Params>(m.params);
      if (name == "theta1") return &p.theta1;
      if (name == "theta2") return &p.theta2;
      if (name == "theta3") return &p.theta3;
      if (name == "theta4") return &p.theta4;
      break;
    }
    case Variant::Separable: {
      auto& p = std::get<SeparableParams>(m.params);
      if (name == "c") return &p.c;
      if (name == "nu") return &p.nu;
      if (name == "kappa") return &p.kappa;
      if (name == "tau") return &p.tau;
      if (name == "b") return &p.b;
      break;
    }
    case Variant::TailUp:
    case Variant::TailDown: {
      Kernel& k = m.variant == Variant::TailUp ? std::get<TailUpParams>(m.params).kernel
                                               : std::get<TailDownParams>(m.params).kernel;
      if (name == "theta1") return &k.theta1;
      if (name == "theta2" && k.kind == KernelKind::Exponential) return &k.theta2;
      break;
    }
    case Variant::Gneiting: {
      auto& p = std::get<GneitingParams>(m.params);
      if (name == "alpha") return &p.alpha;
      if (name == "a") return &p.a;
      if (name == "b") return &p.b;
      for (ScalarFamily* fam : {&p.phi, &p.psi}) {
        const std::string prefix = fam == &p.phi ? "phi." : "psi.";
        const auto& names = scalar_param_names(fam->kind);
        for (size_t i = 0; i < names.size(); ++i)
          if (name == prefix + names[i]) return &fam->params[i];
      }
      break;
    }
  }
  return nullptr;
}

}  // namespace

double get_param(const CovModel& m, const std::string& name) {
  CovModel copy = m;
  double* p = param_slot(copy, name);
  if (!p) fail(Errc::UnknownParam, "unknown parameter '" + name + "' for " +
                                       variant_name(m.variant));
  return *p;
}

void set_param(CovModel& m, const std::string& name, double value) {
  double* p = param_slot(m, name);
  if (!p) fail(Errc::UnknownParam, "unknown parameter '" + name + "' for " +
                                       variant_name(m.variant));
  *p = value;
}

// --- transforms ------------------------------------------------------------------

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double softplus_inv(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }

double clamp_open01(double x) { return std::clamp(x, 1e-12, 1.0 - 1e-12); }

struct TransformContext {
  double delta_bound = 0.0;  // model3: 2*ceil(m/2)+1
};

double to_raw(const ParamSpec& spec, double x, double current_beta, const TransformContext& tc) {
  switch (spec.xf) {
    case Xform::Log:
      return std::log(std::max(x, 1e-300));
    case Xform::Logit01: {
      const double z = clamp_open01(x);
      return std::log(z / (1.0 - z));
    }
    case Xform::Logit02: {
      const double z = clamp_open01(x / 2.0);
      return std::log(z / (1.0 - z));
    }
    case Xform::Above:
      return softplus_inv(std::max(x - spec.lo, 1e-9));
    case Xform::AboveHalfBeta:
      return softplus_inv(std::max(x - 0.5 * current_beta, 1e-9));
    case Xform::AboveDeltaBound:
      return softplus_inv(std::max(x - tc.delta_bound, 1e-9));
    case Xform::NegLog:
      return std::log(std::max(-x, 1e-300));
  }
  return x;
}

double from_raw(const ParamSpec& spec, double r, double current_beta,
                const TransformContext& tc) {
  switch (spec.xf) {
    case Xform::Log:
      return std::exp(r);
    case Xform::Logit01:
      return 1.0 / (1.0 + std::exp(-r));
    case Xform::Logit02:
      return 2.0 / (1.0 + std::exp(-r));
    case Xform::Above:
      return spec.lo + softplus(r);
    case Xform::AboveHalfBeta:
      return 0.5 * current_beta + softplus(r);
    case Xform::AboveDeltaBound:
      return tc.delta_bound + softplus(r);
    case Xform::NegLog:
      return -std::exp(r);
  }
  return r;
}

// --- factorization helpers --------------------------------------------------------

struct GaussianFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double logdet = 0.0;
  bool jittered = false;
};

GaussianFactor factor_covariance(Eigen::MatrixXd sigma, bool allow_jitter) {
  GaussianFactor f;
  f.llt.compute(sigma);
  if (f.llt.info() != Eigen::Success) {
    if (!allow_jitter)
      fail(Errc::NotPositiveDefinite, "covariance factorization failed");
    // one retry with a trace-scaled ridge; routine for near-singular proposals
    const double jitter = 1e-10 * sigma.trace() / sigma.rows();
    sigma.diagonal().array() += jitter;
    f.llt.compute(sigma);
    f.jittered = true;
    if (f.llt.info() != Eigen::Success)
      fail(Errc::NotPositiveDefinite, "covariance factorization failed after jitter");
  }
  f.logdet = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  return f;
}

double loglik_from_factor(const GaussianFactor& f, const Eigen::VectorXd& resid) {
  const double n = static_cast<double>(resid.size());
  const double quad = resid.dot(f.llt.solve(resid));
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * f.logdet - 0.5 * quad;
}

Eigen::VectorXd gls_beta(const GaussianFactor& f, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& z, bool check_rank) {
  const Eigen::MatrixXd SiX = f.llt.solve(X);
  const Eigen::MatrixXd A = X.transpose() * SiX;
  if (check_rank) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < X.cols())
      fail(Errc::RankDeficientDesign, "design matrix is rank deficient");
  }
  return Eigen::LDLT<Eigen::MatrixXd>(A).solve(SiX.transpose() * z);
}

}  // namespace

double log_likelihood(const Dataset& data, const CovModel& model, const Eigen::VectorXd& beta,
                      Exec exec) {
  if (beta.size() != data.X.cols())
    fail(Errc::DimensionMismatch, "beta length does not match the design matrix");
  const Eigen::MatrixXd sigma =
      build_covariance_matrix(model, *data.table, data.site_of_record, data.time_of_record, exec);
  const GaussianFactor f = factor_covariance(sigma, /*allow_jitter=*/false);
  return loglik_from_factor(f, data.response - data.X * beta);
}

Eigen::VectorXd profile_beta(const Dataset& data, const CovModel& model, Exec exec) {
  const Eigen::MatrixXd sigma =
      build_covariance_matrix(model, *data.table, data.site_of_record, data.time_of_record, exec);
  const GaussianFactor f = factor_covariance(sigma, /*allow_jitter=*/false);
  return gls_beta(f, data.X, data.response, /*check_rank=*/true);
}

FitResult fit_ml(const Dataset& data, const CovModel& init,
                 const std::vector<std::string>& free_names, const FitOptions& opt) {
  TransformContext tc;
  tc.delta_bound = 2.0 * ((data.table->leaf_count() + 1) / 2) + 1.0;
  check_model_params(init, data.table->leaf_count());

  const auto all_specs = param_specs(init);
  std::vector<ParamSpec> free_specs;
  for (const auto& name : free_names) {
    auto it = std::find_if(all_specs.begin(), all_specs.end(),
                           [&](const ParamSpec& s) { return s.name == name; });
    if (it == all_specs.end())
      fail(Errc::UnknownParam,
           "unknown free parameter '" + name + "' for " + variant_name(init.variant));
    free_specs.push_back(*it);
  }
  // keep the declaration order so model1 beta decodes before tau
  std::stable_sort(free_specs.begin(), free_specs.end(), [&](const auto& a, const auto& b) {
    auto pos = [&](const std::string& n) {
      return std::find_if(all_specs.begin(), all_specs.end(),
                          [&](const ParamSpec& s) { return s.name == n; }) -
             all_specs.begin();
    };
    return pos(a.name) < pos(b.name);
  });

  const int k = static_cast<int>(free_specs.size());
  int jitter_retries = 0;

  auto decode = [&](const Eigen::VectorXd& raw) {
    CovModel m = init;
    for (int i = 0; i < k; ++i) {
      const double beta_now =
          init.variant == Variant::Model1 ? get_param(m, "beta") : 0.0;
      set_param(m, free_specs[i].name, from_raw(free_specs[i], raw(i), beta_now, tc));
    }
    return m;
  };

  auto objective = [&](const Eigen::VectorXd& raw) -> double {
    const CovModel m = decode(raw);
    try {
      const Eigen::MatrixXd sigma = build_covariance_matrix(
          m, *data.table, data.site_of_record, data.time_of_record, opt.exec);
      const GaussianFactor f = factor_covariance(sigma, /*allow_jitter=*/true);
      if (f.jittered) ++jitter_retries;
      const Eigen::VectorXd beta = gls_beta(f, data.X, data.response, /*check_rank=*/false);
      return -loglik_from_factor(f, data.response - data.X * beta);
    } catch (const Error&) {
      return 1e300;
    }
  };

  // the design is checked for rank once up front
  {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(data.X.transpose() * data.X);
    if (lu.rank() < data.X.cols())
      fail(Errc::RankDeficientDesign, "design matrix is rank deficient");
  }

  Eigen::VectorXd raw0(k);
  for (int i = 0; i < k; ++i)
    raw0(i) = to_raw(free_specs[i], get_param(init, free_specs[i].name),
                     init.variant == Variant::Model1 ? get_param(init, "beta") : 0.0, tc);

  FitResult out;
  if (k == 0) {
    out.model = init;
    out.converged = true;
    out.evaluations = 1;
  } else {
    SimplexOptions sopt;
    sopt.max_evals = opt.max_evals;
    sopt.ftol = opt.ftol;
    sopt.restarts = opt.restarts;
    const double f0 = objective(raw0);
    if (f0 >= 1e300)
      fail(Errc::NotPositiveDefinite, "covariance is not positive definite at the initial point");
    const SimplexResult sr = nelder_mead(objective, raw0, sopt);
    out.model = decode(sr.x);
    out.converged = sr.converged;
    out.iterations = sr.iterations;
    out.evaluations = sr.evaluations + 1;
  }

  const Eigen::MatrixXd sigma = build_covariance_matrix(
      out.model, *data.table, data.site_of_record, data.time_of_record, opt.exec);
  const GaussianFactor f = factor_covariance(sigma, /*allow_jitter=*/true);
  out.beta = gls_beta(f, data.X, data.response, /*check_rank=*/false);
  out.loglik = loglik_from_factor(f, data.response - data.X * out.beta);
  out.jitter_retries = jitter_retries;
  out.n_params = k + static_cast<int>(data.X.cols());
  out.bic = -2.0 * out.loglik + out.n_params * std::log(static_cast<double>(data.n_records()));
  return out;
}

PredictionResult krige(const Dataset& data, const CovModel& model,
                       std::span<const KrigeTarget> targets, Exec exec) {
  check_model_params(model, data.table->leaf_count());
  PredictionResult out;
  const int n = data.n_records();
  const int p = static_cast<int>(data.X.cols());

  // map every target site onto the union site list
  std::vector<PointOnNetwork> union_sites = data.sites;
  std::vector<int> target_site(targets.size(), -1);
  for (size_t t = 0; t < targets.size(); ++t) {
    if (targets[t].x.size() != p)
      fail(Errc::DimensionMismatch, "target covariates do not match the design matrix");
    data.index->check_point(targets[t].site);
    for (int s = 0; s < static_cast<int>(union_sites.size()); ++s)
      if (data.index->same_point(union_sites[s], targets[t].site)) {
        target_site[t] = s;
        break;
      }
    if (target_site[t] < 0) {
      target_site[t] = static_cast<int>(union_sites.size());
      union_sites.push_back(targets[t].site);
    }
  }
  const bool new_sites = static_cast<int>(union_sites.size()) > data.n_sites();
  std::shared_ptr<const PairTable> table =
      new_sites ? std::make_shared<PairTable>(*data.index, union_sites) : data.table;
  const int leaves = table->leaf_count();

  const Eigen::MatrixXd sigma =
      build_covariance_matrix(model, *table, data.site_of_record, data.time_of_record, exec);
  const GaussianFactor f = factor_covariance(sigma, /*allow_jitter=*/false);
  const Eigen::VectorXd beta = gls_beta(f, data.X, data.response, /*check_rank=*/true);
  const Eigen::VectorXd resid = data.response - data.X * beta;
  const Eigen::VectorXd si_resid = f.llt.solve(resid);
  const Eigen::MatrixXd SiX = f.llt.solve(data.X);
  const Eigen::LDLT<Eigen::MatrixXd> xtsx(data.X.transpose() * SiX);

  const PairContext self{0.0, data.net.directed ? std::optional<FlowRelation>(FlowRelation{})
                                                : std::nullopt,
                         1.0, 0.0, true};
  const double prior_var = full_covariance(model, self, leaves);

  bool clamp_warned = false;
  bool nugget_warned = false;
  for (size_t t = 0; t < targets.size(); ++t) {
    Eigen::VectorXd c0(n);
    bool on_record = false;
    for (int i = 0; i < n; ++i) {
      const double u = std::abs(targets[t].time - data.time_of_record[i]);
      const PairContext ctx = table->context(target_site[t], data.site_of_record[i], u);
      c0(i) = full_covariance(model, ctx, leaves);
      if (ctx.same_site && u == 0.0) on_record = true;
    }
    Prediction pred;
    pred.on_training_record = on_record;
    pred.mean = targets[t].x.dot(beta) + c0.dot(si_resid);
    const Eigen::VectorXd m0 = targets[t].x - SiX.transpose() * c0;
    double var = prior_var - c0.dot(f.llt.solve(c0)) + m0.dot(xtsx.solve(m0));
    if (var < 0.0) {
      if (var < -1e-10 && !clamp_warned) {
        out.warnings.push_back("negative kriging variance clamped to zero (" +
                               std::to_string(var) + ")");
        clamp_warned = true;
      }
      var = 0.0;
    }
    pred.variance = var;
    if (on_record && model.nugget > 0.0 && !nugget_warned) {
      out.warnings.push_back(
          "TargetOnTrainingRecordWithNugget: a target coincides with a training record; the "
          "site-level nugget makes the predictor reproduce the observation");
      nugget_warned = true;
    }
    if (targets[t].observed) {
      pred.observed = targets[t].observed;
      const double sd = std::sqrt(pred.variance);
      pred.crps = sd > 0.0 ? crps_gaussian(pred.mean, sd, *targets[t].observed)
                           : std::abs(*targets[t].observed - pred.mean);
    }
    out.rows.push_back(std::move(pred));
  }
  return out;
}

double crps_gaussian(double mean, double sd, double y) {
  if (!(sd > 0.0)) fail(Errc::NonpositiveSd, "CRPS requires sd > 0");
  const double w = (y - mean) / sd;
  const double cdf = 0.5 * std::erfc(-w / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * w * w) / std::sqrt(2.0 * std::numbers::pi);
  return sd * (w * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::sqrt(std::numbers::pi));
}

CvResult cross_validate(const Dataset& data, const CovModel& init,
                        const std::vector<std::string>& free_names, int k, std::uint64_t seed,
                        const FitOptions& opt) {
  if (k < 2 || k > data.n_sites())
    fail(Errc::DimensionMismatch, "fold count must be between 2 and the site count");

  // canonical site order (edge id, offset), then a seed-driven shuffle
  std::vector<int> order(data.n_sites());
  for (int i = 0; i < data.n_sites(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& sa = data.sites[a];
    const auto& sb = data.sites[b];
    return sa.edge != sb.edge ? sa.edge < sb.edge : sa.offset < sb.offset;
  });
  Rng rng(seed, "cv-folds");
  for (int i = data.n_sites() - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_int(0, i)]);

  CvResult out;
  out.fold_of_site.assign(data.n_sites(), 0);
  for (int i = 0; i < data.n_sites(); ++i) out.fold_of_site[order[i]] = i % k;

  out.folds.resize(k);
  std::exception_ptr first_error;
#pragma omp parallel for schedule(dynamic)
  for (int f = 0; f < k; ++f) {
    try {
      std::vector<int> train, test;
      for (int r = 0; r < data.n_records(); ++r)
        (out.fold_of_site[data.site_of_record[r]] == f ? test : train).push_back(r);
      const Dataset train_data = data.subset(train);
      const FitResult fit = fit_ml(train_data, init, free_names, opt);
      std::vector<KrigeTarget> targets;
      targets.reserve(test.size());
      for (int r : test)
        targets.push_back({data.sites[data.site_of_record[r]], data.time_of_record[r],
                           data.X.row(r).transpose(), data.response(r)});
      const PredictionResult pred = krige(train_data, fit.model, targets, opt.exec);
      double sse = 0.0, crps_sum = 0.0;
      for (const auto& row : pred.rows) {
        const double err = *row.observed - row.mean;
        sse += err * err;
        crps_sum += *row.crps;
      }
      FoldMetrics fm;
      fm.fold = f;
      fm.n_test = static_cast<int>(test.size());
      fm.loglik = fit.loglik;
      fm.bic = fit.bic;
      fm.rmspe = std::sqrt(sse / std::max<size_t>(test.size(), 1));
      fm.crps = crps_sum / std::max<size_t>(test.size(), 1);
      out.folds[f] = fm;
    } catch (...) {
#pragma omp critical
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  for (const auto& fm : out.folds) {
    out.loglik += fm.loglik / k;
    out.bic += fm.bic / k;
    out.rmspe += fm.rmspe / k;
    out.crps += fm.crps / k;
  }
  return out;
}

Eigen::VectorXd simulate(const Dataset& design, const CovModel& model,
                         const Eigen::VectorXd& beta, std::uint64_t seed, Exec exec) {
  if (beta.size() != design.X.cols())
    fail(Errc::DimensionMismatch, "beta length does not match the design matrix");
  const Eigen::MatrixXd sigma = build_covariance_matrix(model, *design.table,
                                                        design.site_of_record,
                                                        design.time_of_record, exec);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    fail(Errc::NotPositiveDefinite, "covariance factorization failed in simulate");
  Rng rng(seed, "simulate");
  Eigen::VectorXd eps(design.n_records());
  for (int i = 0; i < design.n_records(); ++i) eps(i) = rng.normal();
  return design.X * beta + Eigen::MatrixXd(llt.matrixL()) * eps;
}

}  // namespace streamcov
