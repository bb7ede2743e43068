#include "streamcov/models.hpp"

#include <cmath>

#include "streamcov/quadrature.hpp"

namespace streamcov {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Model1: return "model1";
    case Variant::Model2: return "model2";
    case Variant::Model3: return "model3";
    case Variant::Model4: return "model4";
    case Variant::Model5: return "model5";
    case Variant::Separable: return "separable";
    case Variant::TailUp: return "tailup";
    case Variant::TailDown: return "taildown";
    case Variant::Gneiting: return "gneiting";
  }
  return "?";
}

namespace {

void require(bool ok, const char* inequality) {
  if (!ok) fail(Errc::InvalidParams, inequality);
}

int model3_min_delta(int leaf_count) { return 2 * ((leaf_count + 1) / 2) + 1; }

}  // namespace

void check_model_params(const CovModel& m, std::optional<int> leaf_count) {
  require(m.sigma2 >= 0.0, "sigma2 >= 0");
  require(m.nugget >= 0.0, "nugget >= 0");
  switch (m.variant) {
    case Variant::Model1: {
      const auto& p = std::get<Model1Params>(m.params);
      require(p.c > 0.0, "c > 0");
      require(p.nu > 0.0 && p.nu <= 1.0, "0 < nu <= 1");
      require(p.kappa > 0.0, "kappa > 0");
      require(p.beta >= 0.0 && p.beta <= 1.0, "0 <= beta <= 1");
      require(p.tau >= 0.5 * p.beta, "tau >= beta/2");
      require(p.b > 0.0 && p.b <= 1.0, "0 < b <= 1");
      break;
    }
    case Variant::Model2: {
      const auto& p = std::get<Model2Params>(m.params);
      require(p.a > 0.0 && p.a <= 1.0, "0 < a <= 1");
      require(p.alpha >= 0.5, "alpha >= 1/2");
      require(p.b > 0.0 && p.b <= 1.0, "0 < b <= 1");
      require(p.c > 0.0, "c > 0");
      require(p.nu > 0.0, "nu > 0");
      break;
    }
    case Variant::Model3: {
      const auto& p = std::get<Model3Params>(m.params);
      require(p.alpha > 0.0, "alpha > 0");
      require(p.beta > 0.0, "beta > 0");
      require(p.nu > 0.0 && p.nu <= 1.0, "0 < nu <= 1");
      if (leaf_count) {
        const int bound = model3_min_delta(*leaf_count);
        if (!(p.delta >= bound))
          fail(Errc::DeltaTooSmallForTree,
               "delta >= 2*ceil(m/2)+1 = " + std::to_string(bound) + " required for a tree with " +
                   std::to_string(*leaf_count) + " leaves");
      } else {
        require(p.delta > 0.0, "delta > 0");
      }
      break;
    }
    case Variant::Model4: {
      const auto& p = std::get<Model4Params>(m.params);
      require(p.theta1 > 0.0, "theta1 > 0");
      require(p.theta2 > 0.0, "theta2 > 0");
      require(p.theta3 > 0.0, "theta3 > 0");
      require(p.theta4 > 0.0, "theta4 > 0");
      break;
    }
    case Variant::Model5: {
      const auto& p = std::get<Model5Params>(m.params);
      require(p.theta1 > 0.0, "theta1 > 0");
      require(p.theta2 > 0.0, "theta2 > 0");
      require(p.theta3 > 0.0 && p.theta3 <= 2.0, "0 < theta3 <= 2");
      require(p.theta4 > 0.0, "theta4 > 0");
      break;
    }
    case Variant::Separable: {
      const auto& p = std::get<SeparableParams>(m.params);
      require(p.c > 0.0, "c > 0");
      require(p.nu > 0.0 && p.nu <= 1.0, "0 < nu <= 1");
      require(p.kappa > 0.0, "kappa > 0");
      require(p.tau >= 0.0, "tau >= 0");
      require(p.b > 0.0 && p.b <= 1.0, "0 < b <= 1");
      break;
    }
    case Variant::TailUp:
      check_kernel_params(std::get<TailUpParams>(m.params).kernel);
      break;
    case Variant::TailDown:
      check_kernel_params(std::get<TailDownParams>(m.params).kernel);
      break;
    case Variant::Gneiting: {
      const auto& p = std::get<GneitingParams>(m.params);
      if (!is_completely_monotone_family(p.phi.kind))
        fail(Errc::HypothesisViolation, "phi must be a completely monotone family");
      if (!is_bernstein_family(p.psi.kind))
        fail(Errc::HypothesisViolation, "psi must be a positive Bernstein family");
      if (!(p.alpha >= 0.5)) fail(Errc::HypothesisViolation, "alpha >= 1/2");
      if (!(p.a > 0.0 && p.a <= 1.0)) fail(Errc::HypothesisViolation, "0 < a <= 1");
      if (!(p.b > 0.0 && p.b <= 1.0)) fail(Errc::HypothesisViolation, "0 < b <= 1");
      check_scalar_params(p.phi);
      check_scalar_params(p.psi);
      break;
    }
  }
}

namespace {

void require_nonneg(double d, double u) {
  if (d < 0.0 || u < 0.0) fail(Errc::InvalidParams, "d >= 0 and u >= 0 required");
}

double model1_value(double d, double u, const Model1Params& p) {
  const double s = p.kappa * std::pow(d, p.b) + 1.0;
  return std::pow(s, -p.tau) * std::exp(-p.c * std::pow(u * u / std::pow(s, p.beta), p.nu));
}

double model2_value(double d, double u, const Model2Params& p) {
  const double s = std::pow(d, p.b) + 1.0;
  const double e = p.c * std::pow(u, p.a) / std::sqrt(s);
  return std::pow(2.0, p.nu) * std::pow(s, -p.alpha) *
         std::pow(std::exp(e) + std::exp(-e), -p.nu);
}

double model3_value(double d, double u, const Model3Params& p) {
  const double x = d / p.alpha + u / p.beta;
  const double base = 1.0 - std::pow(x, p.nu);
  return base > 0.0 ? std::pow(base, p.delta) : 0.0;
}

// log(1+x)/x with the series value 1 - x/2 below the cancellation threshold
double log_ratio(double x) { return x < 1e-8 ? 1.0 - 0.5 * x : std::log1p(x) / x; }

double tailup_value(const FlowRelation& rel, double weight, const Kernel& k) {
  if (rel.kind == FlowKind::Unconnected) return 0.0;
  const double d = rel.d;
  switch (k.kind) {
    case KernelKind::Exponential:
      return weight * 0.5 * k.theta1 * k.theta1 * k.theta2 * std::exp(-d / k.theta2);
    case KernelKind::Mariah:
      return weight * 0.5 * log_ratio(d / k.theta1);
  }
  return 0.0;
}

double taildown_value(const FlowRelation& rel, const Kernel& k) {
  if (k.kind == KernelKind::Exponential)
    return 0.5 * k.theta1 * k.theta1 * k.theta2 * std::exp(-rel.d / k.theta2);
  // Mariah: evaluate the branch integral directly.
  const double lo = (rel.kind == FlowKind::Unconnected) ? rel.a : 0.0;
  const double hi = (rel.kind == FlowKind::Unconnected) ? rel.b : rel.d;
  auto f = [&](double y) { return eval_kernel(k, y + lo) * eval_kernel(k, y + hi); };
  return integrate_to_inf(f, 0.0, 1e-10, k.theta1);
}

double model4_value(const FlowRelation& rel, double weight, double u, const Model4Params& p) {
  const bool connected = rel.kind != FlowKind::Unconnected;
  const double d = rel.d;
  if (connected && d == 0.0)
    return 0.5 * std::cos(u / p.theta2) + 0.5 * std::exp(-u / p.theta4);
  if (connected)
    return 0.5 * weight * log_ratio(d / p.theta1) * std::cos(u / p.theta2) +
           0.5 * std::exp(-(d / p.theta3 + u / p.theta4));
  return 0.5 * std::exp(-(d / p.theta3 + u / p.theta4));
}

double model5_value(double d, double u, const Model5Params& p) {
  return std::pow(d / p.theta1 + std::pow(u, p.theta3) / p.theta2 + 1.0, -p.theta4);
}

double separable_value(double d, double u, const SeparableParams& p) {
  return std::pow(p.kappa * std::pow(d, p.b) + 1.0, -p.tau) *
         std::exp(-p.c * std::pow(u * u, p.nu));
}

double gneiting_value(double d, double u, const GneitingParams& p) {
  const double psi_d = eval_scalar(p.psi, std::pow(d, p.b));
  return std::pow(psi_d, -p.alpha) * eval_scalar(p.phi, std::pow(u, 2.0 * p.a) / psi_d);
}

}  // namespace

double cov_model1(double d, double u, const Model1Params& p) {
  require_nonneg(d, u);
  check_model_params({Variant::Model1, p, 1.0, 0.0});
  return model1_value(d, u, p);
}

double cov_model2(double d, double u, const Model2Params& p) {
  require_nonneg(d, u);
  check_model_params({Variant::Model2, p, 1.0, 0.0});
  return model2_value(d, u, p);
}

double cov_model3(double d, double u, const Model3Params& p, int leaf_count) {
  require_nonneg(d, u);
  check_model_params({Variant::Model3, p, 1.0, 0.0}, leaf_count);
  return model3_value(d, u, p);
}

double cov_model4(const FlowRelation& rel, double weight, double u, const Model4Params& p) {
  check_model_params({Variant::Model4, p, 1.0, 0.0});
  return model4_value(rel, weight, u, p);
}

double cov_model5(double d, double u, const Model5Params& p) {
  require_nonneg(d, u);
  check_model_params({Variant::Model5, p, 1.0, 0.0});
  return model5_value(d, u, p);
}

double cov_separable(double d, double u, const SeparableParams& p) {
  require_nonneg(d, u);
  check_model_params({Variant::Separable, p, 1.0, 0.0});
  return separable_value(d, u, p);
}

double cov_tailup(const FlowRelation& rel, double weight, const Kernel& k) {
  check_kernel_params(k);
  if (rel.kind != FlowKind::Unconnected && !(weight >= 0.0 && weight <= 1.0))
    fail(Errc::InvalidParams, "0 <= weight <= 1");
  return tailup_value(rel, weight, k);
}

double cov_taildown(const FlowRelation& rel, const Kernel& k) {
  check_kernel_params(k);
  return taildown_value(rel, k);
}

double cov_gneiting(double d, double u, const GneitingParams& p) {
  require_nonneg(d, u);
  check_model_params({Variant::Gneiting, p, 1.0, 0.0});
  return gneiting_value(d, u, p);
}

double cov_scale_mixture(const std::function<double(double, double)>& cov_s,
                         const std::function<double(double, double)>& cov_t,
                         const std::function<double(double)>& mixing_density, double d, double u,
                         double abs_tol) {
  auto integrand = [&](double a) { return cov_s(d, a) * cov_t(u, a) * mixing_density(a); };
  const double v = integrate_to_inf(integrand, 0.0, abs_tol);
  if (!std::isfinite(v) || std::abs(v) > 1e12)
    fail(Errc::Divergent, "scale mixture integral does not converge");
  return v;
}

namespace {

const FlowRelation& relation_or_fail(const PairContext& ctx, Variant v) {
  if (!ctx.rel)
    fail(Errc::NotDirected, std::string(variant_name(v)) +
                                " requires flow relations (directed network with an outlet)");
  return *ctx.rel;
}

double unit_value(const CovModel& m, const PairContext& ctx) {
  switch (m.variant) {
    case Variant::Model1:
      return model1_value(ctx.d, ctx.u, std::get<Model1Params>(m.params));
    case Variant::Model2:
      return model2_value(ctx.d, ctx.u, std::get<Model2Params>(m.params));
    case Variant::Model3:
      return model3_value(ctx.d, ctx.u, std::get<Model3Params>(m.params));
    case Variant::Model4:
      return model4_value(relation_or_fail(ctx, m.variant), ctx.weight, ctx.u,
                          std::get<Model4Params>(m.params));
    case Variant::Model5:
      return model5_value(ctx.d, ctx.u, std::get<Model5Params>(m.params));
    case Variant::Separable:
      return separable_value(ctx.d, ctx.u, std::get<SeparableParams>(m.params));
    case Variant::TailUp:
      return tailup_value(relation_or_fail(ctx, m.variant), ctx.weight,
                          std::get<TailUpParams>(m.params).kernel);
    case Variant::TailDown:
      return taildown_value(relation_or_fail(ctx, m.variant),
                            std::get<TailDownParams>(m.params).kernel);
    case Variant::Gneiting:
      return gneiting_value(ctx.d, ctx.u, std::get<GneitingParams>(m.params));
  }
  return 0.0;
}

}  // namespace

double unit_covariance(const CovModel& m, const PairContext& ctx, int leaf_count) {
  check_model_params(m, m.variant == Variant::Model3 && leaf_count > 0
                            ? std::optional<int>(leaf_count)
                            : std::nullopt);
  return unit_value(m, ctx);
}

double full_covariance(const CovModel& m, const PairContext& ctx, int leaf_count) {
  return m.sigma2 * unit_covariance(m, ctx, leaf_count) + (ctx.same_site ? m.nugget : 0.0);
}

// --- PairTable ---------------------------------------------------------------

PairTable::PairTable(const NetworkIndex& idx, std::span<const PointOnNetwork> sites) {
  n_ = static_cast<int>(sites.size());
  leaves_ = idx.leaf_count();
  directed_ = idx.directed();
  const bool is_tree = idx.edge_count() == idx.vertex_count() - 1;
  d_.setZero(n_, n_);
  w_.setOnes(n_, n_);
  same_.assign(static_cast<size_t>(n_) * n_, 0);
  if (directed_) {
    a_.setZero(n_, n_);
    b_.setZero(n_, n_);
    kind_.assign(static_cast<size_t>(n_) * n_, static_cast<char>(FlowKind::SamePoint));
  }
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      const bool same = idx.same_point(sites[i], sites[j]);
      same_[i * n_ + j] = same_[j * n_ + i] = same ? 1 : 0;
      double dist;
      if (directed_) {
        const FlowRelation rel = idx.flow_relation(sites[i], sites[j]);
        dist = rel.d;
        kind_[i * n_ + j] = kind_[j * n_ + i] = static_cast<char>(rel.kind);
        a_(i, j) = a_(j, i) = rel.a;
        b_(i, j) = b_(j, i) = rel.b;
        if (rel.kind != FlowKind::Unconnected)
          w_(i, j) = w_(j, i) = idx.tailup_weight(sites[i], sites[j]);
      } else {
        dist = is_tree ? idx.geodesic(sites[i], sites[j]) : idx.resistance(sites[i], sites[j]);
      }
      d_(i, j) = d_(j, i) = dist;
    }
  }
}

PairContext PairTable::context(int i, int j, double u) const {
  PairContext ctx;
  ctx.d = d_(i, j);
  ctx.u = u;
  ctx.weight = w_(i, j);
  ctx.same_site = same_[static_cast<size_t>(i) * n_ + j] != 0;
  if (directed_) {
    FlowRelation rel;
    rel.kind = static_cast<FlowKind>(kind_[static_cast<size_t>(i) * n_ + j]);
    rel.d = d_(i, j);
    rel.a = a_(i, j);
    rel.b = b_(i, j);
    ctx.rel = rel;
  }
  return ctx;
}

Eigen::MatrixXd build_covariance_matrix(const CovModel& model, const PairTable& table,
                                        std::span<const int> site_of_record,
                                        std::span<const double> times, Exec exec) {
  if (site_of_record.size() != times.size())
    fail(Errc::DimensionMismatch, "site and time vectors differ in length");
  check_model_params(model, table.leaf_count());
  return assemble_matrix(
      [&model](const PairContext& ctx) {
        return model.sigma2 * unit_value(model, ctx) + (ctx.same_site ? model.nugget : 0.0);
      },
      table, site_of_record, times, exec);
}

Eigen::MatrixXd build_covariance_matrix(const CovModel& model, const Network& net,
                                        std::span<const PointOnNetwork> points,
                                        std::span<const double> times, Exec exec) {
  NetworkIndex idx(net);
  PairTable table(idx, points);
  std::vector<int> site(points.size());
  for (size_t i = 0; i < points.size(); ++i) site[i] = static_cast<int>(i);
  return build_covariance_matrix(model, table, site, times, exec);
}

Eigen::MatrixXd build_matrix(const PairEvaluator& entry, const PairTable& table,
                             std::span<const int> site_of_record, std::span<const double> times,
                             Exec exec) {
  if (site_of_record.size() != times.size())
    fail(Errc::DimensionMismatch, "site and time vectors differ in length");
  return assemble_matrix(entry, table, site_of_record, times, exec);
}

}  // namespace streamcov
