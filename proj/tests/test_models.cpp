#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "streamcov/models.hpp"
#include "streamcov/quadrature.hpp"
#include "streamcov/rng.hpp"
#include "streamcov/synth.hpp"
#include "test_helpers.hpp"

using namespace streamcov;

namespace {

FlowRelation connected(double d) {
  return {d == 0.0 ? FlowKind::SamePoint : FlowKind::Connected, d, 0.0, 0.0};
}

FlowRelation unconnected(double a, double b) {
  return {FlowKind::Unconnected, a + b, std::min(a, b), std::max(a, b)};
}

// independent closed form for the Mariah tail-down branch integrals
double mariah_taildown_oracle(double lo, double hi, double theta1) {
  const double q = 0.25 * theta1 * theta1;
  if (hi == lo) return q / (theta1 + lo);
  return q * std::log((theta1 + hi) / (theta1 + lo)) / (hi - lo);
}

}  // namespace

TEST_CASE("model1 formula") {
  const Model1Params p{1, 1, 1, 0.5, 0.5, 1};
  CHECK(cov_model1(0, 0, p) == doctest::Approx(1.0));
  // hand evaluation at (d,u) = (1,1): exp(-1/sqrt 2) / sqrt 2
  const double want = std::exp(-1.0 / std::sqrt(2.0)) / std::sqrt(2.0);
  CHECK(cov_model1(1, 1, p) == doctest::Approx(want).epsilon(1e-14));

  // beta = 0 separates into (kappa d^b + 1)^-tau * exp(-c u^(2 nu))
  const Model1Params sep{0.7, 0.8, 1.3, 0.0, 0.9, 0.6};
  for (double d : {0.0, 0.4, 2.0, 9.0})
    for (double u : {0.0, 0.3, 1.7}) {
      const double split = std::pow(sep.kappa * std::pow(d, sep.b) + 1.0, -sep.tau) *
                           std::exp(-sep.c * std::pow(u, 2.0 * sep.nu));
      CHECK(cov_model1(d, u, sep) == doctest::Approx(split).epsilon(1e-13));
    }

  CHECK_THROWS_AS(cov_model1(1, 1, {1, 1, 1, 0.8, 0.3, 1}), Error);  // tau < beta/2
  CHECK_THROWS_AS(cov_model1(1, 1, {1, 2, 1, 0.5, 0.5, 1}), Error);  // nu > 1
}

TEST_CASE("model2 formula") {
  const Model2Params p{1, 1, 1, 1, 1};
  CHECK(cov_model2(0, 0, p) == doctest::Approx(1.0));
  CHECK(cov_model2(1, 0, p) == doctest::Approx(0.5));
  // independent re-implementation as the oracle
  auto oracle = [](double d, double u, const Model2Params& q) {
    const double s = std::pow(d, q.b) + 1.0;
    const double arg = q.c * std::pow(u, q.a) / std::sqrt(s);
    return std::pow(2.0, q.nu) / std::pow(s, q.alpha) /
           std::pow(std::exp(arg) + std::exp(-arg), q.nu);
  };
  CHECK(cov_model2(1, 1, p) == doctest::Approx(oracle(1, 1, p)).epsilon(1e-14));
  const Model2Params q{0.7, 1.4, 0.5, 2.0, 0.8};
  for (double d : {0.0, 0.5, 3.0})
    for (double u : {0.0, 0.9, 4.0})
      CHECK(cov_model2(d, u, q) == doctest::Approx(oracle(d, u, q)).epsilon(1e-13));
}

TEST_CASE("model3 compact support") {
  const Model3Params p{1, 1, 1, 7};
  CHECK(cov_model3(0, 0, p, 5) == doctest::Approx(1.0));
  CHECK(cov_model3(0.5, 0.5, p, 5) == 0.0);  // boundary exactly
  CHECK(cov_model3(0.25, 0.25, p, 5) == doctest::Approx(std::pow(0.5, 7)));
  CHECK(cov_model3(3.0, 2.0, p, 5) == 0.0);
  try {
    cov_model3(1, 1, {1, 1, 1, 3}, 7);  // bound is 2*ceil(7/2)+1 = 9
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DeltaTooSmallForTree);
  }
}

TEST_CASE("tail-up closed forms against quadrature") {
  CHECK(cov_tailup(unconnected(1, 2), 1.0, {KernelKind::Exponential, 1, 1}) == 0.0);
  CHECK(cov_tailup(unconnected(1, 2), 1.0, {KernelKind::Mariah, 1, 1}) == 0.0);

  const Kernel mariah{KernelKind::Mariah, 1.7, 1.0};
  CHECK(cov_tailup(connected(0), 1.0, mariah) == doctest::Approx(0.5));
  CHECK(cov_tailup(connected(1e-12), 1.0, mariah) == doctest::Approx(0.5).epsilon(1e-9));

  // quadrature oracle of int_d^inf g(x) g(x-d) dx; the model value carries
  // the unit-sill normalization 2/theta1
  for (double d : {0.3, 1.7, 5.0}) {
    const double raw = integrate_to_inf(
        [&](double y) { return eval_kernel(mariah, y) * eval_kernel(mariah, y + d); }, 0.0, 1e-12,
        mariah.theta1);
    const double want = (2.0 / mariah.theta1) * raw;
    CHECK(cov_tailup(connected(d), 1.0, mariah) == doctest::Approx(want).epsilon(1e-8));
  }

  const Kernel expk{KernelKind::Exponential, 1.3, 0.8};
  for (double d : {0.0, 0.9, 3.0}) {
    const double raw = integrate_to_inf(
        [&](double y) { return eval_kernel(expk, y) * eval_kernel(expk, y + d); }, 0.0, 1e-12,
        expk.theta2);
    CHECK(cov_tailup(connected(d), 1.0, expk) == doctest::Approx(raw).epsilon(1e-9));
  }

  // weight scales linearly
  CHECK(cov_tailup(connected(1.0), 0.25, expk) ==
        doctest::Approx(0.25 * cov_tailup(connected(1.0), 1.0, expk)));
}

TEST_CASE("tail-down exponential is isotropic, Mariah is not") {
  const Kernel expk{KernelKind::Exponential, 1, 1};
  CHECK(cov_taildown(connected(0), expk) == doctest::Approx(0.5));
  // closed form against quadrature over the connected branch integral
  for (double d : {0.4, 2.0}) {
    const double conn = integrate_to_inf(
        [&](double y) { return eval_kernel(expk, y) * eval_kernel(expk, y + d); }, 0.0, 1e-12);
    CHECK(cov_taildown(connected(d), expk) == doctest::Approx(conn).epsilon(1e-9));
  }
  CHECK(cov_taildown(connected(2.0), expk) ==
        doctest::Approx(cov_taildown(unconnected(0.5, 1.5), expk)).epsilon(1e-12));

  const Kernel mariah{KernelKind::Mariah, 1, 1};
  // quadrature implementation against the independent closed-form oracle
  for (double d : {0.5, 2.0, 7.0})
    CHECK(cov_taildown(connected(d), mariah) ==
          doctest::Approx(mariah_taildown_oracle(0.0, d, mariah.theta1)).epsilon(1e-8));
  CHECK(cov_taildown(unconnected(0.5, 1.5), mariah) ==
        doctest::Approx(mariah_taildown_oracle(0.5, 1.5, mariah.theta1)).epsilon(1e-8));
  // the anisotropy witness
  const double diff =
      std::abs(cov_taildown(connected(2.0), mariah) - cov_taildown(unconnected(0.5, 1.5), mariah));
  CHECK(diff > 1e-4);
}

TEST_CASE("model4 branches") {
  const Model4Params p{1, 1, 1, 1};
  CHECK(cov_model4(connected(0), 1.0, 0.0, p) == doctest::Approx(1.0));
  CHECK(cov_model4(unconnected(0.5, 0.5), 1.0, 0.0, p) ==
        doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));

  // connected pairs compose from the two building blocks
  const Model4Params q{1.4, 0.9, 2.0, 1.1};
  const Kernel mariah{KernelKind::Mariah, q.theta1, 1.0};
  const Kernel expk{KernelKind::Exponential, 1.0 / std::sqrt(q.theta3), q.theta3};
  for (double d : {0.2, 1.0, 4.0})
    for (double u : {0.0, 0.7, 2.5}) {
      const double w = 0.8;
      const double want = cov_tailup(connected(d), w, mariah) * std::cos(u / q.theta2) +
                          cov_taildown(connected(d), expk) * std::exp(-u / q.theta4);
      CHECK(cov_model4(connected(d), w, u, q) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("model5 formula and monotonicity") {
  const Model5Params p{1, 1, 1, 1};
  CHECK(cov_model5(0, 0, p) == doctest::Approx(1.0));
  CHECK(cov_model5(1, 0, p) == doctest::Approx(0.5));
  const Model5Params q{10, 5, 1.5, 1};
  double prev = 1.0;
  for (double d : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double v = cov_model5(d, 0.3, q);
    CHECK(v < prev);
    prev = v;
  }
  prev = cov_model5(0.3, 0.0, q);
  for (double u : {0.5, 1.0, 2.0, 4.0}) {
    const double v = cov_model5(0.3, u, q);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("generic Gneiting form reproduces models 1 and 2") {
  // phi = powered exponential, psi = (kappa t + 1)^beta, alpha = 1/2, a = 1
  GneitingParams g1;
  g1.phi = {ScalarKind::CmPowExp, {0.8, 0.9}};
  g1.psi = {ScalarKind::BfPowerPlusOne, {1.5, 0.6, 1.0}};
  g1.alpha = 0.5;
  g1.a = 1.0;
  g1.b = 0.7;
  const Model1Params m1{0.8, 0.9, 1.5, 0.6, 0.3, 0.7};  // tau = beta/2
  for (double d : {0.0, 0.6, 2.0})
    for (double u : {0.0, 0.5, 3.0})
      CHECK(cov_gneiting(d, u, g1) == doctest::Approx(cov_model1(d, u, m1)).epsilon(1e-13));

  CHECK(cov_gneiting(0, 0, g1) == doctest::Approx(1.0));

  // phi = sech family, psi = t + 1 reproduces model 2 (the square root inside
  // the sech halves u^{2a} back to u^a, so the two a's coincide)
  GneitingParams g2;
  g2.phi = {ScalarKind::CmSech, {1.2, 0.9}};
  g2.psi = {ScalarKind::BfPowerPlusBeta, {1.0, 1.0}};
  g2.alpha = 0.9;
  g2.a = 0.45;
  g2.b = 0.8;
  const Model2Params m2fix{0.45, 0.9, 0.8, 1.2, 0.9};
  for (double d : {0.0, 0.6, 2.0})
    for (double u : {0.0, 0.5, 3.0})
      CHECK(cov_gneiting(d, u, g2) == doctest::Approx(cov_model2(d, u, m2fix)).epsilon(1e-13));

  GneitingParams bad = g1;
  bad.alpha = 0.3;
  try {
    cov_gneiting(1, 1, bad);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::HypothesisViolation);
  }
  GneitingParams swapped = g1;
  swapped.psi = {ScalarKind::CmPowExp, {1.0, 1.0}};
  CHECK_THROWS_AS(cov_gneiting(1, 1, swapped), Error);
}

TEST_CASE("scale mixtures match the known closed forms") {
  // half-normal mixture of exponential tail-down and cosine
  const double theta1 = 1.0, theta2 = 1.0;
  auto cs = [&](double d, double a) { return std::exp(-a * a / theta1 * d); };
  auto ct = [&](double u, double a) { return std::cos(a * 2.0 * theta2 * u); };
  auto halfnormal = [](double a) {
    return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-a * a);
  };
  for (double d : {0.0, 0.5, 2.0, 8.0})
    for (double u : {0.0, 0.4, 1.5}) {
      const double got = cov_scale_mixture(cs, ct, halfnormal, d, u);
      const double want =
          std::exp(-theta2 * theta2 * u * u / (1.0 + d / theta1)) / std::sqrt(1.0 + d / theta1);
      CHECK(got == doctest::Approx(want).epsilon(1e-7));
    }
  // u = 0 marginal
  CHECK(cov_scale_mixture(cs, ct, halfnormal, 3.0, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(4.0)).epsilon(1e-8));

  // Gamma mixture of two exponentials collapses to model 5
  const Model5Params m5{10, 5, 1.5, 1};
  const double rate = 1.0;  // absorbed by the reparameterization
  auto cs5 = [&](double d, double a) { return std::exp(-d / m5.theta1 * a); };
  auto ct5 = [&](double u, double a) { return std::exp(-std::pow(u, m5.theta3) / m5.theta2 * a); };
  auto gamma_pdf = [&](double a) {
    return std::pow(rate, m5.theta4) / std::tgamma(m5.theta4) * std::pow(a, m5.theta4 - 1.0) *
           std::exp(-rate * a);
  };
  for (double d : {0.0, 1.0, 6.0})
    for (double u : {0.0, 0.8, 2.0})
      CHECK(cov_scale_mixture(cs5, ct5, gamma_pdf, d, u) ==
            doctest::Approx(cov_model5(d, u, m5)).epsilon(1e-7));
}

TEST_CASE("full covariance adds the pure spatial nugget on site coincidence") {
  CovModel m;
  m.variant = Variant::Model5;
  m.params = Model5Params{1, 1, 1, 1};
  m.sigma2 = 2.0;
  m.nugget = 0.5;
  PairContext same;
  same.d = 0;
  same.u = 0;
  same.same_site = true;
  CHECK(full_covariance(m, same) == doctest::Approx(2.5));
  // same site, different time: the nugget still applies
  same.u = 3.0;
  CHECK(full_covariance(m, same) ==
        doctest::Approx(2.0 * cov_model5(0, 3.0, std::get<Model5Params>(m.params)) + 0.5));
  // distinct sites a hair apart get no nugget
  PairContext close;
  close.d = 1e-9;
  close.same_site = false;
  CHECK(full_covariance(m, close) == doctest::Approx(2.0 * cov_model5(1e-9, 0, {1, 1, 1, 1})));
}

TEST_CASE("separable variant equals model1 with beta frozen at zero") {
  CovModel sep;
  sep.variant = Variant::Separable;
  sep.params = SeparableParams{0.9, 0.7, 1.4, 0.6, 0.8};
  const Model1Params m1{0.9, 0.7, 1.4, 0.0, 0.6, 0.8};
  Rng rng(3);
  for (int i = 0; i < 30; ++i) {
    PairContext ctx;
    ctx.d = rng.uniform(0.0, 8.0);
    ctx.u = rng.uniform(0.0, 5.0);
    CHECK(unit_covariance(sep, ctx) ==
          doctest::Approx(cov_model1(ctx.d, ctx.u, m1)).epsilon(1e-13));
  }
}

TEST_CASE("covariance matrix assembly") {
  Rng rng(5);
  const Network net = random_tree(rng, 12);
  CovModel m;
  m.variant = Variant::Model5;
  m.params = Model5Params{10, 5, 1.5, 1};
  m.sigma2 = 1.3;
  m.nugget = 0.2;

  SUBCASE("single record") {
    const auto pts = random_points(net, rng, 1);
    const std::vector<double> t = {0.0};
    const Eigen::MatrixXd s = build_covariance_matrix(m, net, pts, t);
    REQUIRE(s.rows() == 1);
    CHECK(s(0, 0) == doctest::Approx(1.5));
  }

  SUBCASE("permutation equivariance and symmetry") {
    const auto pts = random_points(net, rng, 8);
    const auto times = random_times(rng, 8);
    const Eigen::MatrixXd s = build_covariance_matrix(m, net, pts, times);
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);

    std::vector<PointOnNetwork> rp(pts.rbegin(), pts.rend());
    std::vector<double> rt(times.rbegin(), times.rend());
    const Eigen::MatrixXd r = build_covariance_matrix(m, net, rp, rt);
    const int n = 8;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(r(i, j) == s(n - 1 - i, n - 1 - j));
  }

  SUBCASE("positive definiteness on a larger draw") {
    const auto pts = random_points(net, rng, 30);
    const auto times = random_times(rng, 30);
    const Eigen::MatrixXd s = build_covariance_matrix(m, net, pts, times);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * (m.sigma2 + m.nugget));
  }

  SUBCASE("serial and parallel assembly agree bitwise") {
    const auto pts = random_points(net, rng, 20);
    const auto times = random_times(rng, 20);
    NetworkIndex idx(net);
    PairTable table(idx, pts);
    std::vector<int> site(20);
    for (int i = 0; i < 20; ++i) site[i] = i;
    const Eigen::MatrixXd a = build_covariance_matrix(m, table, site, times, Exec::Serial);
    const Eigen::MatrixXd b = build_covariance_matrix(m, table, site, times, Exec::Parallel);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("flow-direction families refuse undirected networks") {
  CovModel m;
  m.variant = Variant::Model4;
  m.params = Model4Params{};
  PairContext ctx;
  ctx.d = 1.0;  // no relation attached
  try {
    unit_covariance(m, ctx);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotDirected);
  }
}

TEST_CASE("spatial and temporal marginals are nonincreasing; spatial marginal convex") {
  const Model1Params m1{1, 1, 1, 0.5, 0.5, 1};
  const Model2Params m2{1, 1, 1, 1, 1};
  const Model5Params m5{10, 5, 1.5, 1};
  GneitingParams gg;
  gg.phi = {ScalarKind::CmCauchy, {1.0, 1.5, 0.8}};
  gg.psi = {ScalarKind::BfLogRatio, {1.0, 2.0, 1.0}};
  gg.alpha = 0.7;
  gg.a = 0.9;
  gg.b = 0.9;

  std::vector<std::function<double(double, double)>> models = {
      [&](double d, double u) { return cov_model1(d, u, m1); },
      [&](double d, double u) { return cov_model2(d, u, m2); },
      [&](double d, double u) { return cov_model5(d, u, m5); },
      [&](double d, double u) { return cov_gneiting(d, u, gg); }};

  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.01 * std::pow(2000.0, i / 40.0));

  for (const auto& c : models) {
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
      CHECK(c(grid[i + 1], 0.0) - c(grid[i], 0.0) <= 1e-8);
      CHECK(c(0.0, grid[i + 1]) - c(0.0, grid[i]) <= 1e-8);
    }
    for (size_t i = 0; i + 2 < grid.size(); ++i) {
      const double lam = (grid[i + 2] - grid[i + 1]) / (grid[i + 2] - grid[i]);
      const double chord = lam * c(grid[i], 0.0) + (1 - lam) * c(grid[i + 2], 0.0);
      CHECK(chord - c(grid[i + 1], 0.0) >= -1e-8);
    }
  }
}

TEST_CASE("no pair exceeds the zero-lag covariance") {
  Rng rng(23);
  const Network net = random_tree(rng, 15);
  NetworkIndex idx(net);
  const auto pts = random_points(net, rng, 12);
  PairTable table(idx, pts);

  std::vector<CovModel> zoo;
  {
    CovModel m;
    m.variant = Variant::Model1;
    m.params = Model1Params{1, 1, 1, 0.5, 0.5, 1};
    zoo.push_back(m);
    m.variant = Variant::Model2;
    m.params = Model2Params{1, 1, 1, 1, 1};
    zoo.push_back(m);
    m.variant = Variant::Model3;
    m.params = Model3Params{5, 5, 1, 2.0 * ((table.leaf_count() + 1) / 2) + 1.0};
    zoo.push_back(m);
    m.variant = Variant::Model4;
    m.params = Model4Params{1, 1, 1, 1};
    zoo.push_back(m);
    m.variant = Variant::Model5;
    m.params = Model5Params{10, 5, 1.5, 1};
    zoo.push_back(m);
    m.variant = Variant::Separable;
    m.params = SeparableParams{};
    zoo.push_back(m);
    m.variant = Variant::TailUp;
    m.params = TailUpParams{{KernelKind::Exponential, 1.0, 1.0}};
    zoo.push_back(m);
    m.variant = Variant::TailDown;
    m.params = TailDownParams{{KernelKind::Mariah, 1.0, 1.0}};
    zoo.push_back(m);
  }
  PairContext self;
  self.same_site = true;
  self.rel = FlowRelation{};
  for (const auto& m : zoo) {
    const double top = full_covariance(m, self, table.leaf_count());
    for (int i = 0; i < table.n_sites(); ++i)
      for (int j = 0; j < table.n_sites(); ++j)
        for (double u : {0.0, 0.5, 2.0}) {
          const PairContext ctx = table.context(i, j, u);
          CHECK(full_covariance(m, ctx, table.leaf_count()) <= top + 1e-12);
        }
  }
}
