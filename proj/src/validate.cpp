#include "streamcov/validate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "streamcov/synth.hpp"

namespace streamcov {

namespace {

constexpr double kEigTol = -1e-8;
constexpr double kCndTol = 1e-8;

struct Instance {
  std::vector<PointOnNetwork> pts;
  std::vector<double> times;
};

Instance draw_instance(const Network& net, std::uint64_t seed, int instance, int n_points) {
  Rng rng(seed + 0x9e37u * static_cast<std::uint64_t>(instance), "validate-instance");
  Instance inst;
  inst.pts = random_points(net, rng, n_points);
  inst.times = random_times(rng, n_points);
  return inst;
}

double scaled_min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double scale = m.trace() / static_cast<double>(m.rows());
  return es.eigenvalues().minCoeff() / std::max(scale, 1e-300);
}

ValidityReport run_eigen_check(const std::string& label,
                               const std::function<Eigen::MatrixXd(const Instance&)>& build,
                               const Network& net, int n_instances, int n_points,
                               std::uint64_t seed, Exec exec) {
  ValidityReport rep;
  rep.check = label;
  rep.instances = n_instances;
  rep.seed = seed;
  rep.worst = std::numeric_limits<double>::infinity();
  rep.pass = true;

  const bool par = exec == Exec::Parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (int k = 0; k < n_instances; ++k) {
    const Instance inst = draw_instance(net, seed, k, n_points);
    double stat;
    std::string note;
    try {
      stat = scaled_min_eigenvalue(build(inst));
    } catch (const Error& e) {
      stat = -std::numeric_limits<double>::infinity();
      note = e.what();
    }
#pragma omp critical
    {
      if (stat < rep.worst) {
        rep.worst = stat;
        if (stat < kEigTol) {
          std::ostringstream os;
          os << "instance " << k << " (" << n_points << " points): scaled min eigenvalue " << stat;
          if (!note.empty()) os << " [" << note << "]";
          rep.witness = os.str();
        }
      }
      if (stat < kEigTol) rep.pass = false;
    }
  }
  return rep;
}

}  // namespace

ValidityReport check_pd_fn(const PairEvaluator& entry, const std::string& label,
                           const Network& net, int n_instances, int n_points, std::uint64_t seed,
                           Exec exec) {
  NetworkIndex idx(net);
  auto build = [&](const Instance& inst) {
    PairTable table(idx, inst.pts);
    std::vector<int> site(inst.pts.size());
    for (size_t i = 0; i < site.size(); ++i) site[i] = static_cast<int>(i);
    // serial inner assembly: the instance loop already owns the threads
    return build_matrix(entry, table, site, inst.times, Exec::Serial);
  };
  return run_eigen_check(label, build, net, n_instances, n_points, seed, exec);
}

ValidityReport check_pd(const CovModel& model, const Network& net, int n_instances, int n_points,
                        std::uint64_t seed, Exec exec) {
  NetworkIndex idx(net);
  auto build = [&](const Instance& inst) {
    PairTable table(idx, inst.pts);
    std::vector<int> site(inst.pts.size());
    for (size_t i = 0; i < site.size(); ++i) site[i] = static_cast<int>(i);
    return build_covariance_matrix(model, table, site, inst.times, Exec::Serial);
  };
  return run_eigen_check(std::string("pd:") + variant_name(model.variant), build, net, n_instances,
                         n_points, seed, exec);
}

ValidityReport check_cnd_fn(const std::function<double(double)>& psi, const std::string& label,
                            const Network& net, int n_instances, int n_points, std::uint64_t seed,
                            Exec exec) {
  NetworkIndex idx(net);
  ValidityReport rep;
  rep.check = label;
  rep.instances = n_instances;
  rep.seed = seed;
  rep.worst = -std::numeric_limits<double>::infinity();
  rep.pass = true;

  const bool par = exec == Exec::Parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (int k = 0; k < n_instances; ++k) {
    const Instance inst = draw_instance(net, seed, k, n_points);
    PairTable table(idx, inst.pts);
    const int n = static_cast<int>(inst.pts.size());
    Eigen::MatrixXd psi_mat(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) psi_mat(i, j) = psi(table.distance(i, j));
    // the supremum of the centered quadratic form over unit coefficient
    // vectors with sum zero is the top eigenvalue of the doubly centered
    // matrix (the projector direction itself contributes 0)
    const Eigen::MatrixXd centered =
        psi_mat - psi_mat.rowwise().mean().replicate(1, n) -
        psi_mat.colwise().mean().replicate(n, 1) +
        Eigen::MatrixXd::Constant(n, n, psi_mat.mean());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(centered, Eigen::EigenvaluesOnly);
    const double form = es.eigenvalues().maxCoeff();
#pragma omp critical
    {
      if (form > rep.worst) {
        rep.worst = form;
        if (form > kCndTol) {
          std::ostringstream os;
          os << "instance " << k << ": centered quadratic form " << form;
          rep.witness = os.str();
        }
      }
      if (form > kCndTol) rep.pass = false;
    }
  }
  return rep;
}

ValidityReport check_cnd(const ScalarFamily& psi, const Network& net, int n_instances,
                         int n_points, std::uint64_t seed, Exec exec) {
  check_scalar_params(psi);
  return check_cnd_fn([&psi](double t) { return eval_scalar(psi, t); },
                      "cnd", net, n_instances, n_points, seed, exec);
}

ValidityReport check_corollary1c(const std::function<double(double)>& c0, int leaf_count,
                                 std::span<const double> grid) {
  ValidityReport rep;
  rep.check = "corollary1c";
  rep.instances = 1;
  rep.pass = true;
  rep.worst = std::numeric_limits<double>::infinity();

  const double at0 = c0(0.0);
  if (std::abs(at0 - 1.0) > 1e-9) {
    rep.pass = false;
    rep.witness = "C0(0) = " + std::to_string(at0) + " != 1";
    rep.worst = -std::abs(at0 - 1.0);
    return rep;
  }
  const int n = 2 * ((leaf_count + 1) / 2);  // 2*ceil(m/2)
  // C0 = eta^n with eta convex: check second differences of the n-th root
  std::vector<double> root(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    const double v = c0(grid[i]);
    if (v < -1e-12) {
      rep.pass = false;
      rep.witness = "C0 negative at t = " + std::to_string(grid[i]);
      rep.worst = v;
      return rep;
    }
    root[i] = std::pow(std::max(v, 0.0), 1.0 / n);
  }
  for (size_t i = 0; i + 2 < grid.size(); ++i) {
    const double t1 = grid[i], t2 = grid[i + 1], t3 = grid[i + 2];
    const double lam = (t3 - t2) / (t3 - t1);
    const double slack = lam * root[i] + (1.0 - lam) * root[i + 2] - root[i + 1];
    if (slack < rep.worst) {
      rep.worst = slack;
      if (slack < -1e-8) {
        std::ostringstream os;
        os << "convexity violated near t = " << t2 << " (slack " << slack << ")";
        rep.witness = os.str();
        rep.pass = false;
      }
    }
  }
  const double tail = c0(grid.back());
  if (!(tail < 1e-3)) {
    rep.pass = false;
    rep.witness = "C0(" + std::to_string(grid.back()) + ") = " + std::to_string(tail) +
                  " does not decay below 1e-3";
  }
  return rep;
}

ValidityReport check_schur_closure(const CovModel& a, const CovModel& b, const Network& net,
                                   int n_instances, int n_points, std::uint64_t seed, Exec exec) {
  NetworkIndex idx(net);
  auto build = [&](const Instance& inst) {
    PairTable table(idx, inst.pts);
    std::vector<int> site(inst.pts.size());
    for (size_t i = 0; i < site.size(); ++i) site[i] = static_cast<int>(i);
    const Eigen::MatrixXd ma = build_covariance_matrix(a, table, site, inst.times, Exec::Serial);
    const Eigen::MatrixXd mb = build_covariance_matrix(b, table, site, inst.times, Exec::Serial);
    return Eigen::MatrixXd(ma.cwiseProduct(mb));
  };
  const std::string label =
      std::string("schur:") + variant_name(a.variant) + "*" + variant_name(b.variant);
  return run_eigen_check(label, build, net, n_instances, n_points, seed, exec);
}

}  // namespace streamcov
