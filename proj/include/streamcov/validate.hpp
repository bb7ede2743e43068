#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "streamcov/models.hpp"

namespace streamcov {

/// Outcome of a numerical validity check.  `worst` is the extreme statistic
/// across instances (scaled min eigenvalue, max centered quadratic form, or
/// min second-difference slack); `witness` describes the failing instance
/// when there is one.  Checks are falsification tools, not certificates.
struct ValidityReport {
  std::string check;
  int instances = 0;
  double worst = 0.0;
  bool pass = false;
  std::string witness;
  std::uint64_t seed = 0;
};

/// Samples random point/time sets on the network, assembles the covariance
/// matrix, and reports the minimum eigenvalue scaled by trace/n (unit-free).
/// Pass requires every instance to stay above -1e-8.
ValidityReport check_pd(const CovModel& model, const Network& net, int n_instances, int n_points,
                        std::uint64_t seed, Exec exec = Exec::Parallel);

/// Same eigenvalue test for an arbitrary pair kernel (used for convex-cone
/// combinations of tail models with temporal components).
ValidityReport check_pd_fn(const PairEvaluator& entry, const std::string& label,
                           const Network& net, int n_instances, int n_points, std::uint64_t seed,
                           Exec exec = Exec::Parallel);

/// Conditional negative definiteness of psi over the tree metric: for random
/// point sets and unit-norm coefficient vectors summing to zero, the
/// quadratic form sum_ij a_i a_j psi(d_ij) must stay below 1e-8.
ValidityReport check_cnd(const ScalarFamily& psi, const Network& net, int n_instances,
                         int n_points, std::uint64_t seed, Exec exec = Exec::Parallel);

ValidityReport check_cnd_fn(const std::function<double(double)>& psi, const std::string& label,
                            const Network& net, int n_instances, int n_points, std::uint64_t seed,
                            Exec exec = Exec::Parallel);

/// Metric-model premise check: C0(0) = 1, C0 admits a convex 2*ceil(m/2)-th
/// root (checked by second differences of C0^(1/(2*ceil(m/2))) on the grid),
/// and C0 decays below 1e-3 by the end of the grid.
ValidityReport check_corollary1c(const std::function<double(double)>& c0, int leaf_count,
                                 std::span<const double> grid);

/// Schur product closure: the elementwise product of the two model matrices
/// must pass the same eigenvalue test.
ValidityReport check_schur_closure(const CovModel& a, const CovModel& b, const Network& net,
                                   int n_instances, int n_points, std::uint64_t seed,
                                   Exec exec = Exec::Parallel);

}  // namespace streamcov
