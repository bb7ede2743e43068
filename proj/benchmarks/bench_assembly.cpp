// Times the serial reference against the OpenMP row-parallel assembly for
// covariance matrices, and the instance-parallel validity checker.  The two
// paths produce bitwise-identical matrices; this target only reports timing.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "streamcov/models.hpp"
#include "streamcov/synth.hpp"
#include "streamcov/validate.hpp"

using namespace streamcov;
using Clock = std::chrono::steady_clock;

namespace {

double time_once(const std::function<void()>& fn) {
  const auto t0 = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) best = std::min(best, time_once(fn));
  return best;
}

}  // namespace

int main() {
  std::printf("threads: %d\n\n", omp_get_max_threads());

  Rng rng(12);
  const Network net = random_tree(rng, 60, 0.5, 3.0);
  NetworkIndex idx(net);

  CovModel m1;
  m1.variant = Variant::Model1;
  m1.params = Model1Params{1, 1, 1, 0.5, 0.5, 1};
  m1.nugget = 0.1;
  CovModel m4;
  m4.variant = Variant::Model4;
  m4.params = Model4Params{1, 1, 1, 1};
  m4.nugget = 0.1;

  std::printf("%-8s %-8s %12s %12s %9s %10s\n", "model", "records", "serial [s]", "openmp [s]",
              "speedup", "max |diff|");
  for (const CovModel* model : {&m1, &m4}) {
    for (int n : {240, 480, 960}) {
      auto pts = random_points(net, rng, n / 4);  // several records per site
      PairTable table(idx, pts);
      std::vector<int> site(n);
      std::vector<double> times(n);
      for (int i = 0; i < n; ++i) {
        site[i] = i % static_cast<int>(pts.size());
        times[i] = static_cast<double>(i / pts.size());
      }
      Eigen::MatrixXd serial, parallel;
      const double ts = best_of(3, [&] {
        serial = build_covariance_matrix(*model, table, site, times, Exec::Serial);
      });
      const double tp = best_of(3, [&] {
        parallel = build_covariance_matrix(*model, table, site, times, Exec::Parallel);
      });
      const double diff = (serial - parallel).cwiseAbs().maxCoeff();
      std::printf("%-8s %-8d %12.4f %12.4f %8.2fx %10.1e\n", variant_name(model->variant), n, ts,
                  tp, ts / tp, diff);
    }
  }

  std::printf("\nvalidity checker, 40 instances x 35 points\n");
  CovModel m5;
  m5.variant = Variant::Model5;
  m5.params = Model5Params{10, 5, 1.5, 1};
  m5.nugget = 0.1;
  const double vs = best_of(2, [&] { check_pd(m5, net, 40, 35, 7, Exec::Serial); });
  const double vp = best_of(2, [&] { check_pd(m5, net, 40, 35, 7, Exec::Parallel); });
  std::printf("%-17s %12.4f %12.4f %8.2fx\n", "check_pd", vs, vp, vs / vp);
  return 0;
}
