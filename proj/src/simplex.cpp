#include "streamcov/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace streamcov {

namespace {

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;

  void sort() {
    std::vector<int> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
    std::vector<Eigen::VectorXd> nx(x.size());
    std::vector<double> nf(f.size());
    for (size_t i = 0; i < order.size(); ++i) {
      nx[i] = x[order[i]];
      nf[i] = f[order[i]];
    }
    x.swap(nx);
    f.swap(nf);
  }
};

}  // namespace

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                          const Eigen::VectorXd& x0, const SimplexOptions& opt) {
  const int n = static_cast<int>(x0.size());
  SimplexResult out;
  out.x = x0;
  out.fmin = fn(x0);
  out.evaluations = 1;

  if (n == 0) {
    out.converged = true;
    return out;
  }

  // standard coefficients
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  double step = opt.init_step;
  for (int round = 0; round <= opt.restarts; ++round) {
    Simplex s;
    s.x.assign(n + 1, out.x);
    s.f.assign(n + 1, 0.0);
    s.f[0] = out.fmin;
    for (int i = 1; i <= n; ++i) {
      s.x[i](i - 1) += step;
      s.f[i] = fn(s.x[i]);
      ++out.evaluations;
    }
    s.sort();

    while (out.evaluations < opt.max_evals) {
      ++out.iterations;
      const double spread = std::abs(s.f[n] - s.f[0]);
      if (spread <= opt.ftol * (1.0 + std::abs(s.f[0]))) {
        out.converged = true;
        break;
      }

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < n; ++i) centroid += s.x[i];
      centroid /= n;

      const Eigen::VectorXd xr = centroid + alpha * (centroid - s.x[n]);
      const double fr = fn(xr);
      ++out.evaluations;

      if (fr < s.f[0]) {
        const Eigen::VectorXd xe = centroid + gamma * (xr - centroid);
        const double fe = fn(xe);
        ++out.evaluations;
        if (fe < fr) {
          s.x[n] = xe;
          s.f[n] = fe;
        } else {
          s.x[n] = xr;
          s.f[n] = fr;
        }
      } else if (fr < s.f[n - 1]) {
        s.x[n] = xr;
        s.f[n] = fr;
      } else {
        const bool outside = fr < s.f[n];
        const Eigen::VectorXd base = outside ? xr : s.x[n];
        const Eigen::VectorXd xc = centroid + rho * (base - centroid);
        const double fc = fn(xc);
        ++out.evaluations;
        if (fc < std::min(fr, s.f[n])) {
          s.x[n] = xc;
          s.f[n] = fc;
        } else {
          for (int i = 1; i <= n; ++i) {
            s.x[i] = s.x[0] + sigma * (s.x[i] - s.x[0]);
            s.f[i] = fn(s.x[i]);
            ++out.evaluations;
          }
        }
      }
      s.sort();
    }

    if (s.f[0] < out.fmin) {
      out.fmin = s.f[0];
      out.x = s.x[0];
    }
    step *= 0.25;  // restart with a tighter simplex around the incumbent
    if (out.evaluations >= opt.max_evals) break;
  }
  return out;
}

}  // namespace streamcov
