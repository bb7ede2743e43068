#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "streamcov/inference.hpp"
#include "streamcov/models.hpp"

namespace streamcov {

// Network text format, one record per line:
//   OUTLET <vertex-id>                          (optional; makes the network directed)
//   E <edge-id> <tail-vertex> <head-vertex> <length> <omega>
// '#' starts a comment.  Points are written as <edge-id>:<offset>.
Network read_network(std::istream& in);
Network read_network_file(const std::string& path);
void write_network(std::ostream& out, const Network& net);

PointOnNetwork parse_point(const std::string& text);
std::string format_point(const PointOnNetwork& p);

/// Observation CSV with header `site_edge,site_offset,time,response,cov1,...`.
/// The response column may be empty (prediction targets, simulation designs).
struct Observations {
  std::vector<PointOnNetwork> site;
  std::vector<double> time;
  std::vector<std::optional<double>> response;
  Eigen::MatrixXd covariates;  // without intercept
  std::vector<std::string> covariate_names;
};

Observations read_observations(std::istream& in);
Observations read_observations_file(const std::string& path);
void write_observations(std::ostream& out, const Observations& obs);

/// Requires every response present.
Dataset make_dataset(Network net, const Observations& obs);

/// Model specification string:
///   <variant>:<k=v,...>[;sigma2=..][;nugget=..][;free=a,b,..|;fixed=a,b,..]
/// e.g. `model5:theta1=10,theta2=5,theta3=1.5,theta4=1;sigma2=1;nugget=0`.
/// Unknown variants/keys are rejected; constraint violations name the
/// inequality.  leaf_count enables the model3 delta bound check.
struct ModelSpec {
  CovModel model;
  std::vector<std::string> free;  // resolved free parameter list
};

ModelSpec parse_model_spec(const std::string& text, std::optional<int> leaf_count = {});
std::string format_model_spec(const CovModel& model);

/// Scalar family literal `<family>:<k=v,...>`, e.g.
/// `powerplusbeta:lambda=0.5,beta=2`.
ScalarFamily parse_scalar_family(const std::string& text);

/// Covariance surface on a regular (d, u) grid, plus both marginal traces.
/// Values are printed with round-trip precision so they compare bit-for-bit
/// with direct evaluation.  Flow-direction families evaluate under the given
/// relation (connected pairs split the junction distances evenly when
/// unconnected).
struct SurfaceOptions {
  double d_max = 10.0;
  double u_max = 5.0;
  int res_d = 41;
  int res_u = 41;
  bool unconnected = false;  // for tail-up / tail-down / model4 families
  double weight = 1.0;       // tail-up weight for connected evaluation
  int leaf_count = -1;
};

void emit_surface(std::ostream& grid, std::ostream& marginal_s, std::ostream& marginal_t,
                  const CovModel& model, const SurfaceOptions& opt);

}  // namespace streamcov
