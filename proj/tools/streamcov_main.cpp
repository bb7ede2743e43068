// Command-line front end: model fitting, prediction, cross validation,
// simulation, validity checking, and covariance-surface emission for
// space-time covariance models on stream networks.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "streamcov/inference.hpp"
#include "streamcov/io.hpp"
#include "streamcov/validate.hpp"

using namespace streamcov;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidationFailure = 2;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot open output file " + path);
  return out;
}

Eigen::VectorXd parse_beta(const std::string& text, int p) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (text.empty()) return beta;
  std::istringstream is(text);
  std::string item;
  int i = 0;
  while (std::getline(is, item, ',')) {
    if (i >= p) fail(Errc::DimensionMismatch, "more beta entries than design columns");
    beta(i++) = std::stod(item);
  }
  if (i != p)
    fail(Errc::DimensionMismatch,
         "expected " + std::to_string(p) + " beta entries, got " + std::to_string(i));
  return beta;
}

std::vector<KrigeTarget> targets_from(const Observations& obs, int p) {
  std::vector<KrigeTarget> targets;
  for (size_t i = 0; i < obs.site.size(); ++i) {
    KrigeTarget t;
    t.site = obs.site[i];
    t.time = obs.time[i];
    t.x = Eigen::VectorXd::Ones(p);
    for (int j = 0; j < obs.covariates.cols(); ++j) t.x(j + 1) = obs.covariates(i, j);
    t.observed = obs.response[i];
    targets.push_back(std::move(t));
  }
  return targets;
}

void print_fit(std::ostream& os, const FitResult& fit) {
  os << "model: " << format_model_spec(fit.model) << "\n";
  os << "beta:";
  for (int i = 0; i < fit.beta.size(); ++i) os << " " << fmt(fit.beta(i));
  os << "\n";
  os << "loglik: " << fmt(fit.loglik) << "\nbic: " << fmt(fit.bic)
     << "\nn_params: " << fit.n_params << "\nconverged: " << (fit.converged ? "yes" : "no")
     << "\niterations: " << fit.iterations << "\nevaluations: " << fit.evaluations
     << "\njitter_retries: " << fit.jitter_retries << "\n";
}

int run_validate_checks(const std::string& checks_csv, const std::string& model_spec,
                        const std::string& model_b_spec, const std::string& psi_spec,
                        const Network& net, int instances, int points, std::uint64_t seed,
                        double grid_max, const std::string& out_path) {
  NetworkIndex idx(net);
  const int leaves = idx.leaf_count();

  std::vector<ValidityReport> reports;
  std::istringstream cs(checks_csv);
  std::string check;
  while (std::getline(cs, check, ',')) {
    if (check == "pd") {
      const CovModel m = parse_model_spec(model_spec, leaves).model;
      reports.push_back(check_pd(m, net, instances, points, seed));
    } else if (check == "cnd") {
      if (psi_spec.empty()) fail(Errc::IoError, "cnd check needs --psi <family:params>");
      reports.push_back(check_cnd(parse_scalar_family(psi_spec), net, instances, points, seed));
    } else if (check == "schur") {
      if (model_b_spec.empty()) fail(Errc::IoError, "schur check needs --model-b");
      const CovModel a = parse_model_spec(model_spec, leaves).model;
      const CovModel b = parse_model_spec(model_b_spec, leaves).model;
      reports.push_back(check_schur_closure(a, b, net, instances, points, seed));
    } else if (check == "corollary1c") {
      const CovModel m = parse_model_spec(model_spec, leaves).model;
      std::vector<double> grid;
      for (int i = 0; i <= 400; ++i) grid.push_back(grid_max * i / 400.0);
      auto c0 = [&](double t) {
        PairContext ctx;
        ctx.d = t;
        ctx.rel = FlowRelation{t == 0.0 ? FlowKind::SamePoint : FlowKind::Connected, t, 0, 0};
        return unit_covariance(m, ctx, leaves);
      };
      reports.push_back(check_corollary1c(c0, leaves, grid));
    } else {
      fail(Errc::IoError, "unknown check '" + check + "' (pd, cnd, schur, corollary1c)");
    }
  }

  std::ostringstream table;
  table << "check,instances,worst,pass,seed,witness\n";
  bool all_pass = true;
  for (const auto& r : reports) {
    table << r.check << "," << r.instances << "," << fmt(r.worst) << "," << (r.pass ? 1 : 0)
          << "," << r.seed << ",\"" << r.witness << "\"\n";
    all_pass = all_pass && r.pass;
  }
  std::cout << table.str();
  if (!out_path.empty()) open_out(out_path) << table.str();
  return all_pass ? kExitOk : kExitValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"space-time covariance models on stream networks"};
  app.require_subcommand(1);

  std::string network_path, obs_path, targets_path, model_spec, model_b_spec, psi_spec;
  std::string out_path, out_prefix, beta_text, checks = "pd";
  std::uint64_t seed = 1;
  int folds = 8, max_evals = 4000, instances = 50, points = 25;
  double dmax = 10.0, umax = 5.0, grid_max = 12.0, weight = 1.0;
  int res = 41, res_u = -1;
  bool unconnected = false;

  auto* fit_cmd = app.add_subcommand("fit", "maximum-likelihood fit of a covariance model");
  fit_cmd->add_option("--network", network_path, "network text file")->required();
  fit_cmd->add_option("--obs", obs_path, "observation CSV")->required();
  fit_cmd->add_option("--model", model_spec, "model spec string")->required();
  fit_cmd->add_option("--seed", seed);
  fit_cmd->add_option("--max-evals", max_evals);
  fit_cmd->add_option("--out", out_path, "fit report CSV");

  auto* predict_cmd = app.add_subcommand("predict", "universal kriging at target records");
  predict_cmd->add_option("--network", network_path)->required();
  predict_cmd->add_option("--train", obs_path)->required();
  predict_cmd->add_option("--targets", targets_path)->required();
  predict_cmd->add_option("--model", model_spec)->required();
  predict_cmd->add_option("--out", out_path);

  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross validation split by site");
  cv_cmd->add_option("--network", network_path)->required();
  cv_cmd->add_option("--obs", obs_path)->required();
  cv_cmd->add_option("--model", model_spec)->required();
  std::string assignments_path;
  cv_cmd->add_option("--folds", folds);
  cv_cmd->add_option("--seed", seed);
  cv_cmd->add_option("--max-evals", max_evals);
  cv_cmd->add_option("--out", out_path);
  cv_cmd->add_option("--assignments-out", assignments_path,
                     "write the seed-derived site-to-fold assignment");

  auto* sim_cmd = app.add_subcommand("simulate", "draw a Gaussian sample at design records");
  sim_cmd->add_option("--network", network_path)->required();
  sim_cmd->add_option("--design", obs_path, "records whose responses are replaced")->required();
  sim_cmd->add_option("--model", model_spec)->required();
  sim_cmd->add_option("--beta", beta_text, "comma-separated mean coefficients (default 0)");
  sim_cmd->add_option("--seed", seed);
  sim_cmd->add_option("--out", out_path);

  auto* val_cmd = app.add_subcommand("validate", "numerical validity checks");
  val_cmd->add_option("--network", network_path)->required();
  val_cmd->add_option("--checks", checks, "comma list: pd,cnd,schur,corollary1c");
  val_cmd->add_option("--model", model_spec);
  val_cmd->add_option("--model-b", model_b_spec, "second model for the schur check");
  val_cmd->add_option("--psi", psi_spec, "scalar family for the cnd check");
  val_cmd->add_option("--instances", instances);
  val_cmd->add_option("--points", points);
  val_cmd->add_option("--seed", seed);
  val_cmd->add_option("--grid-max", grid_max);
  val_cmd->add_option("--out", out_path);

  auto* surf_cmd = app.add_subcommand("surface", "covariance surface and marginal traces");
  surf_cmd->add_option("--model", model_spec)->required();
  surf_cmd->add_option("--dmax", dmax);
  surf_cmd->add_option("--umax", umax);
  surf_cmd->add_option("--res", res, "grid resolution per axis (>= 2)");
  surf_cmd->add_option("--res-u", res_u, "override the time-axis resolution");
  surf_cmd->add_flag("--unconnected", unconnected,
                     "evaluate flow-direction families on unconnected pairs");
  surf_cmd->add_option("--weight", weight, "tail-up weight for connected evaluation");
  surf_cmd->add_option("--out-prefix", out_prefix)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) {
      const Network net = read_network_file(network_path);
      for (const auto& w : validate_network(net)) std::cerr << "warning: " << w << "\n";
      Dataset data = make_dataset(net, read_observations_file(obs_path));
      const ModelSpec spec = parse_model_spec(model_spec, data.table->leaf_count());
      FitOptions opt;
      opt.max_evals = max_evals;
      const FitResult fit = fit_ml(data, spec.model, spec.free, opt);
      print_fit(std::cout, fit);
      if (!out_path.empty()) {
        auto out = open_out(out_path);
        out << "model,LL,BIC,n_params,converged,iterations\n";
        out << variant_name(fit.model.variant) << "," << fmt(fit.loglik) << "," << fmt(fit.bic)
            << "," << fit.n_params << "," << (fit.converged ? 1 : 0) << "," << fit.iterations
            << "\n";
      }
      return kExitOk;
    }

    if (*predict_cmd) {
      const Network net = read_network_file(network_path);
      for (const auto& w : validate_network(net)) std::cerr << "warning: " << w << "\n";
      Dataset data = make_dataset(net, read_observations_file(obs_path));
      const ModelSpec spec = parse_model_spec(model_spec, data.table->leaf_count());
      const Observations tobs = read_observations_file(targets_path);
      const auto targets = targets_from(tobs, static_cast<int>(data.X.cols()));
      const PredictionResult pred = krige(data, spec.model, targets);
      for (const auto& w : pred.warnings) std::cerr << "warning: " << w << "\n";
      std::ostringstream os;
      os << "site_edge,site_offset,time,mean,variance,observed,crps\n";
      for (size_t i = 0; i < pred.rows.size(); ++i) {
        const auto& r = pred.rows[i];
        os << tobs.site[i].edge << "," << fmt(tobs.site[i].offset) << "," << fmt(tobs.time[i])
           << "," << fmt(r.mean) << "," << fmt(r.variance) << ",";
        if (r.observed) os << fmt(*r.observed);
        os << ",";
        if (r.crps) os << fmt(*r.crps);
        os << "\n";
      }
      std::cout << os.str();
      if (!out_path.empty()) open_out(out_path) << os.str();
      return kExitOk;
    }

    if (*cv_cmd) {
      const Network net = read_network_file(network_path);
      for (const auto& w : validate_network(net)) std::cerr << "warning: " << w << "\n";
      Dataset data = make_dataset(net, read_observations_file(obs_path));
      const ModelSpec spec = parse_model_spec(model_spec, data.table->leaf_count());
      FitOptions opt;
      opt.max_evals = max_evals;
      const CvResult cv = cross_validate(data, spec.model, spec.free, folds, seed, opt);
      std::ostringstream os;
      os << "fold,n_test,LL,BIC,RMSPE,CRPS\n";
      for (const auto& f : cv.folds)
        os << f.fold << "," << f.n_test << "," << fmt(f.loglik) << "," << fmt(f.bic) << ","
           << fmt(f.rmspe) << "," << fmt(f.crps) << "\n";
      os << "avg,," << fmt(cv.loglik) << "," << fmt(cv.bic) << "," << fmt(cv.rmspe) << ","
         << fmt(cv.crps) << "\n";
      std::cout << os.str();
      if (!out_path.empty()) open_out(out_path) << os.str();
      if (!assignments_path.empty()) {
        auto out = open_out(assignments_path);
        out << "site_edge,site_offset,fold\n";
        for (int s = 0; s < data.n_sites(); ++s)
          out << data.sites[s].edge << "," << fmt(data.sites[s].offset) << ","
              << cv.fold_of_site[s] << "\n";
      }
      return kExitOk;
    }

    if (*sim_cmd) {
      const Network net = read_network_file(network_path);
      for (const auto& w : validate_network(net)) std::cerr << "warning: " << w << "\n";
      Observations obs = read_observations_file(obs_path);
      Observations design = obs;  // responses may be missing in the design
      for (auto& r : design.response) r = r.value_or(0.0);
      Dataset data = make_dataset(net, design);
      const ModelSpec spec = parse_model_spec(model_spec, data.table->leaf_count());
      const Eigen::VectorXd beta = parse_beta(beta_text, static_cast<int>(data.X.cols()));
      const Eigen::VectorXd z = simulate(data, spec.model, beta, seed);
      for (size_t i = 0; i < obs.response.size(); ++i) obs.response[i] = z(static_cast<int>(i));
      std::ostringstream os;
      write_observations(os, obs);
      std::cout << os.str();
      if (!out_path.empty()) open_out(out_path) << os.str();
      return kExitOk;
    }

    if (*val_cmd) {
      const Network net = read_network_file(network_path);
      for (const auto& w : validate_network(net)) std::cerr << "warning: " << w << "\n";
      return run_validate_checks(checks, model_spec, model_b_spec, psi_spec, net, instances,
                                 points, seed, grid_max, out_path);
    }

    if (*surf_cmd) {
      const ModelSpec spec = parse_model_spec(model_spec);
      SurfaceOptions opt;
      opt.d_max = dmax;
      opt.u_max = umax;
      opt.res_d = res;
      opt.res_u = res_u > 0 ? res_u : res;
      opt.unconnected = unconnected;
      opt.weight = weight;
      auto grid = open_out(out_prefix + "_grid.csv");
      auto ms = open_out(out_prefix + "_marginal_s.csv");
      auto mt = open_out(out_prefix + "_marginal_t.csv");
      emit_surface(grid, ms, mt, spec.model, opt);
      std::cout << "wrote " << out_prefix << "_grid.csv, _marginal_s.csv, _marginal_t.csv\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
