#include "streamcov/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace streamcov {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(Errc::IoError, "cannot parse " + what + " from '" + s + "'");
  }
}

long long parse_int(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(Errc::IoError, "cannot parse " + what + " from '" + s + "'");
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Network read_network(std::istream& in) {
  Network net;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string tag;
    is >> tag;
    if (tag == "OUTLET") {
      long long v;
      if (!(is >> v)) fail(Errc::IoError, "line " + std::to_string(lineno) + ": OUTLET needs a vertex id");
      net.outlet = v;
      net.directed = true;
    } else if (tag == "E") {
      Edge e;
      if (!(is >> e.id >> e.tail >> e.head >> e.length >> e.omega))
        fail(Errc::IoError,
             "line " + std::to_string(lineno) + ": expected `E <id> <tail> <head> <length> <omega>`");
      net.edges.push_back(e);
    } else {
      fail(Errc::IoError, "line " + std::to_string(lineno) + ": unknown record '" + tag + "'");
    }
  }
  return net;
}

Network read_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open network file " + path);
  return read_network(in);
}

void write_network(std::ostream& out, const Network& net) {
  if (net.directed && net.outlet) out << "OUTLET " << *net.outlet << "\n";
  for (const auto& e : net.edges)
    out << "E " << e.id << " " << e.tail << " " << e.head << " " << fmt(e.length) << " "
        << fmt(e.omega) << "\n";
}

PointOnNetwork parse_point(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    fail(Errc::IoError, "point must be <edge-id>:<offset>, got '" + text + "'");
  PointOnNetwork p;
  p.edge = parse_int(trim(text.substr(0, colon)), "edge id");
  p.offset = parse_double(trim(text.substr(colon + 1)), "offset");
  return p;
}

std::string format_point(const PointOnNetwork& p) {
  return std::to_string(p.edge) + ":" + fmt(p.offset);
}

Observations read_observations(std::istream& in) {
  Observations obs;
  std::string line;
  if (!std::getline(in, line)) fail(Errc::IoError, "empty observations file");
  auto header = split(trim(line), ',');
  for (auto& h : header) h = trim(h);
  if (header.size() < 4 || header[0] != "site_edge" || header[1] != "site_offset" ||
      header[2] != "time" || header[3] != "response")
    fail(Errc::IoError, "header must start with site_edge,site_offset,time,response");
  obs.covariate_names.assign(header.begin() + 4, header.end());
  const int k = static_cast<int>(obs.covariate_names.size());

  std::vector<std::vector<double>> covrows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != 4 + k)
      fail(Errc::IoError, "line " + std::to_string(lineno) + ": expected " +
                              std::to_string(4 + k) + " columns");
    obs.site.push_back({parse_int(trim(cells[0]), "site_edge"),
                        parse_double(trim(cells[1]), "site_offset")});
    obs.time.push_back(parse_double(trim(cells[2]), "time"));
    const std::string resp = trim(cells[3]);
    if (resp.empty())
      obs.response.push_back(std::nullopt);
    else
      obs.response.push_back(parse_double(resp, "response"));
    std::vector<double> row(k);
    for (int j = 0; j < k; ++j) row[j] = parse_double(trim(cells[4 + j]), header[4 + j]);
    covrows.push_back(std::move(row));
  }
  obs.covariates.resize(static_cast<int>(covrows.size()), k);
  for (int i = 0; i < static_cast<int>(covrows.size()); ++i)
    for (int j = 0; j < k; ++j) obs.covariates(i, j) = covrows[i][j];
  return obs;
}

Observations read_observations_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open observations file " + path);
  return read_observations(in);
}

void write_observations(std::ostream& out, const Observations& obs) {
  out << "site_edge,site_offset,time,response";
  for (const auto& n : obs.covariate_names) out << "," << n;
  out << "\n";
  for (size_t i = 0; i < obs.site.size(); ++i) {
    out << obs.site[i].edge << "," << fmt(obs.site[i].offset) << "," << fmt(obs.time[i]) << ",";
    if (obs.response[i]) out << fmt(*obs.response[i]);
    for (int j = 0; j < obs.covariates.cols(); ++j) out << "," << fmt(obs.covariates(i, j));
    out << "\n";
  }
}

Dataset make_dataset(Network net, const Observations& obs) {
  Eigen::VectorXd z(obs.response.size());
  for (size_t i = 0; i < obs.response.size(); ++i) {
    if (!obs.response[i])
      fail(Errc::IoError, "record " + std::to_string(i + 1) + " has no response value");
    z(static_cast<int>(i)) = *obs.response[i];
  }
  return Dataset::build(std::move(net), obs.site, obs.time, std::move(z), obs.covariates);
}

// --- model specification strings ------------------------------------------------

namespace {

const std::map<std::string, ScalarKind, std::less<>>& scalar_kind_names() {
  static const std::map<std::string, ScalarKind, std::less<>> m = {
      {"powexp", ScalarKind::CmPowExp},           {"negpow", ScalarKind::CmNegPow},
      {"sech", ScalarKind::CmSech},               {"cauchy", ScalarKind::CmCauchy},
      {"powerplusone", ScalarKind::BfPowerPlusOne}, {"logratio", ScalarKind::BfLogRatio},
      {"powerplusbeta", ScalarKind::BfPowerPlusBeta}, {"expsaturate", ScalarKind::BfExpSaturate}};
  return m;
}

std::string scalar_kind_name(ScalarKind k) {
  for (const auto& [name, kind] : scalar_kind_names())
    if (kind == k) return name;
  return "?";
}

std::vector<double> default_scalar_params(ScalarKind k) {
  switch (k) {
    case ScalarKind::CmPowExp: return {1.0, 1.0};
    case ScalarKind::CmNegPow: return {1.0, -1.0};
    case ScalarKind::CmSech: return {1.0, 1.0};
    case ScalarKind::CmCauchy: return {1.0, 1.0, 1.0};
    case ScalarKind::BfPowerPlusOne: return {1.0, 1.0, 1.0};
    case ScalarKind::BfLogRatio: return {1.0, 2.0, 1.0};
    case ScalarKind::BfPowerPlusBeta: return {1.0, 1.0};
    case ScalarKind::BfExpSaturate: return {1.0, 2.0};
  }
  return {};
}

CovModel default_model(const std::string& variant) {
  CovModel m;
  if (variant == "model1") {
    m.variant = Variant::Model1;
    m.params = Model1Params{};
  } else if (variant == "model2") {
    m.variant = Variant::Model2;
    m.params = Model2Params{};
  } else if (variant == "model3") {
    m.variant = Variant::Model3;
    m.params = Model3Params{};
  } else if (variant == "model4") {
    m.variant = Variant::Model4;
    m.params = Model4Params{};
  } else if (variant == "model5") {
    m.variant = Variant::Model5;
    m.params = Model5Params{};
  } else if (variant == "separable") {
    m.variant = Variant::Separable;
    m.params = SeparableParams{};
  } else if (variant == "tailup") {
    m.variant = Variant::TailUp;
    m.params = TailUpParams{};
  } else if (variant == "taildown") {
    m.variant = Variant::TailDown;
    m.params = TailDownParams{};
  } else if (variant == "gneiting") {
    m.variant = Variant::Gneiting;
    m.params = GneitingParams{};
  } else {
    fail(Errc::UnknownVariant, "unknown model variant '" + variant + "'");
  }
  return m;
}

Kernel* kernel_slot(CovModel& m) {
  if (m.variant == Variant::TailUp) return &std::get<TailUpParams>(m.params).kernel;
  if (m.variant == Variant::TailDown) return &std::get<TailDownParams>(m.params).kernel;
  return nullptr;
}

}  // namespace

ModelSpec parse_model_spec(const std::string& text, std::optional<int> leaf_count) {
  const auto sections = split(trim(text), ';');
  if (sections.empty() || trim(sections[0]).empty())
    fail(Errc::UnknownVariant, "empty model specification");

  std::string head = trim(sections[0]);
  std::string variant = head, params_part;
  const auto colon = head.find(':');
  if (colon != std::string::npos) {
    variant = trim(head.substr(0, colon));
    params_part = trim(head.substr(colon + 1));
  }
  ModelSpec spec;
  spec.model = default_model(variant);

  std::optional<std::vector<std::string>> free_list, fixed_list;

  auto apply_kv = [&](const std::string& key, const std::string& value) {
    if (key == "sigma2") {
      spec.model.sigma2 = parse_double(value, "sigma2");
      return;
    }
    if (key == "nugget") {
      spec.model.nugget = parse_double(value, "nugget");
      return;
    }
    if (key == "kernel") {
      Kernel* k = kernel_slot(spec.model);
      if (!k) fail(Errc::UnknownParam, "'kernel' only applies to tailup/taildown");
      if (value == "exponential")
        k->kind = KernelKind::Exponential;
      else if (value == "mariah")
        k->kind = KernelKind::Mariah;
      else
        fail(Errc::UnknownParam, "unknown kernel '" + value + "'");
      return;
    }
    if (spec.model.variant == Variant::Gneiting && (key == "phi" || key == "psi")) {
      auto it = scalar_kind_names().find(value);
      if (it == scalar_kind_names().end())
        fail(Errc::UnknownParam, "unknown scalar family '" + value + "'");
      auto& g = std::get<GneitingParams>(spec.model.params);
      ScalarFamily& fam = key == "phi" ? g.phi : g.psi;
      fam.kind = it->second;
      fam.params = default_scalar_params(it->second);
      return;
    }
    set_param(spec.model, key, parse_double(value, key));  // throws UnknownParam
  };

  auto parse_kv_list = [&](const std::string& part) {
    for (const auto& item : split(part, ',')) {
      const std::string kv = trim(item);
      if (kv.empty()) continue;
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        fail(Errc::IoError, "expected key=value, got '" + kv + "'");
      apply_kv(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
  };

  if (!params_part.empty()) parse_kv_list(params_part);

  for (size_t i = 1; i < sections.size(); ++i) {
    const std::string sec = trim(sections[i]);
    if (sec.empty()) continue;
    const auto eq = sec.find('=');
    if (eq == std::string::npos) fail(Errc::IoError, "expected key=value, got '" + sec + "'");
    const std::string key = trim(sec.substr(0, eq));
    const std::string value = trim(sec.substr(eq + 1));
    if (key == "free" || key == "fixed") {
      std::vector<std::string> names;
      for (const auto& n : split(value, ','))
        if (!trim(n).empty()) names.push_back(trim(n));
      if (key == "free")
        free_list = names;
      else
        fixed_list = names;
    } else {
      apply_kv(key, value);
    }
  }

  // constraint check; the message names the violated inequality
  try {
    check_model_params(spec.model, leaf_count);
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidParams) {
      const std::string prefix = std::string(errc_name(Errc::InvalidParams)) + ": ";
      std::string msg = e.what();
      if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
      fail(Errc::ConstraintViolation, msg);
    }
    throw;
  }

  // resolve the free parameter list
  std::vector<std::string> all;
  for (const auto& s : param_specs(spec.model)) all.push_back(s.name);
  auto known = [&](const std::string& n) {
    if (std::find(all.begin(), all.end(), n) == all.end())
      fail(Errc::UnknownParam, "unknown parameter '" + n + "' in free/fixed list");
  };
  if (free_list && fixed_list)
    fail(Errc::IoError, "give either free= or fixed=, not both");
  if (free_list) {
    for (const auto& n : *free_list) known(n);
    spec.free = *free_list;
  } else if (fixed_list) {
    for (const auto& n : *fixed_list) known(n);
    for (const auto& n : all)
      if (std::find(fixed_list->begin(), fixed_list->end(), n) == fixed_list->end())
        spec.free.push_back(n);
  } else {
    spec.free = all;
  }
  return spec;
}

std::string format_model_spec(const CovModel& model) {
  std::ostringstream os;
  os << variant_name(model.variant) << ":";
  bool first = true;
  auto emit = [&](const std::string& k, const std::string& v) {
    if (!first) os << ",";
    os << k << "=" << v;
    first = false;
  };
  if (const Kernel* k = kernel_slot(const_cast<CovModel&>(model)))
    emit("kernel", k->kind == KernelKind::Exponential ? "exponential" : "mariah");
  if (model.variant == Variant::Gneiting) {
    const auto& g = std::get<GneitingParams>(model.params);
    emit("phi", scalar_kind_name(g.phi.kind));
    emit("psi", scalar_kind_name(g.psi.kind));
  }
  for (const auto& s : param_specs(model)) {
    if (s.name == "sigma2" || s.name == "nugget") continue;
    emit(s.name, fmt(get_param(model, s.name)));
  }
  os << ";sigma2=" << fmt(model.sigma2) << ";nugget=" << fmt(model.nugget);
  return os.str();
}

ScalarFamily parse_scalar_family(const std::string& text) {
  const std::string t = trim(text);
  const auto colon = t.find(':');
  const std::string fam = trim(colon == std::string::npos ? t : t.substr(0, colon));
  auto it = scalar_kind_names().find(fam);
  if (it == scalar_kind_names().end())
    fail(Errc::UnknownVariant, "unknown scalar family '" + fam + "'");
  ScalarFamily f;
  f.kind = it->second;
  f.params = default_scalar_params(f.kind);
  if (colon != std::string::npos) {
    const auto& names = scalar_param_names(f.kind);
    for (const auto& item : split(t.substr(colon + 1), ',')) {
      const std::string kv = trim(item);
      if (kv.empty()) continue;
      const auto eq = kv.find('=');
      if (eq == std::string::npos) fail(Errc::IoError, "expected key=value, got '" + kv + "'");
      const std::string key = trim(kv.substr(0, eq));
      const auto pos = std::find(names.begin(), names.end(), key);
      if (pos == names.end())
        fail(Errc::UnknownParam, "unknown parameter '" + key + "' for family " + fam);
      f.params[pos - names.begin()] = parse_double(trim(kv.substr(eq + 1)), key);
    }
  }
  check_scalar_params(f);
  return f;
}

void emit_surface(std::ostream& grid, std::ostream& marginal_s, std::ostream& marginal_t,
                  const CovModel& model, const SurfaceOptions& opt) {
  check_model_params(model, opt.leaf_count > 0 ? std::optional<int>(opt.leaf_count)
                                               : std::nullopt);
  if (opt.res_d < 2 || opt.res_u < 2)
    fail(Errc::IoError, "grid resolution must be at least 2 per axis");

  auto eval = [&](double d, double u) {
    PairContext ctx;
    ctx.d = d;
    ctx.u = u;
    ctx.weight = opt.weight;
    FlowRelation rel;
    if (opt.unconnected) {
      rel.kind = FlowKind::Unconnected;
      rel.d = d;
      rel.a = 0.5 * d;  // junction distances split evenly
      rel.b = 0.5 * d;
    } else {
      rel.kind = d == 0.0 ? FlowKind::SamePoint : FlowKind::Connected;
      rel.d = d;
    }
    ctx.rel = rel;
    return model.sigma2 * unit_covariance(model, ctx, opt.leaf_count);
  };

  grid << "d,u,c\n";
  for (int i = 0; i < opt.res_d; ++i) {
    const double d = opt.d_max * i / (opt.res_d - 1);
    for (int j = 0; j < opt.res_u; ++j) {
      const double u = opt.u_max * j / (opt.res_u - 1);
      grid << fmt(d) << "," << fmt(u) << "," << fmt(eval(d, u)) << "\n";
    }
  }
  marginal_s << "d,c\n";
  for (int i = 0; i < opt.res_d; ++i) {
    const double d = opt.d_max * i / (opt.res_d - 1);
    marginal_s << fmt(d) << "," << fmt(eval(d, 0.0)) << "\n";
  }
  marginal_t << "u,c\n";
  for (int j = 0; j < opt.res_u; ++j) {
    const double u = opt.u_max * j / (opt.res_u - 1);
    marginal_t << fmt(u) << "," << fmt(eval(0.0, u)) << "\n";
  }
}

}  // namespace streamcov
