#include "finsler/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"

namespace finsler {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config error at '" + where + "': " + what);
}

void reject_unknown(const json& j, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

std::string str(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(num(v, where));
  return out;
}

FinslerMetricSpec parse_metric(const json& j) {
  if (!j.is_object()) fail("metric", "expected a table");
  if (j.contains("fixture")) {
    reject_unknown(j, "metric", {"fixture", "n", "r"});
    int n = j.contains("n") ? static_cast<int>(num(j["n"], "metric.n")) : 3;
    double r = j.contains("r") ? num(j["r"], "metric.r") : 1.0;
    return make_fixture(str(j["fixture"], "metric.fixture"), n, r);
  }
  reject_unknown(j, "metric", {"chart", "alpha", "beta", "phi"});
  FinslerMetricSpec spec;
  if (!j.contains("chart")) fail("metric", "missing 'chart' or 'fixture'");
  {
    const json& c = j["chart"];
    reject_unknown(c, "metric.chart", {"dim", "box", "grid"});
    spec.chart.dim = static_cast<int>(num(c.at("dim"), "metric.chart.dim"));
    if (c.contains("box")) {
      for (const auto& iv : c["box"]) {
        auto pair = numbers(iv, "metric.chart.box");
        if (pair.size() != 2) fail("metric.chart.box", "expected [lo, hi]");
        spec.chart.box.emplace_back(pair[0], pair[1]);
      }
    } else {
      spec.chart.box.assign(spec.chart.dim, {-0.5, 0.5});
    }
    if (c.contains("grid")) {
      for (const auto& g : c["grid"])
        spec.chart.grid.push_back(
            static_cast<int>(num(g, "metric.chart.grid")));
    } else {
      spec.chart.grid.assign(spec.chart.dim, 2);
    }
  }
  if (j.contains("alpha")) {
    const json& a = j["alpha"];
    reject_unknown(a, "metric.alpha", {"kind", "radius"});
    std::string kind = str(a.at("kind"), "metric.alpha.kind");
    if (kind == "euclidean") {
      spec.alpha.kind = RiemannianField::Kind::Euclidean;
    } else if (kind == "stereographic-sphere") {
      spec.alpha.kind = RiemannianField::Kind::StereographicSphere;
      if (a.contains("radius"))
        spec.alpha.radius = num(a["radius"], "metric.alpha.radius");
    } else {
      fail("metric.alpha.kind", "unsupported kind '" + kind + "'");
    }
  }
  if (j.contains("beta")) {
    const json& b = j["beta"];
    reject_unknown(b, "metric.beta", {"kind", "b", "eps"});
    std::string kind = str(b.at("kind"), "metric.beta.kind");
    if (kind == "zero") {
      spec.beta.kind = OneFormField::Kind::Zero;
    } else if (kind == "constant") {
      spec.beta.kind = OneFormField::Kind::Constant;
      spec.beta.b_const = numbers(b.at("b"), "metric.beta.b");
    } else if (kind == "linear") {
      spec.beta.kind = OneFormField::Kind::Linear;
      if (b.contains("eps")) spec.beta.eps = num(b["eps"], "metric.beta.eps");
    } else {
      fail("metric.beta.kind", "unsupported kind '" + kind + "'");
    }
  }
  if (j.contains("phi")) {
    const json& p = j["phi"];
    reject_unknown(p, "metric.phi", {"kind", "b0", "s_range", "coeffs"});
    std::string kind = str(p.at("kind"), "metric.phi.kind");
    if (kind == "riemannian")
      spec.phi.kind = PhiProfile::Kind::Riemannian;
    else if (kind == "randers")
      spec.phi.kind = PhiProfile::Kind::Randers;
    else if (kind == "kropina")
      spec.phi.kind = PhiProfile::Kind::Kropina;
    else if (kind == "matsumoto")
      spec.phi.kind = PhiProfile::Kind::Matsumoto;
    else if (kind == "polynomial") {
      spec.phi.kind = PhiProfile::Kind::Polynomial;
      spec.phi.coeffs = numbers(p.at("coeffs"), "metric.phi.coeffs");
    } else {
      fail("metric.phi.kind", "unsupported kind '" + kind + "'");
    }
    if (p.contains("b0")) spec.phi.b0 = num(p["b0"], "metric.phi.b0");
    if (p.contains("s_range")) {
      auto r = numbers(p["s_range"], "metric.phi.s_range");
      if (r.size() != 2) fail("metric.phi.s_range", "expected [lo, hi]");
      spec.phi.s_min = r[0];
      spec.phi.s_max = r[1];
    }
  }
  spec.name = "custom";
  return spec;
}

void parse_fd(const json& j, FDConfig& fd) {
  reject_unknown(j, "fd",
                 {"base_step", "richardson_levels", "step_order2",
                  "step_order3"});
  if (j.contains("base_step")) fd.base_step = num(j["base_step"], "fd.base_step");
  if (j.contains("richardson_levels"))
    fd.richardson_levels =
        static_cast<int>(num(j["richardson_levels"], "fd.richardson_levels"));
  if (j.contains("step_order2"))
    fd.step_order2 = num(j["step_order2"], "fd.step_order2");
  if (j.contains("step_order3"))
    fd.step_order3 = num(j["step_order3"], "fd.step_order3");
}

FlowMode parse_mode(const json& j, const std::string& where) {
  std::string m = str(j, where);
  if (m == "unnormalized") return FlowMode::Unnormalized;
  if (m == "normalized") return FlowMode::Normalized;
  fail(where, "expected 'unnormalized' or 'normalized'");
}

SMQuadratureSpec::Weight parse_weight(const json& j, const std::string& where) {
  std::string w = str(j, where);
  if (w == "uniform") return SMQuadratureSpec::Weight::Uniform;
  if (w == "det_g") return SMQuadratureSpec::Weight::DetG;
  fail(where, "expected 'uniform' or 'det_g'");
}

void parse_audit(const json& j, RunConfig& cfg) {
  reject_unknown(j, "audit",
                 {"cases", "mode", "flow_sign", "tau", "tau_field", "dt_probe",
                  "quad_directions", "quad_weight"});
  if (j.contains("cases")) {
    if (!j["cases"].is_array()) fail("audit.cases", "expected an array");
    const auto& known = audit_case_ids();
    for (const auto& c : j["cases"]) {
      std::string id = str(c, "audit.cases");
      if (std::find(known.begin(), known.end(), id) == known.end())
        fail("audit.cases", "unknown case '" + id + "'");
      cfg.audit_cases.push_back(id);
    }
  }
  if (j.contains("mode")) cfg.audit.mode = parse_mode(j["mode"], "audit.mode");
  if (j.contains("flow_sign"))
    cfg.audit.flow_sign = num(j["flow_sign"], "audit.flow_sign");
  if (j.contains("tau")) cfg.audit.tau = num(j["tau"], "audit.tau");
  if (j.contains("tau_field"))
    cfg.audit.tau_field = num(j["tau_field"], "audit.tau_field");
  if (j.contains("dt_probe"))
    cfg.audit.dt_probe = num(j["dt_probe"], "audit.dt_probe");
  if (j.contains("quad_directions"))
    cfg.audit.quad.directions_per_fiber =
        static_cast<int>(num(j["quad_directions"], "audit.quad_directions"));
  if (j.contains("quad_weight"))
    cfg.audit.quad.weight = parse_weight(j["quad_weight"], "audit.quad_weight");
}

void parse_flow(const json& j, RunConfig& cfg) {
  reject_unknown(j, "flow",
                 {"family", "mode", "integrator", "dt", "steps", "theta0",
                  "directions_per_fiber", "weight", "extinction_guard"});
  FlowRunSpec fr;
  fr.family = j.contains("family") ? str(j["family"], "flow.family")
                                   : std::string("conformal");
  if (fr.family != "conformal" && fr.family != "conformal-log" &&
      fr.family != "randers-scale")
    fail("flow.family", "unsupported family '" + fr.family + "'");
  if (j.contains("mode"))
    fr.config.mode = parse_mode(j["mode"], "flow.mode");
  if (j.contains("integrator")) {
    std::string integ = str(j["integrator"], "flow.integrator");
    if (integ == "euler")
      fr.config.integrator = Integrator::Euler;
    else if (integ == "rk4")
      fr.config.integrator = Integrator::RK4;
    else
      fail("flow.integrator", "expected 'euler' or 'rk4'");
  }
  if (j.contains("dt")) fr.config.dt = num(j["dt"], "flow.dt");
  if (j.contains("steps"))
    fr.config.steps = static_cast<int>(num(j["steps"], "flow.steps"));
  if (j.contains("theta0")) fr.theta0 = numbers(j["theta0"], "flow.theta0");
  if (j.contains("directions_per_fiber"))
    fr.config.quad.directions_per_fiber = static_cast<int>(
        num(j["directions_per_fiber"], "flow.directions_per_fiber"));
  if (j.contains("weight"))
    fr.config.quad.weight = parse_weight(j["weight"], "flow.weight");
  if (j.contains("extinction_guard"))
    fr.config.extinction_guard =
        num(j["extinction_guard"], "flow.extinction_guard");
  cfg.flow = std::move(fr);
}

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError("config parse failure in " + origin + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a table");
  reject_unknown(j, "<root>",
                 {"metric", "samples", "fd", "audit", "curvature", "flow"});
  RunConfig cfg;
  if (!j.contains("metric")) throw ConfigError("config: missing 'metric'");
  cfg.spec = parse_metric(j["metric"]);
  try {
    cfg.spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config error at 'metric': ") + e.what());
  }
  if (j.contains("samples")) {
    const json& s = j["samples"];
    reject_unknown(s, "samples", {"ydirs_per_point", "seed"});
    if (s.contains("ydirs_per_point"))
      cfg.ydirs_per_point = static_cast<int>(
          num(s["ydirs_per_point"], "samples.ydirs_per_point"));
    if (s.contains("seed"))
      cfg.seed = static_cast<uint64_t>(num(s["seed"], "samples.seed"));
  }
  if (j.contains("fd")) parse_fd(j["fd"], cfg.fd);
  cfg.audit.fd = cfg.fd;
  if (j.contains("audit")) parse_audit(j["audit"], cfg);
  if (j.contains("curvature")) {
    const json& c = j["curvature"];
    reject_unknown(c, "curvature", {"einstein_tol"});
    if (c.contains("einstein_tol"))
      cfg.einstein_tol = num(c["einstein_tol"], "curvature.einstein_tol");
  }
  if (j.contains("flow")) parse_flow(j["flow"], cfg);
  cfg.audit.quad.seed = cfg.seed;
  if (cfg.flow) cfg.flow->config.quad.seed = cfg.seed;
  cfg.echo = j.dump(2);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text, path);
}

}  // namespace finsler
