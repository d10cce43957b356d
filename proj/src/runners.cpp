#include "finsler/runners.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

namespace finsler {

namespace {

using nlohmann::json;

std::string csv_row(const std::vector<double>& vals) {
  std::string out;
  for (size_t i = 0; i < vals.size(); ++i) {
    if (i) out += ',';
    out += format_g17(vals[i]);
  }
  out += '\n';
  return out;
}

json point_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(format_g17(x));
  return a;
}

}  // namespace

int worker_thread_cap() {
  if (const char* env = std::getenv("FINSLERLAB_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) return cap;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void parallel_for(size_t count, const std::function<void(size_t)>& fn) {
  size_t workers =
      std::min<size_t>(static_cast<size_t>(worker_thread_cap()), count);
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto work = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

RunOutput run_tensors(const RunConfig& cfg) {
  RunOutput out;
  auto samples = sample_lattice(cfg.spec, cfg.ydirs_per_point, cfg.seed);
  const int n = cfg.spec.dim();

  struct Row {
    const TangentSample* s;
    double F = 0.0, C_fro = 0.0, I_normsq = 0.0;
    double q = 0.0, p = 1.0, fit_residual = 0.0;
    bool fitted = false;
    double gate = 0.0;  // worst structural-invariant residual
  };
  std::vector<Row> rows(samples.size());
  parallel_for(samples.size(), [&](size_t i) {
    auto& r = rows[i];
    r.s = &samples[i];
    auto b = compute_bundle(cfg.spec, samples[i]);
    r.F = b.F;
    r.C_fro = b.C.frobenius();
    r.I_normsq = b.I_normsq;
    // structural gates: C.y = 0, I.y = 0, h I^ = I
    double scale = std::max(1.0, b.g.cwiseAbs().maxCoeff());
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += b.C(a, c, k) * samples[i].y[k];
        r.gate = std::max(r.gate, std::abs(acc) / scale);
      }
    double iy = 0.0;
    for (int k = 0; k < n; ++k) iy += b.I(k) * samples[i].y[k];
    r.gate = std::max(r.gate, std::abs(iy) / scale);
    r.gate = std::max(r.gate, (b.h * b.I_up - b.I).cwiseAbs().maxCoeff() / scale);
    if (n >= 3 && b.I_normsq > kEpsI) {
      auto fit = semi_c_fit_least_squares(b, n);
      r.q = fit.q;
      r.p = fit.p;
      r.fit_residual = fit.decomposition_residual;
      r.fitted = true;
    }
  });

  double worst_gate = 0.0;
  bool finite = true;
  for (const auto& r : rows) {
    worst_gate = std::max(worst_gate, r.gate);
    finite = finite && std::isfinite(r.F) && std::isfinite(r.C_fro) &&
             std::isfinite(r.gate);
  }

  json body = report_header(cfg);
  body["samples"] = json::array();
  std::string csv = "index,F,C_frobenius,I_normsq,q,p,fit_residual,gate\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    json rec;
    rec["x"] = point_json(r.s->x);
    rec["y"] = point_json(r.s->y);
    rec["F"] = format_g17(r.F);
    rec["C_frobenius"] = format_g17(r.C_fro);
    rec["I_normsq"] = format_g17(r.I_normsq);
    rec["structural_gate"] = format_g17(r.gate);
    if (r.fitted) {
      rec["q"] = format_g17(r.q);
      rec["p"] = format_g17(r.p);
      rec["fit_residual"] = format_g17(r.fit_residual);
    }
    body["samples"].push_back(rec);
    csv += csv_row({static_cast<double>(i), r.F, r.C_fro, r.I_normsq, r.q, r.p,
                    r.fit_residual, r.gate});
  }
  body["summary"] = {{"sample_count", rows.size()},
                     {"max_structural_gate", format_g17(worst_gate)}};
  out.files.push_back({"tensors.json", render_json(body)});
  out.files.push_back({"tensors.csv", csv});

  if (!finite) {
    out.exit_code = kExitNumerical;
    out.message = "tensors: non-finite values encountered";
  } else if (worst_gate > 1e-9) {
    out.exit_code = kExitInvariant;
    out.message =
        "tensors: structural invariant violated, worst residual " +
        format_g17(worst_gate);
  } else {
    out.message = "tensors: " + std::to_string(rows.size()) +
                  " samples, all structural gates passed";
  }
  return out;
}

RunOutput run_curvature(const RunConfig& cfg) {
  RunOutput out;
  auto samples = sample_lattice(cfg.spec, cfg.ydirs_per_point, cfg.seed);
  std::vector<SprayCurvature> sc(samples.size());
  parallel_for(samples.size(), [&](size_t i) {
    sc[i] = riemann_curvature(cfg.spec, samples[i]);
  });
  auto diag = einstein_diagnostic(cfg.spec, samples, cfg.einstein_tol);

  bool finite = true;
  json body = report_header(cfg);
  body["samples"] = json::array();
  std::string csv = "index,F2,Ric,Rnorm\n";
  for (size_t i = 0; i < samples.size(); ++i) {
    finite = finite && std::isfinite(sc[i].Ric) && std::isfinite(sc[i].Rnorm);
    json rec;
    rec["x"] = point_json(samples[i].x);
    rec["y"] = point_json(samples[i].y);
    rec["F2"] = format_g17(sc[i].F2);
    rec["Ric"] = format_g17(sc[i].Ric);
    rec["Rnorm"] = format_g17(sc[i].Rnorm);
    body["samples"].push_back(rec);
    csv += csv_row({static_cast<double>(i), sc[i].F2, sc[i].Ric, sc[i].Rnorm});
  }
  json dj;
  dj["einstein"] = diag.einstein;
  dj["max_rel_deviation"] = format_g17(diag.max_rel_deviation);
  dj["rows"] = json::array();
  for (const auto& row : diag.rows)
    dj["rows"].push_back({{"x", point_json(row.x)},
                          {"mean_R", format_g17(row.mean_R)},
                          {"deviation", format_g17(row.deviation)}});
  body["einstein_diagnostic"] = dj;
  out.files.push_back({"curvature.json", render_json(body)});
  out.files.push_back({"curvature.csv", csv});

  if (!finite) {
    out.exit_code = kExitNumerical;
    out.message = "curvature: non-finite values encountered";
  } else {
    out.message = std::string("curvature: einstein=") +
                  (diag.einstein ? "yes" : "no") + ", max deviation " +
                  format_g17(diag.max_rel_deviation);
  }
  return out;
}

RunOutput run_audit(const RunConfig& cfg) {
  RunOutput out;
  std::vector<std::string> ids =
      cfg.audit_cases.empty() ? audit_case_ids() : cfg.audit_cases;
  if (cfg.spec.dim() < 3) {
    bool semi_c = false;
    for (const auto& id : ids) semi_c = semi_c || audit_case_needs_semi_c(id);
    if (semi_c) {
      out.exit_code = kExitConfig;
      out.message = "audit: semi-C cases need dimension n >= 3";
      return out;
    }
  }
  auto samples = sample_lattice(cfg.spec, cfg.ydirs_per_point, cfg.seed);
  auto reports = audit_selected(ids, cfg.spec, samples, cfg.audit);

  std::string csv = "case,max_residual,median_residual,rung,pass,trivial\n";
  bool all_pass = true;
  for (const auto& rep : reports) {
    all_pass = all_pass && rep.pass;
    std::ostringstream line;
    line << rep.id << ',' << format_g17(rep.max_residual) << ','
         << format_g17(rep.median_residual) << ',' << rep.rung << ','
         << (rep.pass ? "1" : "0") << ','
         << (rep.trivially_satisfied ? "1" : "0") << '\n';
    csv += line.str();

    json body = report_header(cfg);
    body["case"] = rep.id;
    body["rung"] = rep.rung;
    body["tolerance"] = format_g17(rep.tolerance);
    body["max_residual"] = format_g17(rep.max_residual);
    body["median_residual"] = format_g17(rep.median_residual);
    body["lhs_norm"] = format_g17(rep.lhs_norm);
    body["rhs_norm"] = format_g17(rep.rhs_norm);
    body["pass"] = rep.pass;
    body["trivially_satisfied"] = rep.trivially_satisfied;
    body["notes"] = rep.notes;
    body["residuals"] = json::array();
    for (double r : rep.residuals) body["residuals"].push_back(format_g17(r));
    out.files.push_back({"audit_" + rep.id + ".json", render_json(body)});
  }
  out.files.push_back({"audit_summary.csv", csv});
  if (!all_pass) {
    out.exit_code = kExitInvariant;
    out.message = "audit: at least one case failed its rung";
  } else {
    out.message = "audit: " + std::to_string(reports.size()) +
                  " cases passed their rungs";
  }
  return out;
}

RunOutput run_flow(const RunConfig& cfg) {
  RunOutput out;
  if (!cfg.flow) {
    out.exit_code = kExitConfig;
    out.message = "flow: config has no [flow] table";
    return out;
  }
  const auto& fr = *cfg.flow;
  ParametricFamily fam = fr.family == "conformal"
                             ? ParametricFamily::conformal(cfg.spec)
                         : fr.family == "conformal-log"
                             ? ParametricFamily::conformal_log(cfg.spec)
                             : ParametricFamily::randers_scale(cfg.spec);
  FlowTrace trace;
  bool aborted = false;
  std::string abort_reason;
  try {
    trace = integrate_flow(fam, fr.theta0, fr.config);
  } catch (const BoundsExceeded& e) {
    aborted = true;
    abort_reason = e.what();
  }

  std::string csv = "t";
  for (size_t k = 0; k < fr.theta0.size(); ++k)
    csv += ",theta" + std::to_string(k);
  csv += ",projection_residual,mean_R,min_R,max_R\n";
  double max_drift = 0.0;
  for (const auto& row : trace.rows) {
    std::vector<double> vals = {row.t};
    for (size_t k = 0; k < row.theta.size(); ++k) {
      vals.push_back(row.theta[k]);
      max_drift = std::max(max_drift, std::abs(row.theta[k] - fr.theta0[k]));
    }
    vals.push_back(row.projection_residual);
    vals.push_back(row.mean_R);
    vals.push_back(row.min_R);
    vals.push_back(row.max_R);
    csv += csv_row(vals);
  }
  json body = report_header(cfg);
  body["family"] = fr.family;
  body["rows"] = trace.rows.size();
  body["extinct"] = trace.extinct;
  if (trace.extinct)
    body["extinction_estimate"] = format_g17(trace.extinction_estimate);
  body["fixed_point"] = !trace.rows.empty() && max_drift <= 1e-8;
  body["max_theta_drift"] = format_g17(max_drift);
  if (!trace.rows.empty())
    body["final_theta"] = point_json(trace.rows.back().theta);
  if (aborted) body["aborted"] = abort_reason;
  out.files.push_back({"flow_trace.csv", csv});
  out.files.push_back({"flow_summary.json", render_json(body)});

  if (aborted) {
    out.exit_code = kExitFlowAborted;
    out.message = "flow: aborted (" + abort_reason + ")";
  } else if (trace.extinct) {
    out.exit_code = kExitFlowAborted;
    out.message = "flow: extinction guard hit, t* estimate " +
                  format_g17(trace.extinction_estimate);
  } else {
    out.message = "flow: completed " +
                  std::to_string(trace.rows.empty() ? 0 : trace.rows.size() - 1) +
                  " steps";
  }
  return out;
}

}  // namespace finsler
