#include "globalsdp/report.hpp"

#include <cmath>
#include <cstdio>

namespace globalsdp {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string vec_text(const Vec& x) {
  std::string s = "(";
  for (std::size_t j = 0; j < x.size(); ++j) s += (j ? ", " : "") + fmt("%.6g", x[j]);
  return s + ")";
}

}  // namespace

Json lower_rows(const SymMat& a) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < a.n(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j <= i; ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const KktResiduals& r) {
  return Json{{"stat_x", r.stat_x}, {"stat_y", r.stat_y}, {"comp_A", r.comp_A}, {"comp_B", r.comp_B},
              {"feas_A", r.feas_A}, {"feas_B", r.feas_B}, {"psd_Z", r.psd_Z},   {"psd_W", r.psd_W}};
}

Json to_json(const KktCertificate& c) {
  return Json{{"x", c.x},
              {"y", c.y},
              {"Z", lower_rows(c.Z)},
              {"W", lower_rows(c.W)},
              {"residuals", to_json(c.residuals)},
              {"tol", c.tol},
              {"accepted", c.accepted},
              {"reason", c.reason}};
}

Json to_json(const AssumptionReport& r) {
  return Json{{"a", to_string(r.a)},
              {"b", to_string(r.b)},
              {"c", to_string(r.c)},
              {"worst_concavity_A_x", r.worst_concavity_A_x},
              {"worst_concavity_B", r.worst_concavity_B},
              {"worst_convexity_A_y", r.worst_convexity_A_y},
              {"strict_concavity_A_x", r.strict_concavity_A_x},
              {"min_dA_dy_eig", r.min_dA_dy_eig},
              {"best_margin", r.best_margin},
              {"samples", r.samples},
              {"feasible_samples", r.feasible_samples},
              {"notes", r.notes}};
}

Json to_json(const DerivativeCheck& d) {
  return Json{{"grad_A_error", d.grad_A_error},
              {"dA_dy_error", d.dA_dy_error},
              {"grad_B_error", d.grad_B_error},
              {"worst", d.worst()}};
}

Json to_json(const GridSpec& g) {
  return Json{{"lower", g.lower}, {"upper", g.upper}, {"step", g.step}};
}

Json to_json(const GridResult& r) {
  Json j{{"feasible", r.feasible}, {"points", r.points}, {"feasible_points", r.feasible_points}};
  if (r.feasible) {
    j["oracle_y"] = r.best_y;
    j["oracle_x"] = r.best_x;
  }
  return j;
}

Json to_json(const SolveReport& r, const ReportFlags& flags) {
  Json j{{"status", to_string(r.status)}, {"x_star", r.x_star}, {"y_star", r.y_star}};
  j["certificate"] = r.certificate ? to_json(*r.certificate) : Json(nullptr);
  j["message"] = r.message;
  j["warnings"] = r.warnings;
  if (r.assumptions) j["assumptions"] = to_json(*r.assumptions);
  j["probes"] = r.trace.size();
  if (flags.trace) {
    Json t = Json::array();
    for (const TraceEntry& e : r.trace) {
      t.push_back(Json{{"y", e.y}, {"margin", e.margin}, {"inner_iterations", e.inner_iterations},
                       {"feasible", e.feasible}});
    }
    j["trace"] = std::move(t);
  }
  if (flags.timing) j["wall_time"] = r.wall_time;
  return j;
}

Json to_json(const MultistartReport& r, const ReportFlags& flags) {
  Json runs = Json::array();
  for (const MultistartRun& run : r.runs) {
    Json j{{"index", run.index},
           {"x0", run.x0},
           {"status", to_string(run.report.status)},
           {"y_star", run.report.y_star},
           {"x_star", run.report.x_star},
           {"certificate_accepted", run.report.certificate && run.report.certificate->accepted},
           {"residual_max", run.report.certificate ? run.report.certificate->residuals.max() : 0.0},
           {"message", run.report.message}};
    if (flags.trace) j["report"] = to_json(run.report, flags);
    runs.push_back(std::move(j));
  }
  Json j{{"starts", r.runs.size()},
         {"accepted", r.accepted},
         {"y_spread", r.y_spread},
         {"x_spread", r.x_spread},
         {"uncertified_runs", r.uncertified_runs},
         {"warnings", r.warnings}};
  if (r.assumptions) j["assumptions"] = to_json(*r.assumptions);
  j["runs"] = std::move(runs);
  return j;
}

std::string summary(const SolveReport& r) {
  std::string s;
  s += "status     " + std::string(to_string(r.status)) + "\n";
  s += "y_star     " + fmt("%.10g", r.y_star) + "\n";
  s += "x_star     " + vec_text(r.x_star) + "\n";
  s += "probes     " + std::to_string(r.trace.size()) + "\n";
  if (r.certificate) s += "kkt        " + summary(*r.certificate) + "\n";
  if (!r.message.empty()) s += "message    " + r.message + "\n";
  for (const std::string& w : r.warnings) s += "warning    " + w + "\n";
  return s;
}

std::string summary(const MultistartReport& r) {
  std::string s;
  s += "run  status         y_star            kkt\n";
  for (const MultistartRun& run : r.runs) {
    char line[160];
    std::snprintf(line, sizeof line, "%3zu  %-13s  %-16.10g  %s\n", run.index, to_string(run.report.status),
                  run.report.y_star,
                  run.report.certificate && run.report.certificate->accepted ? "accepted" : "rejected");
    s += line;
  }
  s += "accepted   " + std::to_string(r.accepted) + "/" + std::to_string(r.runs.size()) + "\n";
  s += "y_spread   " + fmt("%.3e", r.y_spread) + "\n";
  s += "x_spread   " + fmt("%.3e", r.x_spread) + "\n";
  for (const std::string& w : r.warnings) s += "warning    " + w + "\n";
  return s;
}

std::string summary(const AssumptionReport& r) {
  std::string s;
  s += "(a) concavity/convexity   " + std::string(to_string(r.a)) + "\n";
  s += "(b) dA/dy > 0             " + std::string(to_string(r.b)) + fmt("  (min eig %.3g)", r.min_dA_dy_eig) + "\n";
  s += "(c) strict feasibility    " + std::string(to_string(r.c)) + fmt("  (best margin %.3g)", r.best_margin) + "\n";
  s += "samples                   " + std::to_string(r.feasible_samples) + "/" + std::to_string(r.samples) +
       " feasible\n";
  for (const std::string& n : r.notes) s += "note: " + n + "\n";
  return s;
}

std::string summary(const KktCertificate& c) {
  std::string s = c.accepted ? "accepted" : "rejected";
  s += fmt(" (max residual %.3e", c.residuals.max()) + fmt(", tol %.1e)", c.tol);
  if (!c.reason.empty()) s += ": " + c.reason;
  return s;
}

}  // namespace globalsdp
