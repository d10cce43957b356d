#include "finsler/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "finsler/curvature.hpp"

namespace finsler {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json report_header(const RunConfig& cfg) {
  nlohmann::json h;
  h["tool_version"] = kToolVersion;
  h["curvature_convention"] = kCurvatureConvention;
  h["tolerance_ladder"] = {{"order<=2 FD", "1e-4"},
                           {"order-3 FD", "1e-3"},
                           {"double probe", "5e-3"}};
  h["config"] = nlohmann::json::parse(cfg.echo);
  return h;
}

std::string render_json(const nlohmann::json& body) {
  return body.dump(2) + "\n";
}

void write_reports(const std::vector<ReportFile>& files,
                   const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& f : files) {
    std::ofstream out(std::filesystem::path(out_dir) / f.name,
                      std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report: " + f.name);
    out << f.content;
  }
}

}  // namespace finsler
