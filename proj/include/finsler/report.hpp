#pragma once

#include <string>

#include "finsler/config.hpp"
#include "json.hpp"

namespace finsler {

inline constexpr const char* kToolVersion = "finslerlab 0.1.0";

/// %.17g, '.' decimal point, no separators.
std::string format_g17(double v);

/// Common header every report embeds: tool version, curvature convention,
/// tolerance ladder, and the config echo. No timestamps — bodies must be
/// byte-identical across reruns of the same config.
nlohmann::json report_header(const RunConfig& cfg);

/// One output file; runners accumulate these and a single writer flushes
/// them under --out.
struct ReportFile {
  std::string name;
  std::string content;
};

std::string render_json(const nlohmann::json& body);

void write_reports(const std::vector<ReportFile>& files,
                   const std::string& out_dir);

}  // namespace finsler
