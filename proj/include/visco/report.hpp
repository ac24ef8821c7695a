#pragma once

#include <filesystem>
#include <string>

namespace visco {

inline constexpr const char* kReportSchema = "visco-report/1";

/// Rebuilds <root>/report from the family artifacts: report.json plus energy,
/// constraints, integrability, defect, strong_conv and pairing CSV tables. The
/// bundle depends only on the artifacts, so regeneration is byte-identical.
/// Throws Error(MissingArtifacts) if family.cfg, manifest.json or a run is missing.
std::filesystem::path write_report(const std::filesystem::path& root);

/// Throws Error(IoError) if the text is not a report of the documented schema.
void validate_report_text(const std::string& json_text);
void validate_report_file(const std::filesystem::path& path);

}  // namespace visco
