#pragma once

#include "kgens/runner.hpp"

#include <filesystem>
#include <string>

namespace kgens {

enum class ReportFormat { json, csv };

ReportFormat parse_report_format(const std::string& name);

/// Versioned JSON document: schema_version, provenance (seed, PRNG, format
/// versions, config echo, dataset summary), per-cell rows and per-method means.
/// Output is a pure function of the report, so equal runs give equal bytes.
std::string to_json(const EvaluationReport& report);
std::string to_json(const AblationReport& report);

EvaluationReport evaluation_from_json(const std::string& text);
AblationReport ablation_from_json(const std::string& text);

/// Evaluation: "method,fraction,accuracy,kappa" rows followed by one
/// "<method>,mean,..." row per method.
/// Ablation: "<param>,accuracy,kappa" rows, ascending by parameter value.
std::string to_csv(const EvaluationReport& report);
std::string to_csv(const AblationReport& report);

void emit(const EvaluationReport& report, ReportFormat format, const std::filesystem::path& path);
void emit(const AblationReport& report, ReportFormat format, const std::filesystem::path& path);

} // namespace kgens
