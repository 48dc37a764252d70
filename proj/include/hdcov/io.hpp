#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hdcov/calibration.hpp"
#include "hdcov/contiguity.hpp"
#include "hdcov/model.hpp"
#include "hdcov/power.hpp"

namespace hdcov {

using Json = nlohmann::ordered_json;

inline constexpr const char* kCalibrationSchema = "hdcov.calibration/1";
inline constexpr const char* kPowerSchema = "hdcov.power/1";
inline constexpr const char* kDecisionSchema = "hdcov.decision/1";
inline constexpr const char* kVerifySchema = "hdcov.verify/1";
inline constexpr const char* kSweepSchema = "hdcov.sweep/1";
inline constexpr const char* kSimulateSchema = "hdcov.simulate/1";

/// Comma-separated numbers, one row per line. Blank lines are skipped.
Matrix parse_csv_matrix(const std::string& text, bool header = false);
Matrix read_csv_matrix(const std::filesystem::path& path, bool header = false);
std::string format_csv_matrix(const Matrix& m);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Relative "path" entries are resolved against base_dir.
CovarianceSpec covariance_spec_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json covariance_spec_to_json(const CovarianceSpec& spec);

/// A .json file holding a spec, or a .csv file holding a dense matrix.
CovarianceSpec load_covariance_spec(const std::filesystem::path& path);

Json calibration_to_json(const NullCalibration& calib);
NullCalibration calibration_from_json(const Json& j);
NullCalibration read_calibration(const std::filesystem::path& path);

Json power_to_json(const PowerPrediction& prediction);
Json contiguity_to_json(const ContiguityReport& report, double t);

/// Formats a double with round-trip precision.
std::string format_double(double value);

}  // namespace hdcov
