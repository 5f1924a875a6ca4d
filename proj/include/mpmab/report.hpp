#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpmab/harness.hpp"

namespace mpmab {

enum class ResultFormat { kCsv, kJson, kSvg };

ResultFormat parse_result_format(std::string_view name);

/// Exact CSV header of result files.
inline constexpr std::string_view kCsvHeader = "algorithm,eps,num_subpar,replication,t,cum_regret";

/// One curve of a plot: mean cumulative regret with a standard-error band.
struct CurveSeries {
  std::string label;
  std::vector<double> rounds;
  std::vector<double> mean;
  std::vector<double> stderr_band;
};

std::string results_csv(std::span<const Aggregate> aggregates);
std::string results_json(std::span<const Aggregate> aggregates);
std::string regret_svg(std::span<const CurveSeries> series, std::string_view title = {});

std::vector<CurveSeries> curves_from(std::span<const Aggregate> aggregates);

/// Rebuilds per-replication aggregates from a results CSV (rows grouped by
/// algorithm, eps and num_subpar).
std::vector<Aggregate> aggregates_from_csv(std::string_view text);

/// Writes the aggregates in the requested format.
void emit_results(std::span<const Aggregate> aggregates, ResultFormat format, const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace mpmab
