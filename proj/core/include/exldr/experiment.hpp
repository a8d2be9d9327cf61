#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "exldr/data.hpp"
#include "exldr/pipeline.hpp"

namespace exldr {

enum class ExperimentKind { kAlphaSweep, kScaleSweep, kDimSweep, kAblation, kRealMixture, kSingleRun };

enum class Method { kOls, kRidge, kHuber, kRansac, kExpander1, kExpanderL, kOracleOls };

std::string_view to_string(ExperimentKind kind);
std::string_view to_string(Method method);
ExperimentKind parse_experiment_kind(std::string_view text);
Method parse_method(std::string_view text);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kSingleRun;
  /// Swept field: alpha, outlier_scale, d, or a pipeline field for ablations.
  std::string grid_param = "alpha";
  std::vector<double> grid{0.3};
  std::vector<std::uint64_t> replications{0, 1, 2, 3, 4};
  std::vector<Method> methods{Method::kOls,    Method::kRidge,     Method::kHuber,
                              Method::kRansac, Method::kExpander1, Method::kExpanderL};
  SynthConfig synth{};
  PipelineConfig pipeline{};
  std::size_t n_test = 2000;
  double ridge_lambda = 1.0;
  double huber_delta = 0.0;      // 0 = data-driven default
  std::size_t ransac_trials = 100;
  std::uint64_t master_seed = 0;
  bool record_timing = false;    // wall_ms is 0 unless set, keeping files reproducible
  std::size_t workers = 1;

  std::filesystem::path inlier_path;
  std::filesystem::path outlier_path;
  TableSchema inlier_schema{};
  TableSchema outlier_schema{};
  std::size_t pca_dim = 10;

  std::filesystem::path output;

  void validate() const;
};

/// Sets one `key = value` entry; unknown keys raise kFormat.
void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value);

/// Canonical keys accepted by apply_setting.
const std::vector<std::string>& setting_keys();

/// Flat `key = value` text with `#` comments.
ExperimentSpec parse_spec(std::istream& in, ExperimentSpec base = {});
ExperimentSpec load_spec_file(const std::filesystem::path& path, ExperimentSpec base = {});

/// Presets for the CLI subcommands (grids and method lists).
ExperimentSpec preset(ExperimentKind kind);

struct ResultRow {
  std::string experiment;
  std::string grid_param;
  double grid_value = 0.0;
  std::uint64_t seed = 0;
  std::string method;
  double test_mse = 0.0;
  double param_error = 0.0;
  double wall_ms = 0.0;
  std::string status = "ok";

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct AggregateRow {
  std::string experiment;
  std::string grid_param;
  double grid_value = 0.0;
  std::string method;
  double mean_test_mse = 0.0;
  double std_test_mse = 0.0;
  double mean_param_error = 0.0;
  double std_param_error = 0.0;
  std::size_t ok_count = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<AggregateRow> aggregates;

  bool all_ok() const;
  /// Aggregate for (grid_value, method); throws kParameter when missing.
  const AggregateRow& aggregate(double grid_value, std::string_view method) const;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);
/// Sweeps exactly one pipeline field; other fields keep their values.
ExperimentResult run_ablation(const ExperimentSpec& spec);

std::vector<AggregateRow> aggregate_rows(const std::vector<ResultRow>& rows);

inline constexpr std::string_view kResultHeader =
    "experiment,grid_param,grid_value,seed,method,test_mse,param_error,wall_ms,status";
inline constexpr std::string_view kAggregateHeader =
    "experiment,grid_param,grid_value,method,mean_test_mse,std_test_mse,mean_param_error,"
    "std_param_error,ok_count";

std::string format_rows_csv(const std::vector<ResultRow>& rows);
std::string format_aggregates_csv(const std::vector<AggregateRow>& rows);
std::vector<ResultRow> parse_rows_csv(std::string_view text);

/// `<stem>_agg.csv` next to the row file.
std::filesystem::path aggregate_path(const std::filesystem::path& rows_path);
void write_results(const std::filesystem::path& rows_path, const ExperimentResult& result);

}  // namespace exldr
