#include "exldr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "exldr/baselines.hpp"
#include "exldr/error.hpp"
#include "exldr/rng.hpp"

namespace exldr {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view text, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(delimiter, start);
    out.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::kFormat, "expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t to_uint(std::string_view text) {
  text = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::kFormat, "expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

bool to_bool(std::string_view text) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  fail(ErrorCode::kFormat, "expected a boolean, got '" + std::string(text) + "'");
}

std::vector<double> to_doubles(std::string_view text) {
  std::vector<double> out;
  for (auto item : split(text, ',')) {
    if (!item.empty()) out.push_back(to_double(item));
  }
  return out;
}

std::string fmt_num(double value) {
  if (std::isnan(value)) return "nan";
  return fmt::format("{:.10g}", value);
}

// Key aliases, resolved before dispatch.
std::string canonical_key(std::string_view key) {
  std::string k(trim(key));
  std::replace(k.begin(), k.end(), '-', '_');
  static const std::map<std::string, std::string, std::less<>> aliases{
      {"sigma", "noise_sigma"},     {"S", "outlier_scale"},  {"scale", "outlier_scale"},
      {"seed", "master_seed"},      {"B", "n_buckets"},      {"buckets", "n_buckets"},
      {"d_L", "degree"},            {"dL", "degree"},        {"r", "repetitions"},
      {"T", "filter_rounds"},       {"R", "list_seeds"},     {"theta", "eta"},
      {"delta", "delta_radius"},    {"out", "output"},       {"M", "block_size"},
      {"param", "grid_param"},      {"kind", "experiment"},  {"lambda_ridge", "ridge_lambda"},
  };
  if (const auto it = aliases.find(k); it != aliases.end()) return it->second;
  return k;
}

void apply_pipeline_field(PipelineConfig& cfg, const std::string& key, double value) {
  const auto as_count = [&] {
    require(value >= 0.0 && std::floor(value) == value, key + " must be a non-negative integer");
    return static_cast<std::size_t>(value);
  };
  if (key == "n_buckets") cfg.n_buckets = as_count();
  else if (key == "degree") cfg.degree = as_count();
  else if (key == "repetitions") cfg.repetitions = as_count();
  else if (key == "filter_rounds") cfg.filter_rounds = as_count();
  else if (key == "list_seeds") cfg.seeds = as_count();
  else if (key == "block_size") cfg.block_size = as_count();
  else if (key == "lambda") cfg.lambda = value;
  else if (key == "eta") cfg.eta = value;
  else if (key == "rho") cfg.rho = value;
  else if (key == "delta_radius") cfg.delta_radius = value;
  else fail(ErrorCode::kParameter, "'" + key + "' is not an ablatable pipeline field");
}

bool is_pipeline_field(const std::string& key) {
  static const std::vector<std::string> fields{"n_buckets",  "degree", "repetitions",
                                               "filter_rounds", "list_seeds", "block_size",
                                               "lambda", "eta", "rho", "delta_radius"};
  return std::find(fields.begin(), fields.end(), key) != fields.end();
}

struct Cell {
  std::size_t grid_index = 0;
  double value = 0.0;
  std::uint64_t replication = 0;
};

struct LoadedTables {
  Table inliers;
  Table outliers;
};

struct Prepared {
  Dataset train;
  Dataset test;
  Matrix oracle_X;
  Vector oracle_y;
  bool synthetic = true;
};

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

std::vector<ResultRow> run_cell(const ExperimentSpec& spec, const Cell& cell,
                                const std::optional<LoadedTables>& tables) {
  const std::string experiment(to_string(spec.kind));
  const bool is_sweep = spec.kind != ExperimentKind::kSingleRun;
  const std::string grid_param = is_sweep ? spec.grid_param : std::string("none");

  SynthConfig synth = spec.synth;
  PipelineConfig pipeline = spec.pipeline;
  std::size_t n_test = spec.n_test;
  if (is_sweep) {
    if (spec.grid_param == "alpha") synth.alpha = cell.value;
    else if (spec.grid_param == "outlier_scale") synth.outlier_scale = cell.value;
    else if (spec.grid_param == "d") synth.d = static_cast<std::size_t>(cell.value);
    else if (spec.grid_param == "n") synth.n = static_cast<std::size_t>(cell.value);
    else apply_pipeline_field(pipeline, spec.grid_param, cell.value);
  }
  pipeline.alpha = synth.alpha;
  if (spec.workers > 1) pipeline.threads = 1;

  const RngLabel cell_label{spec.master_seed, cell.replication, 0};
  const std::uint64_t data_seed = hash_label(cell_label, Stream::kExperiment, 0);
  pipeline.master_seed = hash_label(cell_label, Stream::kExperiment, 1);
  const std::uint64_t ransac_seed = hash_label(cell_label, Stream::kExperiment, 2);

  std::vector<ResultRow> rows;
  auto emit = [&](Method m, double mse, double perr, double ms, std::string status) {
    rows.push_back({experiment, grid_param, is_sweep ? cell.value : 0.0, cell.replication,
                    std::string(to_string(m)), mse, perr, spec.record_timing ? ms : 0.0,
                    std::move(status)});
  };
  auto error_status = [](const Error& e) { return "error:" + std::string(to_string(e.code())); };

  Prepared prep;
  try {
    if (spec.kind == ExperimentKind::kRealMixture) {
      MixtureConfig mc{synth.n, synth.alpha, spec.pca_dim, n_test, data_seed};
      RealMixture mix = build_real_mixture(tables->inliers, tables->outliers, mc);
      prep.train = std::move(mix.train);
      prep.test = std::move(mix.test);
      prep.oracle_X = std::move(mix.oracle_X);
      prep.oracle_y = std::move(mix.oracle_y);
      prep.synthetic = false;
    } else {
      synth.seed = data_seed;
      prep.train = gen_synthetic(synth);
      prep.test = gen_clean_test(*prep.train.w_star, n_test, synth.noise_sigma, data_seed);
    }
  } catch (const Error& e) {
    for (Method m : spec.methods) emit(m, kNaN, kNaN, 0.0, error_status(e));
    return rows;
  }

  auto score = [&](const Vector& w) -> std::pair<double, double> {
    if (prep.synthetic) {
      const Metrics m = evaluate(w, prep.test);
      return {m.test_mse, m.param_error};
    }
    return {observed_mse(w, prep.test.X, prep.test.y), kNaN};
  };

  std::optional<CandidateList> list;
  std::optional<Error> list_error;
  double list_ms = 0.0;
  auto ensure_list = [&] {
    if (list || list_error) return;
    const auto start = std::chrono::steady_clock::now();
    try {
      list = run_list(prep.train.X, prep.train.y, pipeline);
    } catch (const Error& e) {
      list_error = e;
    }
    list_ms = elapsed_ms(start);
  };

  const Matrix& X = prep.train.X;
  const Vector& y = prep.train.y;
  for (Method method : spec.methods) {
    const auto start = std::chrono::steady_clock::now();
    try {
      Vector w;
      double ms = 0.0;
      switch (method) {
        case Method::kOls: w = ols_fit(X, y).w_hat; break;
        case Method::kRidge: w = ridge_fit(X, y, spec.ridge_lambda).w_hat; break;
        case Method::kHuber: {
          HuberOptions opts;
          opts.delta = spec.huber_delta;
          w = huber_fit(X, y, opts).w_hat;
          break;
        }
        case Method::kRansac: {
          RansacOptions opts;
          opts.n_trials = spec.ransac_trials;
          opts.seed = ransac_seed;
          w = ransac_fit(X, y, opts).w_hat;
          break;
        }
        case Method::kOracleOls: {
          if (prep.synthetic) {
            std::vector<std::size_t> keep;
            for (std::size_t i = 0; i < prep.train.rows(); ++i) {
              if ((*prep.train.inlier_mask)[i]) keep.push_back(i);
            }
            Matrix Xi(static_cast<Eigen::Index>(keep.size()), X.cols());
            Vector yi(static_cast<Eigen::Index>(keep.size()));
            for (std::size_t k = 0; k < keep.size(); ++k) {
              Xi.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(keep[k]));
              yi(static_cast<Eigen::Index>(k)) = y(static_cast<Eigen::Index>(keep[k]));
            }
            w = ols_fit(Xi, yi).w_hat;
          } else {
            w = ols_fit(prep.oracle_X, prep.oracle_y).w_hat;
          }
          break;
        }
        case Method::kExpander1:
        case Method::kExpanderL: {
          ensure_list();
          if (list_error) throw *list_error;
          if (method == Method::kExpanderL) {
            w = select_best(*list, prep.test.X, prep.test.y);
            ms = list_ms;
          } else {
            const auto& first = list->candidates.front();
            if (first.seed_index != 1) fail(ErrorCode::kDegenerateState, "seed 1 failed");
            w = first.ell_hat;
            ms = list_ms / static_cast<double>(pipeline.seeds);
          }
          break;
        }
      }
      if (method != Method::kExpander1 && method != Method::kExpanderL) ms = elapsed_ms(start);
      const auto [mse, perr] = score(w);
      emit(method, mse, perr, ms, "ok");
    } catch (const Error& e) {
      emit(method, kNaN, kNaN, elapsed_ms(start), error_status(e));
    }
  }
  return rows;
}

ExperimentResult execute(const ExperimentSpec& spec) {
  spec.validate();
  std::optional<LoadedTables> tables;
  if (spec.kind == ExperimentKind::kRealMixture) {
    tables = LoadedTables{load_table(spec.inlier_path, spec.inlier_schema),
                          load_table(spec.outlier_path, spec.outlier_schema)};
  }

  std::vector<Cell> cells;
  const std::vector<double> grid =
      spec.kind == ExperimentKind::kSingleRun ? std::vector<double>{0.0} : spec.grid;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::uint64_t rep : spec.replications) cells.push_back({g, grid[g], rep});
  }

  std::vector<std::vector<ResultRow>> per_cell(cells.size());
  const std::size_t workers = std::min(spec.workers, cells.size());
  if (workers <= 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) per_cell[c] = run_cell(spec, cells[c], tables);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) {
          per_cell[c] = run_cell(spec, cells[c], tables);
        }
      });
    }
  }

  ExperimentResult result;
  for (auto& rows : per_cell) {
    for (auto& row : rows) result.rows.push_back(std::move(row));
  }
  result.aggregates = aggregate_rows(result.rows);
  return result;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kAlphaSweep: return "alpha_sweep";
    case ExperimentKind::kScaleSweep: return "scale_sweep";
    case ExperimentKind::kDimSweep: return "dim_sweep";
    case ExperimentKind::kAblation: return "ablation";
    case ExperimentKind::kRealMixture: return "real_mixture";
    case ExperimentKind::kSingleRun: return "single_run";
  }
  return "unknown";
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kOls: return "ols";
    case Method::kRidge: return "ridge";
    case Method::kHuber: return "huber";
    case Method::kRansac: return "ransac";
    case Method::kExpander1: return "expander1";
    case Method::kExpanderL: return "expanderL";
    case Method::kOracleOls: return "oracle_ols";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  for (auto kind : {ExperimentKind::kAlphaSweep, ExperimentKind::kScaleSweep,
                    ExperimentKind::kDimSweep, ExperimentKind::kAblation,
                    ExperimentKind::kRealMixture, ExperimentKind::kSingleRun}) {
    if (to_string(kind) == trim(text)) return kind;
  }
  fail(ErrorCode::kFormat, "unknown experiment kind '" + std::string(text) + "'");
}

Method parse_method(std::string_view text) {
  for (auto m : {Method::kOls, Method::kRidge, Method::kHuber, Method::kRansac,
                 Method::kExpander1, Method::kExpanderL, Method::kOracleOls}) {
    if (to_string(m) == trim(text)) return m;
  }
  fail(ErrorCode::kFormat, "unknown method '" + std::string(text) + "'");
}

void ExperimentSpec::validate() const {
  require(!methods.empty(), "at least one method is required");
  require(!replications.empty(), "at least one replication seed is required");
  if (kind != ExperimentKind::kSingleRun) require(!grid.empty(), "sweep grid is empty");
  require(workers >= 1, "worker count must be positive");
  require(n_test >= 1, "test set must be non-empty");
  if (kind == ExperimentKind::kAblation) {
    require(is_pipeline_field(grid_param), "ablation must sweep exactly one pipeline field");
  }
  if (kind == ExperimentKind::kRealMixture) {
    require(!inlier_path.empty() && !outlier_path.empty(),
            "real_mixture needs inlier_path and outlier_path");
  }
  if (kind != ExperimentKind::kSingleRun && kind != ExperimentKind::kAblation &&
      kind != ExperimentKind::kRealMixture) {
    require(grid_param == "alpha" || grid_param == "outlier_scale" || grid_param == "d" ||
                grid_param == "n",
            "sweeps vary alpha, outlier_scale, d or n");
  }
  pipeline.validate();
}

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys{
      "experiment",   "grid_param",     "grid",          "replicates",     "replications",
      "methods",      "n",              "d",             "alpha",          "noise_sigma",
      "outlier_scale", "n_test",        "ridge_lambda",  "huber_delta",    "ransac_trials",
      "master_seed",  "n_buckets",      "degree",        "repetitions",    "filter_rounds",
      "list_seeds",   "block_size",     "lambda",        "eta",            "rho",
      "delta_radius", "aggregation",    "threads",       "timing",         "workers",
      "output",       "inlier_path",    "outlier_path",  "inlier_response", "outlier_response",
      "pca_dim"};
  return keys;
}

void apply_setting(ExperimentSpec& spec, std::string_view raw_key, std::string_view raw_value) {
  const std::string key = canonical_key(raw_key);
  const std::string_view value = trim(raw_value);
  if (key == "experiment") spec.kind = parse_experiment_kind(value);
  else if (key == "grid_param") spec.grid_param = canonical_key(value);
  else if (key == "grid") spec.grid = to_doubles(value);
  else if (key == "replicates") {
    const std::uint64_t count = to_uint(value);
    require(count >= 1, "replicates must be positive");
    spec.replications.clear();
    for (std::uint64_t k = 0; k < count; ++k) spec.replications.push_back(k);
  } else if (key == "replications") {
    spec.replications.clear();
    for (auto item : split(value, ',')) {
      if (!item.empty()) spec.replications.push_back(to_uint(item));
    }
  } else if (key == "methods") {
    spec.methods.clear();
    for (auto item : split(value, ',')) {
      if (!item.empty()) spec.methods.push_back(parse_method(item));
    }
  } else if (key == "n") spec.synth.n = to_uint(value);
  else if (key == "d") spec.synth.d = to_uint(value);
  else if (key == "alpha") spec.synth.alpha = to_double(value);
  else if (key == "noise_sigma") spec.synth.noise_sigma = to_double(value);
  else if (key == "outlier_scale") spec.synth.outlier_scale = to_double(value);
  else if (key == "n_test") spec.n_test = to_uint(value);
  else if (key == "ridge_lambda") spec.ridge_lambda = to_double(value);
  else if (key == "huber_delta") spec.huber_delta = to_double(value);
  else if (key == "ransac_trials") spec.ransac_trials = to_uint(value);
  else if (key == "master_seed") spec.master_seed = to_uint(value);
  else if (key == "aggregation") {
    if (value == "mom") spec.pipeline.aggregation_mode = AggregationMode::kMedianOfMeans;
    else if (value == "geometric") spec.pipeline.aggregation_mode = AggregationMode::kGeometricMedian;
    else fail(ErrorCode::kFormat, "aggregation must be mom or geometric");
  } else if (key == "threads") spec.pipeline.threads = to_uint(value);
  else if (key == "timing") spec.record_timing = to_bool(value);
  else if (key == "workers") spec.workers = to_uint(value);
  else if (key == "output") spec.output = std::string(value);
  else if (key == "inlier_path") spec.inlier_path = std::string(value);
  else if (key == "outlier_path") spec.outlier_path = std::string(value);
  else if (key == "inlier_response") spec.inlier_schema.response_column = std::string(value);
  else if (key == "outlier_response") spec.outlier_schema.response_column = std::string(value);
  else if (key == "pca_dim") spec.pca_dim = to_uint(value);
  else if (is_pipeline_field(key)) apply_pipeline_field(spec.pipeline, key, to_double(value));
  else fail(ErrorCode::kFormat, "unknown setting '" + std::string(raw_key) + "'");
}

ExperimentSpec parse_spec(std::istream& in, ExperimentSpec base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::kFormat, fmt::format("line {}: expected key = value", line_no));
    }
    apply_setting(base, view.substr(0, eq), view.substr(eq + 1));
  }
  return base;
}

ExperimentSpec load_spec_file(const std::filesystem::path& path, ExperimentSpec base) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open spec file " + path.string());
  return parse_spec(in, std::move(base));
}

ExperimentSpec preset(ExperimentKind kind) {
  ExperimentSpec spec;
  spec.kind = kind;
  switch (kind) {
    case ExperimentKind::kAlphaSweep:
      spec.grid_param = "alpha";
      spec.grid = {0.4, 0.3, 0.2, 0.1};
      break;
    case ExperimentKind::kScaleSweep:
      spec.grid_param = "outlier_scale";
      spec.grid = {5, 10, 20, 30};
      break;
    case ExperimentKind::kDimSweep:
      spec.grid_param = "d";
      spec.grid = {20, 50};
      spec.methods = {Method::kExpanderL};
      break;
    case ExperimentKind::kAblation:
      spec.grid_param = "list_seeds";
      spec.grid = {1, 2, 5, 10};
      spec.methods = {Method::kExpanderL};
      break;
    case ExperimentKind::kRealMixture:
      spec.grid_param = "alpha";
      spec.grid = {0.3};
      spec.synth.n = 1400;
      spec.n_test = 1000;
      spec.pipeline.rho = 0.45;
      spec.methods = {Method::kOracleOls, Method::kOls,       Method::kRidge,     Method::kHuber,
                      Method::kRansac,    Method::kExpander1, Method::kExpanderL};
      break;
    case ExperimentKind::kSingleRun:
      spec.grid_param = "none";
      spec.replications = {0};
      break;
  }
  return spec;
}

bool ExperimentResult::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.status == "ok"; });
}

const AggregateRow& ExperimentResult::aggregate(double grid_value, std::string_view method) const {
  for (const auto& a : aggregates) {
    if (a.grid_value == grid_value && a.method == method) return a;
  }
  fail(ErrorCode::kParameter, fmt::format("no aggregate for ({}, {})", grid_value, method));
}

ExperimentResult run_experiment(const ExperimentSpec& spec) { return execute(spec); }

ExperimentResult run_ablation(const ExperimentSpec& spec) {
  ExperimentSpec copy = spec;
  copy.kind = ExperimentKind::kAblation;
  return execute(copy);
}

std::vector<AggregateRow> aggregate_rows(const std::vector<ResultRow>& rows) {
  std::vector<AggregateRow> out;
  std::vector<std::vector<const ResultRow*>> groups;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const AggregateRow& a) {
      return a.grid_value == row.grid_value && a.method == row.method;
    });
    if (it == out.end()) {
      out.push_back({row.experiment, row.grid_param, row.grid_value, row.method});
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(&row);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    double sum_mse = 0.0, sum_pe = 0.0;
    std::size_t ok = 0;
    for (const auto* r : groups[g]) {
      if (r->status != "ok") continue;
      sum_mse += r->test_mse;
      sum_pe += r->param_error;
      ++ok;
    }
    auto& a = out[g];
    a.ok_count = ok;
    if (ok == 0) {
      a.mean_test_mse = a.std_test_mse = a.mean_param_error = a.std_param_error = kNaN;
      continue;
    }
    a.mean_test_mse = sum_mse / static_cast<double>(ok);
    a.mean_param_error = sum_pe / static_cast<double>(ok);
    double var_mse = 0.0, var_pe = 0.0;
    for (const auto* r : groups[g]) {
      if (r->status != "ok") continue;
      var_mse += (r->test_mse - a.mean_test_mse) * (r->test_mse - a.mean_test_mse);
      var_pe += (r->param_error - a.mean_param_error) * (r->param_error - a.mean_param_error);
    }
    a.std_test_mse = std::sqrt(var_mse / static_cast<double>(ok));
    a.std_param_error = std::sqrt(var_pe / static_cast<double>(ok));
  }
  return out;
}

std::string format_rows_csv(const std::vector<ResultRow>& rows) {
  std::string out(kResultHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.experiment, r.grid_param,
                       fmt_num(r.grid_value), r.seed, r.method, fmt_num(r.test_mse),
                       fmt_num(r.param_error), fmt::format("{:.3f}", r.wall_ms), r.status);
  }
  return out;
}

std::string format_aggregates_csv(const std::vector<AggregateRow>& rows) {
  std::string out(kAggregateHeader);
  out += '\n';
  for (const auto& a : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", a.experiment, a.grid_param,
                       fmt_num(a.grid_value), a.method, fmt_num(a.mean_test_mse),
                       fmt_num(a.std_test_mse), fmt_num(a.mean_param_error),
                       fmt_num(a.std_param_error), a.ok_count);
  }
  return out;
}

std::vector<ResultRow> parse_rows_csv(std::string_view text) {
  std::vector<ResultRow> rows;
  bool header_seen = false;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kResultHeader) fail(ErrorCode::kFormat, "unexpected result header");
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 9) fail(ErrorCode::kFormat, "result row must have 9 fields");
    rows.push_back({std::string(f[0]), std::string(f[1]), to_double(f[2]), to_uint(f[3]),
                    std::string(f[4]), to_double(f[5]), to_double(f[6]), to_double(f[7]),
                    std::string(f[8])});
  }
  if (!header_seen) fail(ErrorCode::kFormat, "missing result header");
  return rows;
}

std::filesystem::path aggregate_path(const std::filesystem::path& rows_path) {
  std::filesystem::path p = rows_path;
  p.replace_filename(rows_path.stem().string() + "_agg.csv");
  return p;
}

void write_results(const std::filesystem::path& rows_path, const ExperimentResult& result) {
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
  };
  write(rows_path, format_rows_csv(result.rows));
  write(aggregate_path(rows_path), format_aggregates_csv(result.aggregates));
}

}  // namespace exldr
