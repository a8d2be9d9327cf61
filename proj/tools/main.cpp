#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "exldr/data.hpp"
#include "exldr/error.hpp"
#include "exldr/experiment.hpp"
#include "exldr/expander.hpp"
#include "exldr/pipeline.hpp"
#include "exldr/serialize.hpp"

namespace {

using namespace exldr;

// Flags shared by the experiment subcommands. Later sources win:
// preset, then --spec file, then --set entries, then explicit flags.
struct ExperimentFlags {
  std::string spec_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> workers;
  std::string grid;
  std::string methods;
  std::string param;
  std::string inliers;
  std::string outliers;
  std::string out;
  bool timing = false;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f, bool ablation, bool real) {
  cmd->add_option("--spec", f.spec_path, "key = value experiment file");
  cmd->add_option("--set", f.sets, "override one setting, key=value (repeatable)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--replicates", f.replicates, "replications 0..k-1");
  cmd->add_option("--workers", f.workers, "parallel experiment cells");
  cmd->add_option("--grid", f.grid, "comma-separated grid values");
  cmd->add_option("--methods", f.methods, "comma-separated methods");
  cmd->add_option("--out", f.out, "row CSV path; aggregates go to <stem>_agg.csv");
  cmd->add_flag("--timing", f.timing, "record wall-clock milliseconds");
  if (ablation) cmd->add_option("--param", f.param, "pipeline field to sweep");
  if (real) {
    cmd->add_option("--inliers", f.inliers, "inlier table (CSV)");
    cmd->add_option("--outliers", f.outliers, "outlier table (CSV)");
  }
}

ExperimentSpec build_spec(ExperimentKind kind, const ExperimentFlags& f) {
  ExperimentSpec spec = preset(kind);
  if (!f.spec_path.empty()) spec = load_spec_file(f.spec_path, spec);
  for (const auto& entry : f.sets) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kFormat, "--set expects key=value: " + entry);
    apply_setting(spec, entry.substr(0, eq), entry.substr(eq + 1));
  }
  spec.kind = kind;
  if (f.seed) spec.master_seed = *f.seed;
  if (f.replicates) apply_setting(spec, "replicates", std::to_string(*f.replicates));
  if (f.workers) spec.workers = *f.workers;
  if (!f.grid.empty()) apply_setting(spec, "grid", f.grid);
  if (!f.methods.empty()) apply_setting(spec, "methods", f.methods);
  if (!f.param.empty()) apply_setting(spec, "grid_param", f.param);
  if (!f.inliers.empty()) spec.inlier_path = f.inliers;
  if (!f.outliers.empty()) spec.outlier_path = f.outliers;
  if (!f.out.empty()) spec.output = f.out;
  if (f.timing) spec.record_timing = true;
  return spec;
}

int run_experiment_command(ExperimentKind kind, const ExperimentFlags& f) {
  const ExperimentSpec spec = build_spec(kind, f);
  const ExperimentResult result = run_experiment(spec);
  if (spec.output.empty()) {
    std::cout << format_rows_csv(result.rows);
  } else {
    write_results(spec.output, result);
    std::cerr << format_aggregates_csv(result.aggregates);
  }
  return result.all_ok() ? 0 : 1;
}

// Files written by `synth` carry an `inlier` label column that must not
// become a feature.
TableSchema schema_for(const std::string& path, const std::string& response) {
  TableSchema schema;
  schema.response_column = response;
  std::ifstream in(path);
  std::string header;
  if (!in || !std::getline(in, header)) return schema;
  std::vector<std::string> names;
  std::stringstream fields(header);
  for (std::string name; std::getline(fields, name, ',');) names.push_back(name);
  if (std::find(names.begin(), names.end(), "inlier") == names.end()) return schema;
  if (schema.response_column.empty()) schema.response_column = "y";
  for (const auto& name : names) {
    if (name != "inlier" && name != schema.response_column) schema.feature_columns.push_back(name);
  }
  return schema;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust linear regression with expander sketches and candidate lists"};
  app.require_subcommand(1);

  SynthConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "write a contaminated synthetic dataset");
  synth_cmd->add_option("--n", synth.n, "rows")->capture_default_str();
  synth_cmd->add_option("--d", synth.d, "dimension")->capture_default_str();
  synth_cmd->add_option("--alpha", synth.alpha, "inlier fraction")->capture_default_str();
  synth_cmd->add_option("--sigma", synth.noise_sigma, "inlier noise")->capture_default_str();
  synth_cmd->add_option("--scale", synth.outlier_scale, "outlier scale")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "output CSV")->required();

  PipelineConfig pipeline;
  std::string fit_input, fit_eval, fit_out, response;
  std::vector<std::string> fit_sets;
  auto* fit_cmd = app.add_subcommand("fit", "run the estimator on a CSV table");
  fit_cmd->add_option("--input", fit_input, "training CSV")->required();
  fit_cmd->add_option("--response", response, "response column (name or index; default last)");
  fit_cmd->add_option("--eval", fit_eval, "held-out CSV used to pick one candidate");
  fit_cmd->add_option("--seed", pipeline.master_seed, "master seed");
  fit_cmd->add_option("--buckets", pipeline.n_buckets, "buckets per repetition")->capture_default_str();
  fit_cmd->add_option("--repetitions", pipeline.repetitions, "independent expanders")->capture_default_str();
  fit_cmd->add_option("--degree", pipeline.degree, "left degree")->capture_default_str();
  fit_cmd->add_option("--rounds", pipeline.filter_rounds, "filter rounds")->capture_default_str();
  fit_cmd->add_option("--list-seeds", pipeline.seeds, "list size")->capture_default_str();
  fit_cmd->add_option("--block-size", pipeline.block_size, "median-of-means block size")->capture_default_str();
  fit_cmd->add_option("--lambda", pipeline.lambda, "ridge regularizer")->capture_default_str();
  fit_cmd->add_option("--eta", pipeline.eta, "stopping slack")->capture_default_str();
  fit_cmd->add_option("--rho", pipeline.rho, "prune fraction")->capture_default_str();
  fit_cmd->add_option("--delta", pipeline.delta_radius, "clustering radius")->capture_default_str();
  fit_cmd->add_option("--threads", pipeline.threads, "worker threads")->capture_default_str();
  fit_cmd->add_option("--out", fit_out, "candidate list JSON (default stdout)");

  ExperimentFlags alpha_flags, scale_flags, dim_flags, ablate_flags, real_flags;
  auto* alpha_cmd = app.add_subcommand("sweep-alpha", "vary the inlier fraction");
  add_experiment_flags(alpha_cmd, alpha_flags, false, false);
  auto* scale_cmd = app.add_subcommand("sweep-scale", "vary the outlier scale");
  add_experiment_flags(scale_cmd, scale_flags, false, false);
  auto* dim_cmd = app.add_subcommand("sweep-dim", "vary the dimension");
  add_experiment_flags(dim_cmd, dim_flags, false, false);
  auto* ablate_cmd = app.add_subcommand("ablate", "vary one estimator hyperparameter");
  add_experiment_flags(ablate_cmd, ablate_flags, true, false);
  auto* real_cmd = app.add_subcommand("real-mix", "mix two regression tables");
  add_experiment_flags(real_cmd, real_flags, false, true);

  std::size_t audit_n = 5000, audit_buckets = 1000, audit_degree = 2, audit_k = 50,
              audit_trials = 200;
  std::uint64_t audit_seed = 0;
  auto* audit_cmd = app.add_subcommand("audit-expander", "estimate expansion loss empirically");
  audit_cmd->add_option("--n", audit_n, "left vertices")->capture_default_str();
  audit_cmd->add_option("--buckets", audit_buckets, "right vertices")->capture_default_str();
  audit_cmd->add_option("--degree", audit_degree, "left degree")->capture_default_str();
  audit_cmd->add_option("--max-set", audit_k, "largest subset size")->capture_default_str();
  audit_cmd->add_option("--trials", audit_trials, "sampled subsets")->capture_default_str();
  audit_cmd->add_option("--seed", audit_seed, "seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      write_dataset_csv(synth_out, gen_synthetic(synth));
      return 0;
    }
    if (*fit_cmd) {
      const Table train = load_table(fit_input, schema_for(fit_input, response));
      const CandidateList list = run_list(train.features, train.response, pipeline);
      std::string text = candidate_list_to_json(list, pipeline);
      if (!fit_eval.empty()) {
        const Table eval = load_table(fit_eval, schema_for(fit_eval, response));
        const Vector w = select_best(list, eval.features, eval.response);
        auto doc = nlohmann::json::parse(text);
        doc["selected"] = std::vector<double>(w.data(), w.data() + w.size());
        text = doc.dump(2);
      }
      if (fit_out.empty()) {
        std::cout << text << '\n';
      } else {
        std::ofstream out(fit_out);
        if (!out) fail(ErrorCode::kIo, "cannot write " + fit_out);
        out << text << '\n';
      }
      return 0;
    }
    if (*alpha_cmd) return run_experiment_command(ExperimentKind::kAlphaSweep, alpha_flags);
    if (*scale_cmd) return run_experiment_command(ExperimentKind::kScaleSweep, scale_flags);
    if (*dim_cmd) return run_experiment_command(ExperimentKind::kDimSweep, dim_flags);
    if (*ablate_cmd) return run_experiment_command(ExperimentKind::kAblation, ablate_flags);
    if (*real_cmd) return run_experiment_command(ExperimentKind::kRealMixture, real_flags);
    if (*audit_cmd) {
      const auto graph =
          sample_expander(audit_n, audit_buckets, audit_degree, RngLabel{audit_seed, 0, 0});
      const auto audit = audit_expansion(graph, audit_k, audit_trials, RngLabel{audit_seed, 0, 0});
      nlohmann::json doc{{"n_left", audit_n},
                         {"n_buckets", audit_buckets},
                         {"degree", audit_degree},
                         {"max_set_size", audit_k},
                         {"trials", audit.trials},
                         {"epsilon_hat", audit.epsilon_hat},
                         {"worst_subset_size", audit.worst_subset_size}};
      std::cout << doc.dump(2) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "exldr: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "exldr: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
