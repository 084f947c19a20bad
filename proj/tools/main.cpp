// Command-line front end: synthetic data generation, change-point
// detection, timeline evaluation, and wall-clock benchmarking.
//
// Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numeric failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpd/csvio.hpp"
#include "cpd/harness.hpp"
#include "cpd/synthetic.hpp"

namespace {

using nlohmann::json;

struct RunConfig {
  // shared
  std::string input, output, config_path;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string format = "json";
  bool omit_timings = false;

  // dataset schema
  std::string target_col = "y";
  std::string eta_col;
  std::string old_cols, new_cols;  // comma-separated column names
  double bound = 1.0;

  // detection
  std::vector<std::string> methods;
  std::string candidates = "full";
  std::string candidate_list;
  std::string learner = "ls";
  double lambda = 1.0;
  double l1_lambda = 1e-3;
  double gamma = 1.0;
  double delta = 0.05;
  int p1 = 0, p2 = 0;  // 0 = derive from feature counts
  int multi_k = 1;
  int max_k = 2;
  int mcsprt_burn_in = 200;
  double mcsprt_threshold = 30.0;
  int rs_trials = 100;
  int window = 0;
  int sweep_seeds = 1;

  // generate
  cpd::SyntheticSpec synth;
  std::string meta_path;

  // bench
  int reps = 3;
};

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

cpd::LearnerFamily parse_family(const std::string& name) {
  if (name == "ls") return cpd::LearnerFamily::LeastSquares;
  if (name == "ridge") return cpd::LearnerFamily::Ridge;
  if (name == "logistic") return cpd::LearnerFamily::Logistic;
  if (name == "l1") return cpd::LearnerFamily::L1Logistic;
  if (name == "kernel") return cpd::LearnerFamily::KernelRidge;
  throw cpd::ValidationError("unknown learner: " + name);
}

cpd::CandidateKind parse_candidates(const std::string& name) {
  if (name == "full") return cpd::CandidateKind::Full;
  if (name == "sqrt-grid") return cpd::CandidateKind::SqrtGrid;
  if (name == "list") return cpd::CandidateKind::Explicit;
  throw cpd::ValidationError("unknown candidate set: " + name);
}

cpd::TimeSeriesDataset load_dataset(const RunConfig& cfg) {
  cpd::DatasetSchema schema;
  schema.target_column = cfg.target_col;
  schema.eta_column = cfg.eta_col;
  schema.old_columns = split_csv_list(cfg.old_cols);
  schema.new_columns = split_csv_list(cfg.new_cols);
  schema.bound = cfg.bound;
  return cpd::read_dataset_csv(cfg.input, schema);
}

cpd::HarnessConfig build_harness_config(const RunConfig& cfg,
                                        const cpd::TimeSeriesDataset& data) {
  cpd::HarnessConfig h;
  const auto family = parse_family(cfg.learner);
  std::map<std::string, double> hyper{{"lambda", cfg.lambda},
                                      {"l1_lambda", cfg.l1_lambda},
                                      {"gamma", cfg.gamma}};
  const int d = data.old_features;
  const int n = data.dim();
  h.search.learner1 = {family, hyper, cfg.p1 > 0 ? cfg.p1 : d + 1,
                       cpd::FeatureView::OldOnly};
  h.search.learner2 = {family, hyper, cfg.p2 > 0 ? cfg.p2 : n + 1,
                       cpd::FeatureView::All};
  h.search.candidates = parse_candidates(cfg.candidates);
  for (const auto& s : split_csv_list(cfg.candidate_list))
    h.search.explicit_candidates.push_back(std::stoi(s));
  h.search.delta = cfg.delta;
  h.search.threads = cfg.threads;

  h.srm.max_k = cfg.max_k;
  h.srm.learner = h.search.learner2;
  h.srm.delta = cfg.delta;
  h.srm.candidates = h.search.candidates == cpd::CandidateKind::Explicit
                         ? cpd::CandidateKind::SqrtGrid
                         : h.search.candidates;
  h.srm.threads = cfg.threads;
  h.multi_k = cfg.multi_k;

  h.kernel_gamma1 = h.kernel_gamma2 = cfg.gamma;
  h.kernel_lambda1 = h.kernel_lambda2 = cfg.lambda;
  if (cfg.p1 > 0 && cfg.p2 > 0) {
    h.p1 = cfg.p1;
    h.p2 = cfg.p2;
  }
  h.delta = cfg.delta;
  h.smoothing_window = cfg.window;
  h.seed = cfg.seed;
  h.include_timing = !cfg.omit_timings;

  h.baseline.mcsprt.burn_in = cfg.mcsprt_burn_in;
  h.baseline.mcsprt.threshold = cfg.mcsprt_threshold;
  h.baseline.rs_trials = cfg.rs_trials;
  h.baseline.seed = cfg.seed;
  return h;
}

json config_echo(const RunConfig& cfg, const std::string& subcommand) {
  json j;
  j["subcommand"] = subcommand;
  j["seed"] = cfg.seed;
  // thread count deliberately not echoed: it never affects results, and
  // leaving it out keeps reports byte-identical across --threads values
  j["learner"] = cfg.learner;
  j["candidates"] = cfg.candidates;
  if (!cfg.candidate_list.empty()) j["candidate_list"] = cfg.candidate_list;
  j["lambda"] = cfg.lambda;
  j["l1_lambda"] = cfg.l1_lambda;
  j["gamma"] = cfg.gamma;
  j["delta"] = cfg.delta;
  j["target_col"] = cfg.target_col;
  if (!cfg.eta_col.empty()) j["eta_col"] = cfg.eta_col;
  if (!cfg.old_cols.empty()) j["old_cols"] = cfg.old_cols;
  if (!cfg.new_cols.empty()) j["new_cols"] = cfg.new_cols;
  j["bound"] = cfg.bound;
  return j;
}

int cmd_generate(const RunConfig& cfg) {
  cpd::SyntheticSpec spec = cfg.synth;
  spec.seed = cfg.seed;
  const cpd::GeneratedDataset gen = cpd::generate(spec);
  cpd::write_dataset_csv(cfg.output, gen.data);

  json meta;
  meta["spec"] = {{"num_inputs", spec.num_inputs},
                  {"rho_input", spec.rho_input},
                  {"rho_low", spec.rho_low},
                  {"rho_high", spec.rho_high},
                  {"m", spec.m},
                  {"change_at", spec.change_at},
                  {"feasibility_margin", spec.feasibility_margin}};
  meta["seed"] = spec.seed;
  meta["feasibility_scale_regime1"] = gen.scale_regime1;
  meta["feasibility_scale_regime2"] = gen.scale_regime2;
  meta["normalization"] = {{"offset", gen.normalization.offset},
                           {"scale", gen.normalization.scale}};
  meta["old_columns"] = spec.num_inputs / 2;
  meta["new_columns"] = spec.num_inputs / 2;
  meta["config"] = config_echo(cfg, "generate");
  const std::string meta_path =
      cfg.meta_path.empty() ? cfg.output + ".meta.json" : cfg.meta_path;
  cpd::write_file_atomic(meta_path, meta.dump(2) + "\n");
  return 0;
}

json reports_json(const std::vector<cpd::DetectionReport>& reports,
                  const RunConfig& cfg, const std::string& subcommand) {
  json arr = json::array();
  for (const auto& r : reports) {
    json j = cpd::report_to_json(r);
    j["config"].update(config_echo(cfg, subcommand));
    arr.push_back(std::move(j));
  }
  return arr;
}

int cmd_detect(const RunConfig& cfg) {
  const auto data = load_dataset(cfg);
  if (cfg.methods.empty())
    throw cpd::ValidationError("at least one --method is required");
  const auto harness = build_harness_config(cfg, data);
  const auto reports = cpd::run_experiment(data, cfg.methods, harness);
  cpd::write_file_atomic(cfg.output,
                         reports_json(reports, cfg, "detect").dump(2) + "\n");
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  const auto data = load_dataset(cfg);
  if (cfg.methods.empty())
    throw cpd::ValidationError("at least one --method is required");

  json summaries = json::array();
  std::vector<cpd::DetectionReport> last_reports;
  for (int s = 0; s < cfg.sweep_seeds; ++s) {
    RunConfig run = cfg;
    run.seed = cfg.seed + s;
    auto harness = build_harness_config(run, data);
    auto reports = cpd::run_experiment(data, cfg.methods, harness);

    json summary;
    summary["seed"] = run.seed;
    json per_method = json::array();
    for (const auto& r : reports) {
      json mj;
      mj["method"] = r.method;
      mj["mean_mse"] = r.mean_mse;
      if (r.t_hat) mj["t_hat"] = *r.t_hat;
      if (!r.change_times.empty()) mj["change_times"] = r.change_times;
      if (r.true_risk) mj["true_risk"] = *r.true_risk;
      if (r.bound) mj["bound"] = *r.bound;
      // excess-risk block only when eta and pseudo-dimensions are available
      if (data.eta && harness.p1 && harness.p2 &&
          (r.method == "sas" || r.method == "sas-grid" || r.method == "sasf")) {
        cpd::SplitModel model;
        model.t_hat = *r.t_hat;
        model.h1 = cpd::fit_segment(harness.search.learner1, data, 0, *r.t_hat - 1)
                       .hypothesis;
        model.h2 = cpd::fit_segment(harness.search.learner2, data, *r.t_hat - 1,
                                    data.size())
                       .hypothesis;
        const auto ex = cpd::excess_risk_summary(data, model, harness.search,
                                                 *harness.p1, *harness.p2,
                                                 harness.delta);
        mj["excess_risk"] = ex.excess;
        mj["excess_bound"] = ex.bound;
        mj["bound_holds"] = ex.holds;
      }
      per_method.push_back(std::move(mj));
    }
    summary["methods"] = std::move(per_method);
    summary["config"] = config_echo(run, "eval");
    summaries.push_back(std::move(summary));
    last_reports = std::move(reports);
  }

  cpd::write_file_atomic(cfg.output, summaries.dump(2) + "\n");
  if (!cfg.input.empty() && !last_reports.empty()) {
    const std::string timelines =
        cfg.output + (cfg.format == "csv" ? ".timelines.csv" : ".timelines.csv");
    cpd::write_timelines_csv(timelines, last_reports);
  }
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  const auto data = load_dataset(cfg);
  if (cfg.methods.empty())
    throw cpd::ValidationError("at least one --method is required");
  const auto harness = build_harness_config(cfg, data);
  const auto rows = cpd::bench(data, cfg.methods, cfg.reps, harness);
  cpd::write_bench_csv(cfg.output, rows, cfg.output + ".raw.csv");
  return 0;
}

void add_shared_flags(CLI::App* sub, RunConfig& cfg, bool needs_input) {
  if (needs_input)
    sub->add_option("--input,-i", cfg.input, "input dataset CSV")->required();
  sub->add_option("--output,-o", cfg.output, "output path")->required();
  sub->add_option("--config", cfg.config_path, "JSON config file (flag defaults)");
  sub->add_option("--seed", cfg.seed, "master RNG seed");
  sub->add_option("--threads", cfg.threads, "worker threads");
  sub->add_option("--format", cfg.format, "output format: json|csv");
  sub->add_flag("--omit-timings", cfg.omit_timings,
                "zero wall-clock fields for byte-reproducible output");
  sub->add_option("--target-col", cfg.target_col, "response column name");
  sub->add_option("--eta-col", cfg.eta_col, "true-mean column name");
  sub->add_option("--old-cols", cfg.old_cols, "comma-separated old feature columns");
  sub->add_option("--new-cols", cfg.new_cols, "comma-separated new feature columns");
  sub->add_option("--bound", cfg.bound, "response bound B");
}

void add_method_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--method,-m", cfg.methods,
                  "method to run (repeatable): sas, sas-grid, sasf, multi, srm, "
                  "penalized, cgf, caf, mcsprt, rs");
  sub->add_option("--candidates", cfg.candidates, "full|sqrt-grid|list");
  sub->add_option("--candidate-list", cfg.candidate_list,
                  "comma-separated t0 values for --candidates list");
  sub->add_option("--learner", cfg.learner, "ls|ridge|logistic|l1|kernel");
  sub->add_option("--lambda", cfg.lambda, "ridge / kernel regularization");
  sub->add_option("--l1-lambda", cfg.l1_lambda, "L1 penalty weight");
  sub->add_option("--gamma", cfg.gamma, "Gaussian kernel bandwidth");
  sub->add_option("--delta", cfg.delta, "confidence level for bounds");
  sub->add_option("--p1", cfg.p1, "pseudo-dimension of the pre-change class");
  sub->add_option("--p2", cfg.p2, "pseudo-dimension of the post-change class");
  sub->add_option("--multi-k", cfg.multi_k, "number of change times for multi");
  sub->add_option("--max-k", cfg.max_k, "maximum K for SRM selection");
  sub->add_option("--mcsprt-burn-in", cfg.mcsprt_burn_in, "MCSPRT burn-in rows");
  sub->add_option("--mcsprt-threshold", cfg.mcsprt_threshold, "MCSPRT threshold");
  sub->add_option("--rs-trials", cfg.rs_trials, "random-split trials");
  sub->add_option("--window", cfg.window, "moving-average window (0 = m/100)");
}

// Values from --config act as defaults; explicit flags win because CLI11
// re-parses them afterwards.
void apply_json_config(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cpd::IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw cpd::ValidationError(std::string("config parse error: ") + e.what());
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.format = j.value("format", cfg.format);
  cfg.target_col = j.value("target_col", cfg.target_col);
  cfg.eta_col = j.value("eta_col", cfg.eta_col);
  cfg.old_cols = j.value("old_cols", cfg.old_cols);
  cfg.new_cols = j.value("new_cols", cfg.new_cols);
  cfg.bound = j.value("bound", cfg.bound);
  if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
  cfg.candidates = j.value("candidates", cfg.candidates);
  cfg.candidate_list = j.value("candidate_list", cfg.candidate_list);
  cfg.learner = j.value("learner", cfg.learner);
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.l1_lambda = j.value("l1_lambda", cfg.l1_lambda);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.delta = j.value("delta", cfg.delta);
  cfg.p1 = j.value("p1", cfg.p1);
  cfg.p2 = j.value("p2", cfg.p2);
  cfg.multi_k = j.value("multi_k", cfg.multi_k);
  cfg.max_k = j.value("max_k", cfg.max_k);
  cfg.rs_trials = j.value("rs_trials", cfg.rs_trials);
  cfg.window = j.value("window", cfg.window);
  cfg.reps = j.value("reps", cfg.reps);
  cfg.synth.num_inputs = j.value("num_inputs", cfg.synth.num_inputs);
  cfg.synth.rho_input = j.value("rho_input", cfg.synth.rho_input);
  cfg.synth.rho_low = j.value("rho_low", cfg.synth.rho_low);
  cfg.synth.rho_high = j.value("rho_high", cfg.synth.rho_high);
  cfg.synth.m = j.value("m", cfg.synth.m);
  cfg.synth.change_at = j.value("change_at", cfg.synth.change_at);
  cfg.synth.feasibility_margin = j.value("feasibility_margin",
                                         cfg.synth.feasibility_margin);
}

json error_object(const std::string& kind, const std::string& what) {
  return json{{"error", kind}, {"message", what}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised change-point detection via empirical-risk split search"};
  app.require_subcommand(1);
  RunConfig cfg;

  CLI::App* gen = app.add_subcommand("generate", "write a synthetic benchmark dataset");
  add_shared_flags(gen, cfg, false);
  gen->add_option("--num-inputs", cfg.synth.num_inputs, "even number of input features");
  gen->add_option("--rho-input", cfg.synth.rho_input, "input equicorrelation");
  gen->add_option("--rho-low", cfg.synth.rho_low, "irrelevant-block correlation");
  gen->add_option("--rho-high", cfg.synth.rho_high, "relevant-block correlation");
  gen->add_option("--m", cfg.synth.m, "number of rows");
  gen->add_option("--change-at", cfg.synth.change_at, "last row of regime 1");
  gen->add_option("--margin", cfg.synth.feasibility_margin, "PSD feasibility margin");
  gen->add_option("--meta", cfg.meta_path, "metadata JSON path");

  CLI::App* det = app.add_subcommand("detect", "run detectors, write reports");
  add_shared_flags(det, cfg, true);
  add_method_flags(det, cfg);

  CLI::App* ev = app.add_subcommand("eval", "timelines CSV + summary JSON");
  add_shared_flags(ev, cfg, true);
  add_method_flags(ev, cfg);
  ev->add_option("--sweep-seeds", cfg.sweep_seeds, "run N seeds, emit N summaries");

  CLI::App* be = app.add_subcommand("bench", "method x median-ms timing table");
  add_shared_flags(be, cfg, true);
  add_method_flags(be, cfg);
  be->add_option("--reps", cfg.reps, "timing repetitions");

  // pre-scan for --config so file values act as defaults under the flags
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        apply_json_config(cfg, argv[i + 1]);
      } catch (const cpd::IoError& e) {
        std::cerr << error_object("io", e.what()).dump() << "\n";
        return 3;
      } catch (const std::exception& e) {
        std::cerr << error_object("validation", e.what()).dump() << "\n";
        return 2;
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(cfg);
    if (det->parsed()) return cmd_detect(cfg);
    if (ev->parsed()) return cmd_eval(cfg);
    if (be->parsed()) return cmd_bench(cfg);
    return 2;
  } catch (const cpd::ValidationError& e) {
    std::cerr << error_object("validation", e.what()).dump() << "\n";
    return 2;
  } catch (const cpd::IoError& e) {
    std::cerr << error_object("io", e.what()).dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << error_object("numeric", e.what()).dump() << "\n";
    return 4;
  }
}
