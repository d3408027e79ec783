#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "sdrcde/dataset.hpp"
#include "sdrcde/error.hpp"
#include "sdrcde/evaluation.hpp"
#include "sdrcde/kernel_basis.hpp"
#include "sdrcde/model_io.hpp"
#include "sdrcde/optimizer.hpp"

namespace sdrcde::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Bad flag values detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string meta_path_for(const std::string& csv) { return csv + ".meta.json"; }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const json& j) {
  const Index rows = static_cast<Index>(j.size());
  const Index cols = rows == 0 ? 0 : static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (static_cast<Index>(j.at(i).size()) != cols) throw DataError("ragged true_W in sidecar");
    for (Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string dataset;
  long long n = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<double> noise_sd;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  if (a.n < 1) throw UsageError("--n must be at least 1");
  Dataset data;
  if (a.noise_sd) {
    if (!(*a.noise_sd >= 0.0)) throw UsageError("--noise-sd must be non-negative");
    if (a.dataset == "artificial-a") {
      data = gen_artificial_a(a.n, a.seed, *a.noise_sd);
    } else if (a.dataset == "artificial-b") {
      data = gen_artificial_b(a.n, a.seed, *a.noise_sd);
    } else {
      throw UsageError("--noise-sd applies to artificial-a and artificial-b only");
    }
  } else {
    try {
      data = generate_named(a.dataset, a.n, a.seed);
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
  }
  write_csv(data, a.out);

  json meta = {{"dataset", a.dataset},
               {"n", data.size()},
               {"seed", a.seed},
               {"d_x", data.dx()},
               {"d_y", data.dy()}};
  if (a.noise_sd) meta["noise_sd"] = *a.noise_sd;
  if (data.true_W) meta["true_W"] = matrix_json(*data.true_W);
  write_json(meta, meta_path_for(a.out));
  out << "wrote " << data.size() << " rows to " << a.out << "\n";
  return kOk;
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string dz = "1";
  int restarts = 20;
  int cv_every = 5;
  int max_iters = 100;
  std::uint64_t seed = 0;
  std::vector<double> sigma_grid;
  std::vector<double> lambda_grid;
  long long max_centers = kDefaultMaxCenters;
  int folds = 5;
  int threads = 0;
  std::string out;
  std::string report;
  bool record_timing = false;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const Dataset raw = load_csv(a.data);
  raw.validate();

  std::vector<Index> candidates;
  if (a.dz == "auto") {
    for (Index d = 1; d <= std::min<Index>(raw.dx(), 10); ++d) candidates.push_back(d);
  } else {
    Index dz = 0;
    try {
      std::size_t used = 0;
      dz = std::stoll(a.dz, &used);
      if (used != a.dz.size()) throw std::invalid_argument(a.dz);
    } catch (const std::exception&) {
      throw UsageError("--dz must be an integer or 'auto', got '" + a.dz + "'");
    }
    if (dz < 1 || dz > raw.dx()) {
      throw UsageError("--dz " + a.dz + " is outside [1, " + std::to_string(raw.dx()) +
                       "] for this dataset");
    }
    candidates.push_back(dz);
  }

  ModelGrid grid = ModelGrid::defaults();
  if (!a.sigma_grid.empty()) grid.sigmas = a.sigma_grid;
  if (!a.lambda_grid.empty()) grid.lambdas = a.lambda_grid;
  grid.folds = a.folds;

  OptimizerConfig cfg;
  cfg.restarts = a.restarts;
  cfg.cv_every = a.cv_every;
  cfg.max_iters = a.max_iters;
  cfg.seed = a.seed;
  cfg.max_centers = a.max_centers;
  cfg.threads = a.threads;
  try {
    grid.validate(raw.size());
    cfg.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }

  const StandardizationStats stats = fit_standardizer(raw);
  const Dataset data_std = apply_standardizer(stats, raw);

  const DimensionChoice choice = select_dimension(data_std, stats, candidates, grid, cfg);
  const FitResult& fit = choice.chosen();

  ModelFile file{fit.model, fingerprint(raw), a.seed,
                 json{{"d_z", a.dz},
                      {"restarts", a.restarts},
                      {"cv_every", a.cv_every},
                      {"max_iters", a.max_iters},
                      {"max_centers", a.max_centers},
                      {"folds", a.folds},
                      {"sigma_grid", grid.sigmas},
                      {"lambda_grid", grid.lambdas}}};
  save_model(file, a.out);

  json report = to_json(choice, a.record_timing);
  report["d_z"] = choice.dz;
  report["sigma"] = fit.model.basis.sigma;
  report["lambda"] = fit.model.lambda;
  report["sce_score"] = fit.model.sce_score;
  const std::string report_path = a.report.empty() ? a.out + ".report.json" : a.report;
  write_json(report, report_path);

  out << "d_z=" << choice.dz << " sigma=" << fit.model.basis.sigma
      << " lambda=" << fit.model.lambda << " sce=" << fit.model.sce_score << "\n";
  return kOk;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string model;
  std::string data;
  std::string meta;
  std::string train;
  std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (!fs::exists(a.model)) throw DataError("model file not found: " + a.model);
  const ModelFile file = load_model(a.model);
  const Dataset test = load_csv(a.data, file.model.W.cols(), file.model.basis.center_outputs.cols());
  test.validate();

  if (!a.train.empty()) {
    const Dataset train = load_csv(a.train);
    if (fingerprint(train) != file.dataset_fingerprint) {
      err << "warning: " << a.train
          << " does not match the dataset the model was fitted on; the model's own "
             "standardization is used\n";
    }
  }

  const CdeError cde = error_cde(file.model, test);
  json metrics = {{"error_cde", cde.value},
                  {"points", cde.points},
                  {"degenerate_points", cde.degenerate_points},
                  {"model_d_z", file.model.W.rows()}};

  const std::string meta_path = a.meta.empty() ? meta_path_for(a.data) : a.meta;
  if (!a.meta.empty() || fs::exists(meta_path)) {
    const json meta = read_json(meta_path);
    if (meta.contains("true_W")) {
      const Matrix w_star = matrix_from(meta.at("true_W"));
      metrics["error_dr"] = error_dr(file.model.W.matrix(), w_star);
      metrics["true_d_z"] = w_star.rows();
    }
  }

  if (a.out.empty()) {
    out << metrics.dump(2) << "\n";
  } else {
    write_json(metrics, a.out);
  }
  return kOk;
}

// --- benchmark --------------------------------------------------------------

struct BenchmarkArgs {
  std::string plan;
  std::string out;
  std::string aggregate;
  std::string table;
  std::optional<double> scale;
  bool record_timing = false;
  int threads = 0;
};

void write_text_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  body(f);
  if (!f) throw DataError("failed writing " + path);
}

int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out) {
  BenchmarkPlan plan;
  try {
    plan = plan_from_json(read_json(a.plan));
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const fs::path base = fs::path(a.plan).parent_path();
  for (auto& d : plan.datasets) {
    if (!d.path.empty() && fs::path(d.path).is_relative()) d.path = (base / d.path).string();
  }
  if (a.record_timing) plan.record_timing = true;
  if (a.scale) plan.scale = *a.scale;
  plan.threads = a.threads;

  const BenchmarkResult result = run_benchmark(plan);
  write_text_file(a.out, [&](std::ostream& f) { write_results_csv(f, result.records); });
  if (!a.aggregate.empty()) {
    write_text_file(a.aggregate, [&](std::ostream& f) { write_aggregate_csv(f, result.rows); });
  }
  if (!a.table.empty()) {
    write_text_file(a.table, [&](std::ostream& f) { write_aggregate_text(f, result.rows); });
  } else {
    write_aggregate_text(out, result.rows);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dimension reduction and conditional density estimation"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic dataset and its metadata sidecar");
  g->add_option("--dataset", gen.dataset,
                "artificial-a | artificial-b | illustration-bimodal | illustration-heteroscedastic")
      ->required();
  g->add_option("--n", gen.n, "Number of samples")->required();
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--out", gen.out, "Output CSV")->required();
  g->add_option("--noise-sd", gen.noise_sd, "Output noise standard deviation");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Estimate the projection and the conditional density");
  f->add_option("--data", fit.data, "Training CSV")->required();
  f->add_option("--dz", fit.dz, "Reduced dimension, or 'auto'")->capture_default_str();
  f->add_option("--restarts", fit.restarts)->capture_default_str();
  f->add_option("--cv-every", fit.cv_every, "Accepted steps between (sigma, lambda) refreshes")
      ->capture_default_str();
  f->add_option("--max-iters", fit.max_iters)->capture_default_str();
  f->add_option("--seed", fit.seed)->capture_default_str();
  f->add_option("--sigma-grid", fit.sigma_grid, "Comma-separated kernel widths")->delimiter(',');
  f->add_option("--lambda-grid", fit.lambda_grid, "Comma-separated regularizers")->delimiter(',');
  f->add_option("--max-centers", fit.max_centers)->capture_default_str();
  f->add_option("--folds", fit.folds)->capture_default_str();
  f->add_option("--threads", fit.threads, "Worker threads (0 = SDRCDE_THREADS or all cores)");
  f->add_option("--out", fit.out, "Model JSON")->required();
  f->add_option("--report", fit.report, "Fit report JSON (default <out>.report.json)");
  f->add_flag("--record-timing", fit.record_timing, "Include wall-clock times in the report");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a model on a CSV");
  e->add_option("--model", ev.model, "Model JSON")->required();
  e->add_option("--data", ev.data, "Test CSV")->required();
  e->add_option("--meta", ev.meta, "Sidecar with true_W (default <data>.meta.json if present)");
  e->add_option("--train", ev.train, "Training CSV to check against the model fingerprint");
  e->add_option("--out", ev.out, "Metrics JSON (default stdout)");

  BenchmarkArgs bm;
  auto* b = app.add_subcommand("benchmark", "Run a benchmark plan");
  b->add_option("--plan", bm.plan, "Plan JSON")->required();
  b->add_option("--out", bm.out, "Per-run results CSV")->required();
  b->add_option("--aggregate", bm.aggregate, "Aggregate CSV");
  b->add_option("--table", bm.table, "Aligned text table (default stdout)");
  b->add_option("--scale", bm.scale, "Multiplier shown in the scale column");
  b->add_flag("--record-timing", bm.record_timing, "Fill the wall_s column");
  b->add_option("--threads", bm.threads, "Worker threads (0 = SDRCDE_THREADS or all cores)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*f) return cmd_fit(fit, out);
    if (*e) return cmd_eval(ev, out, err);
    if (*b) return cmd_benchmark(bm, out);
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << "\n";
    return kUsage;
  } catch (const ValidationError& ex) {
    err << "invalid input: " << ex.what() << "\n";
    return kUsage;
  } catch (const DataError& ex) {
    err << "data error: " << ex.what() << "\n";
    return kDataError;
  } catch (const OptimizerStalledError& ex) {
    err << "optimizer stalled: " << ex.what() << "\n";
    return kNumericalFailure;
  } catch (const DegenerateDensityError& ex) {
    err << "degenerate density: " << ex.what() << "\n";
    return kNumericalFailure;
  } catch (const SolverError& ex) {
    err << "numerical failure: " << ex.what() << "\n";
    return kNumericalFailure;
  } catch (const json::exception& ex) {
    err << "data error: " << ex.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace sdrcde::cli
