#include "sdrcde/model_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "sdrcde/error.hpp"

namespace sdrcde {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from(const json& j, Index cols) {
  Matrix m(static_cast<Index>(j.size()), cols);
  for (Index i = 0; i < m.rows(); ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != cols) throw DataError("ragged matrix in model file");
    for (Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Vector vector_from(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

std::uint64_t parse_hex64(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used, 16);
  if (used != s.size()) throw DataError("bad hex value '" + s + "'");
  return v;
}

json trace_json(const RestartTrace& t) {
  json choices = json::array();
  for (const auto& c : t.choices) {
    choices.push_back({{"sigma", c.sigma}, {"lambda", c.lambda}, {"cv_score", c.score}});
  }
  return {{"init_seed", t.init_seed},
          {"sce", t.sce},
          {"refreshes", t.refreshes},
          {"choices", choices},
          {"iterations", t.iterations},
          {"converged", t.converged},
          {"stalled_at_first_iteration", t.stalled_at_first_iteration},
          {"initial_gradient_norm", t.initial_gradient_norm},
          {"final_sce", t.final_sce},
          {"W", matrix_json(t.W)}};
}

}  // namespace

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

json to_json(const ModelFile& file) {
  const CdeModel& m = file.model;
  const StandardizationStats& st = m.stats;
  json j;
  j["format_version"] = kModelFormatVersion;
  j["d_x"] = m.W.cols();
  j["d_y"] = m.basis.center_outputs.cols();
  j["d_z"] = m.W.rows();
  j["standardization"] = {{"x_mean", vector_json(st.x_mean)},
                          {"x_scale", vector_json(st.x_scale)},
                          {"y_mean", vector_json(st.y_mean)},
                          {"y_scale", vector_json(st.y_scale)},
                          {"x_degenerate", st.x_degenerate},
                          {"y_degenerate", st.y_degenerate}};
  j["W"] = matrix_json(m.W.matrix());
  Dataset centers;
  centers.X = m.basis.center_inputs;
  centers.Y = m.basis.center_outputs;
  centers = invert_standardizer(st, centers);
  j["centers"] = {{"inputs", matrix_json(centers.X)},
                  {"outputs", matrix_json(centers.Y)},
                  {"sample_indices", m.basis.sample_indices}};
  j["sigma"] = m.basis.sigma;
  j["lambda"] = m.lambda;
  j["alpha_hat"] = vector_json(m.alpha_hat);
  j["alpha_tilde"] = vector_json(m.alpha_tilde);
  j["sce_score"] = m.sce_score;
  j["dataset_fingerprint"] = hex64(file.dataset_fingerprint);
  j["fit"] = {{"seed", file.seed}, {"config", file.config}};
  return j;
}

ModelFile model_from_json(const json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("unsupported model format_version " + std::to_string(version));
    }
    const Index dx = j.at("d_x").get<Index>();
    const Index dy = j.at("d_y").get<Index>();
    const json& s = j.at("standardization");
    StandardizationStats st;
    st.x_mean = vector_from(s.at("x_mean"));
    st.x_scale = vector_from(s.at("x_scale"));
    st.y_mean = vector_from(s.at("y_mean"));
    st.y_scale = vector_from(s.at("y_scale"));
    st.x_degenerate = s.at("x_degenerate").get<std::vector<bool>>();
    st.y_degenerate = s.at("y_degenerate").get<std::vector<bool>>();
    if (st.x_mean.size() != dx || st.y_mean.size() != dy) {
      throw DataError("standardization dimensions disagree with d_x/d_y");
    }

    Dataset centers;
    centers.X = matrix_from(j.at("centers").at("inputs"), dx);
    centers.Y = matrix_from(j.at("centers").at("outputs"), dy);
    centers = apply_standardizer(st, centers);
    BasisSpec basis;
    basis.center_inputs = std::move(centers.X);
    basis.center_outputs = std::move(centers.Y);
    basis.sample_indices = j.at("centers").at("sample_indices").get<std::vector<Index>>();
    basis.sigma = j.at("sigma").get<double>();

    ModelFile f{make_cde_model(ProjectionMatrix(matrix_from(j.at("W"), dx)), std::move(basis),
                               j.at("lambda").get<double>(), vector_from(j.at("alpha_hat")),
                               std::move(st), j.at("sce_score").get<double>()),
                parse_hex64(j.at("dataset_fingerprint").get<std::string>()),
                j.at("fit").at("seed").get<std::uint64_t>(), j.at("fit").at("config")};
    return f;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const ValidationError& e) {
    throw DataError(std::string("inconsistent model file: ") + e.what());
  }
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  write_json(to_json(file), path);
}

ModelFile load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

json to_json(const FitReport& report, bool include_timing) {
  json restarts = json::array();
  for (const auto& t : report.restarts) restarts.push_back(trace_json(t));
  json j = {{"chosen_restart", report.chosen},
            {"iterations", report.best().iterations},
            {"final_sce", report.best().final_sce},
            {"restarts", restarts}};
  if (include_timing) j["wall_seconds"] = report.wall_seconds;
  return j;
}

json to_json(const DimensionChoice& choice, bool include_timing) {
  json per_dim = json::array();
  for (std::size_t i = 0; i < choice.candidates.size(); ++i) {
    per_dim.push_back({{"d_z", choice.candidates[i]},
                       {"cv_score", choice.cv_scores[i]},
                       {"report", to_json(choice.fits[i].report, include_timing)}});
  }
  return {{"selected_d_z", choice.dz}, {"candidates", per_dim}};
}

BenchmarkPlan plan_from_json(const json& j) {
  try {
    BenchmarkPlan p;
    for (const auto& d : j.at("datasets")) {
      if (d.is_string()) {
        p.datasets.push_back({d.get<std::string>(), ""});
      } else {
        p.datasets.push_back({d.at("name").get<std::string>(), d.value("path", std::string())});
      }
    }
    p.schemes = j.value("schemes", std::vector<std::string>{"none/lscde", "lsce/lscde", "lsce/ekde"});
    if (j.contains("seeds")) {
      p.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
      const int count = j.value("num_seeds", 10);
      const std::uint64_t base = j.value("base_seed", std::uint64_t{1});
      for (int i = 0; i < count; ++i) p.seeds.push_back(base + static_cast<std::uint64_t>(i));
    }
    p.n_train = j.value("n_train", p.n_train);
    p.n_test = j.value("n_test", p.n_test);
    if (j.contains("dz")) {
      const auto& dz = j.at("dz");
      if (dz.is_string()) {
        if (dz.get<std::string>() != "auto") throw ValidationError("dz must be an integer or \"auto\"");
        p.dz = 0;
      } else {
        p.dz = dz.get<Index>();
        if (p.dz < 1) throw ValidationError("dz must be >= 1");
      }
    }
    p.optimizer.restarts = j.value("restarts", p.optimizer.restarts);
    p.optimizer.cv_every = j.value("cv_every", p.optimizer.cv_every);
    p.optimizer.max_iters = j.value("max_iters", p.optimizer.max_iters);
    p.optimizer.max_centers = j.value("max_centers", p.optimizer.max_centers);
    p.grid.sigmas = j.value("sigma_grid", p.grid.sigmas);
    p.grid.lambdas = j.value("lambda_grid", p.grid.lambdas);
    p.grid.folds = j.value("folds", p.grid.folds);
    p.scale = j.value("scale", p.scale);
    p.record_timing = j.value("record_timing", p.record_timing);
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed benchmark plan: ") + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace sdrcde
