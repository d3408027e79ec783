#include "sdrcde/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "sdrcde/error.hpp"

namespace sdrcde {

namespace {

constexpr Index kArtificialDx = 5;

Matrix standard_normal(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

Matrix unit_rows(Index dx, std::initializer_list<Index> axes) {
  Matrix w = Matrix::Zero(static_cast<Index>(axes.size()), dx);
  Index r = 0;
  for (Index a : axes) w(r++, a) = 1.0;
  return w;
}

void check_noise(double sd) {
  if (!std::isfinite(sd) || sd < 0.0) throw ValidationError("noise sd must be finite and >= 0");
}

void check_n(Index n) {
  if (n < 1) throw ValidationError("sample count must be positive");
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  out.X = X(rows, Eigen::all);
  out.Y = Y(rows, Eigen::all);
  out.name = name;
  out.true_W = true_W;
  out.seed = seed;
  return out;
}

void Dataset::validate() const {
  if (X.rows() != Y.rows()) throw ValidationError("X and Y row counts differ");
  if (!X.allFinite() || !Y.allFinite()) throw ValidationError("dataset has non-finite entries");
}

Dataset gen_artificial_a(Index n, std::uint64_t seed, double noise_sd) {
  check_n(n);
  check_noise(noise_sd);
  std::mt19937_64 rng(seed);
  Dataset d;
  d.X = standard_normal(n, kArtificialDx, rng);
  const Matrix noise = standard_normal(n, 1, rng);
  d.Y = (d.X.col(0).array().square() + d.X.col(1).array().square()).matrix() + noise_sd * noise;
  d.name = "artificial-a";
  d.true_W = unit_rows(kArtificialDx, {0, 1});
  d.seed = seed;
  return d;
}

Dataset gen_artificial_b(Index n, std::uint64_t seed, double noise_sd) {
  check_n(n);
  check_noise(noise_sd);
  std::mt19937_64 rng(seed);
  Dataset d;
  d.X = standard_normal(n, kArtificialDx, rng);
  const Matrix noise = standard_normal(n, 1, rng);
  const Eigen::ArrayXd x2 = d.X.col(1).array();
  d.Y = (x2 + x2.square() + x2.cube()).matrix() + noise_sd * noise;
  d.name = "artificial-b";
  d.true_W = unit_rows(kArtificialDx, {1});
  d.seed = seed;
  return d;
}

Dataset gen_illustration(Index n, std::uint64_t seed, std::string_view family) {
  check_n(n);
  const bool bimodal = family == "bimodal";
  if (!bimodal && family != "heteroscedastic") {
    throw ValidationError("unknown illustration family '" + std::string(family) + "'");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  d.X = standard_normal(n, kArtificialDx, rng);
  d.Y.resize(n, 1);
  for (Index i = 0; i < n; ++i) {
    const double x1 = d.X(i, 0);
    if (bimodal) {
      const double u = uniform(rng);
      const double sign = u < 0 ? -1.0 : 1.0;
      d.Y(i, 0) = 0.8 * sign * (1.0 + 0.2 * x1) + 0.3 * normal(rng);
    } else {
      d.Y(i, 0) = std::sin(2.0 * x1) + (0.1 + 0.4 * std::abs(x1)) * normal(rng);
    }
  }
  d.name = "illustration-" + std::string(family);
  d.true_W = unit_rows(kArtificialDx, {0});
  d.seed = seed;
  return d;
}

Dataset generate_named(std::string_view name, Index n, std::uint64_t seed) {
  if (name == "artificial-a") return gen_artificial_a(n, seed);
  if (name == "artificial-b") return gen_artificial_b(n, seed);
  if (name == "illustration-bimodal") return gen_illustration(n, seed, "bimodal");
  if (name == "illustration-heteroscedastic") return gen_illustration(n, seed, "heteroscedastic");
  throw ValidationError("unknown dataset generator '" + std::string(name) + "'");
}

Dataset load_csv(const std::filesystem::path& path, Index dx, Index dy) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  Index hx = 0;
  Index hy = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    const bool is_x = !name.empty() && name[0] == 'x';
    const bool is_y = !name.empty() && name[0] == 'y';
    const Index expected_index = is_x ? hx + 1 : hy + 1;
    if ((!is_x && !is_y) || name.substr(1) != std::to_string(expected_index) ||
        (is_x && hy > 0)) {
      throw DataError(path.string() + ":1: bad header column '" + name +
                      "' (expected x1..xD,y1..yE)");
    }
    (is_x ? hx : hy) += 1;
  }
  if (hx == 0 || hy == 0) throw DataError(path.string() + ":1: header needs x and y columns");
  if ((dx >= 0 && dx != hx) || (dy >= 0 && dy != hy)) {
    throw DataError(path.string() + ": header has d_x=" + std::to_string(hx) +
                    ", d_y=" + std::to_string(hy) + " but caller expected d_x=" +
                    std::to_string(dx) + ", d_y=" + std::to_string(dy));
  }
  const Index cols = hx + hy;

  std::vector<double> values;
  Index line_no = 1;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<Index>(fields.size()) != cols) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(cols) + " fields, got " + std::to_string(fields.size()));
    }
    for (Index c = 0; c < cols; ++c) {
      const std::string f = trim(fields[c]);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (f.empty() || used != f.size()) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": column " +
                        std::to_string(c + 1) + ": cannot parse '" + f + "'");
      }
      if (!std::isfinite(v)) {
        throw DataError(path.string() + ": non-finite value at row " + std::to_string(rows + 1) +
                        ", column " + std::to_string(c + 1) + " (line " +
                        std::to_string(line_no) + ")");
      }
      values.push_back(v);
    }
    ++rows;
  }

  if (rows == 0) throw DataError(path.string() + ": no data rows");
  Dataset d;
  d.X.resize(rows, hx);
  d.Y.resize(rows, hy);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < hx; ++c) d.X(i, c) = values[i * cols + c];
    for (Index c = 0; c < hy; ++c) d.Y(i, c) = values[i * cols + hx + c];
  }
  d.name = path.stem().string();
  return d;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  for (Index c = 0; c < data.dx(); ++c) out << (c ? ",x" : "x") << c + 1;
  for (Index c = 0; c < data.dy(); ++c) out << ",y" << c + 1;
  out << '\n';
  for (Index i = 0; i < data.size(); ++i) {
    for (Index c = 0; c < data.dx(); ++c) out << (c ? "," : "") << data.X(i, c);
    for (Index c = 0; c < data.dy(); ++c) out << ',' << data.Y(i, c);
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::pair<Dataset, Dataset> split(const Dataset& data, Index n_train, std::uint64_t seed) {
  const Index n = data.size();
  if (n_train < 1 || n_train >= n) {
    throw ValidationError("split needs 1 <= n_train < n (n=" + std::to_string(n) +
                          ", n_train=" + std::to_string(n_train) + ")");
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Index> train(perm.begin(), perm.begin() + n_train);
  std::vector<Index> test(perm.begin() + n_train, perm.end());
  return {data.subset(train), data.subset(test)};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fingerprint(const Dataset& data) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(data.size()));
  mix(static_cast<std::uint64_t>(data.dx()));
  mix(static_cast<std::uint64_t>(data.dy()));
  for (Index i = 0; i < data.size(); ++i) {
    for (Index c = 0; c < data.dx(); ++c) mix(std::bit_cast<std::uint64_t>(data.X(i, c)));
    for (Index c = 0; c < data.dy(); ++c) mix(std::bit_cast<std::uint64_t>(data.Y(i, c)));
  }
  return h;
}

}  // namespace sdrcde
