#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "sdrcde/evaluation.hpp"
#include "sdrcde/lscde.hpp"
#include "sdrcde/optimizer.hpp"

namespace sdrcde {

inline constexpr int kModelFormatVersion = 1;

/// Persisted conditional density model plus fit metadata.
struct ModelFile {
  CdeModel model;
  std::uint64_t dataset_fingerprint = 0;
  std::uint64_t seed = 0;
  nlohmann::json config;  // echo of the fit configuration
};

nlohmann::json to_json(const ModelFile& file);
ModelFile model_from_json(const nlohmann::json& j);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

nlohmann::json to_json(const FitReport& report, bool include_timing);
nlohmann::json to_json(const DimensionChoice& choice, bool include_timing);

/// Plan keys: datasets, schemes, seeds (or num_seeds + base_seed), n_train,
/// n_test, dz (integer or "auto"), restarts, cv_every, max_iters,
/// max_centers, sigma_grid, lambda_grid, folds, scale, record_timing.
BenchmarkPlan plan_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

std::string hex64(std::uint64_t v);

}  // namespace sdrcde
