#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "sdrcde/types.hpp"

namespace sdrcde {

/// Paired samples: row i of X (n x d_x) goes with row i of Y (n x d_y).
struct Dataset {
  Matrix X;
  Matrix Y;
  std::string name;
  std::optional<Matrix> true_W;  // synthetic data only
  std::uint64_t seed = 0;

  Index size() const { return X.rows(); }
  Index dx() const { return X.cols(); }
  Index dy() const { return Y.cols(); }

  /// Rows selected by index, preserving the X/Y pairing and metadata.
  Dataset subset(const std::vector<Index>& rows) const;

  /// Throws ValidationError on mismatched row counts or non-finite entries.
  void validate() const;
};

/// Default standard deviation of the additive output noise in the
/// artificial benchmarks.
inline constexpr double kArtificialNoiseSd = 0.25;

/// x ~ N(0, I_5), y = x1^2 + x2^2 + noise. True subspace spanned by e1, e2.
Dataset gen_artificial_a(Index n, std::uint64_t seed, double noise_sd = kArtificialNoiseSd);

/// x ~ N(0, I_5), y = x2 + x2^2 + x2^3 + noise. True subspace e2.
Dataset gen_artificial_b(Index n, std::uint64_t seed, double noise_sd = kArtificialNoiseSd);

/// Illustration data with one relevant input coordinate (x1) and four
/// standard-normal noise coordinates. `family` is "bimodal" or
/// "heteroscedastic".
Dataset gen_illustration(Index n, std::uint64_t seed, std::string_view family);

/// Dispatch by name: artificial-a, artificial-b, illustration-bimodal,
/// illustration-heteroscedastic.
Dataset generate_named(std::string_view name, Index n, std::uint64_t seed);

/// Reads a CSV with header x1..x{d_x},y1..y{d_y}. Passing d_x/d_y < 0 infers
/// them from the header.
Dataset load_csv(const std::filesystem::path& path, Index dx = -1, Index dy = -1);

/// Writes the CSV format read by load_csv, 17 significant digits.
void write_csv(const Dataset& data, const std::filesystem::path& path);

/// Seeded permutation split into (first n_train rows, remainder).
std::pair<Dataset, Dataset> split(const Dataset& data, Index n_train, std::uint64_t seed);

/// Decorrelated child seed (splitmix64 of seed and salt).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

/// 64-bit FNV-1a over the shape and the bit patterns of X and Y.
std::uint64_t fingerprint(const Dataset& data);

}  // namespace sdrcde
