#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teamrank/model.hpp"

namespace teamrank {

// Column contract for object and team CSV files. Serialized as `key = value`
// lines; `#` starts a comment.
//
//   attributes     = FG,3P,3PA,...   ordered attribute subset (required)
//   id_column      = Rk              unsigned integer object id (required)
//   label_column   = Player          display label (defaults to id_column)
//   lambda_column  = MP              exchange parameter (required)
//   team_column    = Tm              roster membership in the object file (optional)
//   team_id_column = Team            team identifier in the team file
//   wins_column    = W               final ranking, higher is better
//   rows           = 400             expected object row count (optional)
struct DatasetManifest {
  std::vector<std::string> attributes;
  std::string id_column = "id";
  std::string label_column;
  std::string lambda_column = "lambda";
  std::string team_column;
  std::string team_id_column = "team";
  std::string wins_column = "wins";
  std::optional<std::size_t> rows;

  std::size_t dimension() const noexcept { return attributes.size(); }
  const std::string& effective_label_column() const noexcept {
    return label_column.empty() ? id_column : label_column;
  }
};

DatasetManifest parse_manifest(std::string_view text);
DatasetManifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& manifest);

// Throws MissingColumn, MalformedRow (with the source line), EmptyFile, IoError.
ObjectSpace load_objects(const std::filesystem::path& path, const DatasetManifest& manifest);
ObjectSpace parse_objects(std::string_view csv_text, const DatasetManifest& manifest);

// Team id -> member object ids, read from manifest.team_column of the object file.
using Rosters = std::map<std::string, std::vector<ObjectId>>;
Rosters load_rosters(const std::filesystem::path& path, const DatasetManifest& manifest);

struct TeamTable {
  std::vector<TargetContext> teams;
  std::vector<double> wins;  // parallel to teams

  // Team ids ordered by wins descending, ties by id.
  std::vector<std::string> standings() const;
  const TargetContext* find(std::string_view team_id) const noexcept;
};

TeamTable load_teams(const std::filesystem::path& path, const DatasetManifest& manifest);
TeamTable parse_teams(std::string_view csv_text, const DatasetManifest& manifest);

// CSV text in the manifest's column order: id, label, lambda, attributes.
std::string format_objects(const ObjectSpace& space, const DatasetManifest& manifest);
void save_objects(const ObjectSpace& space, const DatasetManifest& manifest,
                  const std::filesystem::path& path);

// Negative binomial counting failures before the r-th success: mean r(1-p)/p,
// variance r(1-p)/p^2. Real r is allowed.
struct NbDimension {
  std::string name;
  double r = 1.0;
  double p = 0.5;

  double mean() const noexcept { return r * (1.0 - p) / p; }
  double variance() const noexcept { return r * (1.0 - p) / (p * p); }
};

// The nine fitted player-stat marginals: FG, TRB, BLK, DRB, FT, STL, FTA, PTS, AST.
std::vector<NbDimension> default_nb_params();

std::vector<NbDimension> parse_nb_params(std::string_view csv_text);

struct SyntheticOptions {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  double lambda_min = 500.0;
  double lambda_max = 3000.0;
  std::size_t threads = 0;  // 0: hardware concurrency
};

// Records are generated in shards of kShardSize with per-shard seeds derived
// from the master seed, so output is identical for any thread count. Ids run
// from 1 to count. Throws InvalidParams.
ObjectSpace gen_synthetic(std::span<const NbDimension> params, const SyntheticOptions& options);

inline constexpr std::size_t kShardSize = 4096;
std::uint64_t shard_seed(std::uint64_t master_seed, std::uint64_t shard) noexcept;

// Draws `count` values from one NB marginal through the gamma-Poisson mixture.
std::vector<double> sample_nb(const NbDimension& params, std::size_t count, std::uint64_t seed);

double nb_log_pmf(std::uint64_t k, double r, double p) noexcept;

// Sum of (observed - expected)^2 / expected. Throws DimensionMismatch, InvalidArgument.
double chi_square_statistic(std::span<const double> observed, std::span<const double> expected);

struct GofBin {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;  // inclusive; the last bin is open ended
  double expected = 0.0;
  double observed = 0.0;
};

struct GofResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double critical = 0.0;
  bool accepted = false;
  std::vector<GofBin> bins;
};

// Chi-square goodness of fit against NB(r, p) with given (not fitted)
// parameters: bins grow left to right until each expects >= 5 counts, and the
// open tail is merged into the last bin. dof = bins - 1.
// Throws InsufficientData (< 50 samples), InvalidParams, InvalidArgument (alpha),
// DegenerateBinning (< 2 bins).
GofResult chi_square_gof(std::span<const double> samples, double r, double p, double alpha);

}  // namespace teamrank
