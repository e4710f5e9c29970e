#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "teamrank/dataio.hpp"
#include "teamrank/model.hpp"
#include "teamrank/ranking.hpp"

namespace teamrank {

// A league: the object space, who plays where, team aggregates with their
// final ranking, and the per-dimension weights derived from them.
struct League {
  ObjectSpace space;
  Rosters rosters;
  TeamTable table;
  WeightVector weights;
  std::vector<std::size_t> floored_dimensions;
};

League load_league(const std::filesystem::path& objects, const std::filesystem::path& teams,
                   const DatasetManifest& manifest);

// Synthetic league over a generated space: team t (1-based) owns objects
// (t-1)*team_size+1 .. t*team_size, its aggregate is the member sum, and its
// final-ranking score is the sum of aggregates scaled by each dimension's mean.
League synthetic_league(ObjectSpace space, std::size_t teams, std::size_t team_size);

std::string synthetic_team_id(std::size_t team);

// The elite set for `team_id`: the best `elite_size` teams by wins, excluding itself.
std::vector<TargetContext> elite_teams(const TeamTable& table, std::size_t elite_size,
                                       std::string_view team_id);

// Teams ranked elite_size+1 .. 2*elite_size by wins.
std::vector<std::string> mid_class_teams(const TeamTable& table, std::size_t elite_size);

// `key = value` experiment configuration.
//
//   dataset        = synthetic | real
//   objects, team_file, manifest   paths (real)
//   count, seed, league_teams, team_size, params (synthetic; params is an NB csv)
//   block_size, top_k, elite_size, teams (comma list; default: mid-class)
//   timing_runs, timing_repeats, index_dir, keep_index
struct ExperimentConfig {
  std::string dataset = "synthetic";
  std::filesystem::path objects_path;
  std::filesystem::path teams_path;
  std::filesystem::path manifest_path;
  std::filesystem::path params_path;
  std::size_t count = 10000;
  std::uint64_t seed = 1;
  std::size_t league_teams = 30;
  std::size_t team_size = 5;
  std::size_t block_size = 10;
  std::size_t top_k = 2;
  std::size_t elite_size = 10;
  std::vector<std::string> teams;
  std::size_t timing_runs = 5;
  std::size_t timing_repeats = 20;
  std::filesystem::path index_dir;
  bool keep_index = false;

  std::map<std::string, std::string> echo() const;
};

ExperimentConfig parse_experiment_config(std::string_view text);

struct TeamRow {
  std::string team;
  std::string target;
  double distance_before = 0.0;
  double distance_after = 0.0;
  std::size_t members = 0;
  std::map<std::string, std::vector<SwapRecommendation>> recommendations;  // by method
  std::map<std::string, std::uint64_t> io;
  std::map<std::string, double> timing;  // seconds

  friend bool operator==(const TeamRow&, const TeamRow&) = default;
};

struct ExperimentReport {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::map<std::string, std::string> config;
  std::vector<TeamRow> rows;
  std::map<std::string, std::uint64_t> io;
  std::map<std::string, double> timing;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

inline constexpr const char* kMethodBruteForce = "bf";
inline constexpr const char* kMethodRtcStar = "rtcstar";

// Runs target selection, both ranking methods, I/O accounting and timing
// (median of timing_runs after one warm-up) for every designated team.
ExperimentReport run_experiment(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config, const League& league);

enum class ReportFormat { kCsv, kJson };

std::optional<ReportFormat> parse_report_format(std::string_view name);

std::string format_report(const ExperimentReport& report, ReportFormat format);
ExperimentReport parse_report(std::string_view text, ReportFormat format);
// Throws IoError.
void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path);

double median(std::vector<double> samples);

}  // namespace teamrank
