#include "teamrank/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "teamrank/csv.hpp"
#include "teamrank/error.hpp"
#include "teamrank/weighting.hpp"

namespace teamrank {

namespace {

using Clock = std::chrono::steady_clock;

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

template <typename F>
double seconds(F&& fn) {
  const auto start = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Median of `runs` samples after one untimed warm-up; each sample averages `repeats` calls.
template <typename F>
double timed_median(std::size_t runs, std::size_t repeats, F&& fn) {
  fn();
  std::vector<double> samples;
  for (std::size_t r = 0; r < runs; ++r) {
    samples.push_back(seconds([&] {
                        for (std::size_t i = 0; i < repeats; ++i) fn();
                      }) /
                      static_cast<double>(repeats));
  }
  return median(std::move(samples));
}

std::size_t to_size(const std::string& key, const std::string& value) {
  unsigned long long out = 0;
  if (!csv::parse_u64(value, out)) {
    throw Error(ErrorCode::kInvalidArgument, "config '" + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(out);
}

WeightResult league_weights(const TeamTable& table) {
  std::vector<AttributeVector> stats;
  for (const auto& t : table.teams) stats.push_back(t.aggregate);
  return compute_weights(stats, table.wins);
}

}  // namespace

double median(std::vector<double> samples) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  return samples.size() % 2 == 1 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
}

League load_league(const std::filesystem::path& objects, const std::filesystem::path& teams,
                   const DatasetManifest& manifest) {
  ObjectSpace space = load_objects(objects, manifest);
  Rosters rosters = load_rosters(objects, manifest);
  TeamTable table = load_teams(teams, manifest);
  WeightResult weights = league_weights(table);
  return League{std::move(space), std::move(rosters), std::move(table), std::move(weights.weights),
                std::move(weights.floored_dimensions)};
}

std::string synthetic_team_id(std::size_t team) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "S%02zu", team);
  return buffer;
}

League synthetic_league(ObjectSpace space, std::size_t teams, std::size_t team_size) {
  if (teams < 2 || team_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "a league needs at least two non-empty teams");
  }
  if (teams * team_size > space.size()) {
    throw Error(ErrorCode::kInvalidArgument, "space too small for " + std::to_string(teams) +
                                                 " teams of " + std::to_string(team_size));
  }
  const std::size_t d = space.dimension();
  std::vector<double> mean(d, 0.0);
  for (const auto& rec : space.records()) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += rec.attrs[i];
  }
  for (double& m : mean) m = std::max(m / static_cast<double>(space.size()), 1e-12);

  Rosters rosters;
  TeamTable table;
  for (std::size_t t = 1; t <= teams; ++t) {
    std::vector<ObjectId> ids;
    for (std::size_t k = 0; k < team_size; ++k) ids.push_back((t - 1) * team_size + k + 1);
    TargetContext ctx{synthetic_team_id(t), make_team(space, ids).aggregate};
    double score = 0.0;
    for (std::size_t i = 0; i < d; ++i) score += ctx.aggregate[i] / mean[i];
    rosters[ctx.team_id] = std::move(ids);
    table.teams.push_back(std::move(ctx));
    table.wins.push_back(score);
  }
  WeightResult weights = league_weights(table);
  return League{std::move(space), std::move(rosters), std::move(table), std::move(weights.weights),
                std::move(weights.floored_dimensions)};
}

std::vector<TargetContext> elite_teams(const TeamTable& table, std::size_t elite_size,
                                       std::string_view team_id) {
  std::vector<TargetContext> out;
  for (const std::string& id : table.standings()) {
    if (out.size() == elite_size) break;
    if (id == team_id) continue;
    out.push_back(*table.find(id));
  }
  return out;
}

std::vector<std::string> mid_class_teams(const TeamTable& table, std::size_t elite_size) {
  const std::vector<std::string> order = table.standings();
  std::vector<std::string> out;
  for (std::size_t i = elite_size; i < std::min(order.size(), 2 * elite_size); ++i) {
    out.push_back(order[i]);
  }
  return out;
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
  std::map<std::string, std::string> out{
      {"dataset", dataset},
      {"block_size", std::to_string(block_size)},
      {"top_k", std::to_string(top_k)},
      {"elite_size", std::to_string(elite_size)},
      {"method", std::string(kMethodBruteForce) + "," + kMethodRtcStar},
      {"seed", std::to_string(seed)},
      {"timing_runs", std::to_string(timing_runs)},
      {"timing_repeats", std::to_string(timing_repeats)},
      {"target_rule", "weighted truncated distance, ties by team id"},
  };
  if (dataset == "synthetic") {
    out["count"] = std::to_string(count);
    out["league_teams"] = std::to_string(league_teams);
    out["team_size"] = std::to_string(team_size);
    if (!params_path.empty()) out["params"] = params_path.string();
  } else {
    out["objects"] = objects_path.string();
    out["teams"] = teams_path.string();
    out["manifest"] = manifest_path.string();
  }
  return out;
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  ExperimentConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "config line '" + content + "' is not key = value");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key == "dataset") {
      if (value != "synthetic" && value != "real") {
        throw Error(ErrorCode::kInvalidArgument, "dataset must be synthetic or real");
      }
      config.dataset = value;
    } else if (key == "objects") {
      config.objects_path = value;
    } else if (key == "teams") {
      config.teams.clear();
      std::stringstream list(value);
      for (std::string id; std::getline(list, id, ',');) {
        if (!trim(id).empty()) config.teams.push_back(trim(id));
      }
    } else if (key == "team_file") {
      config.teams_path = value;
    } else if (key == "manifest") {
      config.manifest_path = value;
    } else if (key == "params") {
      config.params_path = value;
    } else if (key == "count") {
      config.count = to_size(key, value);
    } else if (key == "seed") {
      config.seed = to_size(key, value);
    } else if (key == "league_teams") {
      config.league_teams = to_size(key, value);
    } else if (key == "team_size") {
      config.team_size = to_size(key, value);
    } else if (key == "block_size") {
      config.block_size = to_size(key, value);
    } else if (key == "top_k") {
      config.top_k = to_size(key, value);
    } else if (key == "elite_size") {
      config.elite_size = to_size(key, value);
    } else if (key == "timing_runs") {
      config.timing_runs = to_size(key, value);
    } else if (key == "timing_repeats") {
      config.timing_repeats = to_size(key, value);
    } else if (key == "index_dir") {
      config.index_dir = value;
    } else if (key == "keep_index") {
      config.keep_index = value == "true" || value == "1";
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
    }
  }
  return config;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.dataset == "real") {
    return run_experiment(config, load_league(config.objects_path, config.teams_path,
                                              read_manifest(config.manifest_path)));
  }
  const std::vector<NbDimension> params = config.params_path.empty()
                                              ? default_nb_params()
                                              : parse_nb_params(csv::slurp(config.params_path));
  SyntheticOptions options;
  options.count = config.count;
  options.seed = config.seed;
  return run_experiment(config, synthetic_league(gen_synthetic(params, options),
                                                 config.league_teams, config.team_size));
}

ExperimentReport run_experiment(const ExperimentConfig& config, const League& league) {
  if (config.block_size == 0 || config.top_k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "block_size and top_k must be positive");
  }
  const std::size_t runs = std::max<std::size_t>(config.timing_runs, 1);
  const std::size_t repeats = std::max<std::size_t>(config.timing_repeats, 1);
  const std::filesystem::path index_dir =
      config.index_dir.empty() ? std::filesystem::temp_directory_path() / "teamrank-index"
                               : config.index_dir;

  ExperimentReport report;
  report.config = config.echo();
  const std::vector<std::string> team_ids =
      config.teams.empty() ? mid_class_teams(league.table, config.elite_size) : config.teams;
  if (team_ids.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no teams to evaluate: the league needs more than elite_size teams, or list teams explicitly");
  }

  for (const std::string& team_id : team_ids) {
    try {
      auto roster = league.rosters.find(team_id);
      if (roster == league.rosters.end()) {
        throw Error(ErrorCode::kInvalidArgument, "no roster for team");
      }
      const TeamContext team = make_team(league.space, roster->second);
      const std::vector<TargetContext> elite = elite_teams(league.table, config.elite_size, team_id);
      const TargetSelection selection = select_target(team, team_id, elite, league.weights);
      const TargetContext& target = *league.table.find(selection.target_id);

      TeamRow row;
      row.team = team_id;
      row.target = selection.target_id;
      row.distance_before = selection.distance;
      row.members = team.member_ids.size();

      IoStats bf_io;
      auto bf = brute_force_rank(team, target, league.space, league.weights, config.top_k,
                                 {config.block_size, &bf_io});

      std::optional<NnIndex> index;
      row.timing["rtcstar_build_seconds"] = seconds([&] {
        index.emplace(NnIndex::build(league.space, team, target, league.weights,
                                     config.block_size, index_dir));
      });
      index->reset_query_io();
      auto rtc = rtc_star_rank(team, target, league.space, league.weights, *index, config.top_k);

      row.io["bf_blocks_read"] = bf_io.snapshot().blocks_read;
      row.io["rtcstar_query_blocks_read"] = index->query_io().snapshot().blocks_read;
      std::uint64_t busiest = 0;
      for (std::size_t p = 0; p < index->partitions(); ++p) {
        const std::uint64_t reads = index->partition_blocks_read(p);
        row.io["rtcstar_query_blocks_read_p" + std::to_string(p)] = reads;
        busiest = std::max(busiest, reads);
      }
      row.io["rtcstar_query_blocks_read_max_partition"] = busiest;
      row.io["rtcstar_build_blocks_written"] = index->build_io().snapshot().blocks_written;

      row.timing["bf_query_seconds"] = timed_median(runs, 1, [&] {
        brute_force_rank(team, target, league.space, league.weights, config.top_k,
                         {config.block_size, nullptr});
      });
      row.timing["rtcstar_query_seconds"] = timed_median(runs, repeats, [&] {
        rtc_star_rank(team, target, league.space, league.weights, *index, config.top_k);
      });

      row.distance_after = bf.empty() ? row.distance_before : bf.front().new_distance;
      row.recommendations[kMethodBruteForce] = std::move(bf);
      row.recommendations[kMethodRtcStar] = std::move(rtc);

      if (!config.keep_index) {
        for (std::size_t p = 0; p < index->partitions(); ++p) {
          std::error_code ec;
          std::filesystem::remove(index->partition_path(p), ec);
        }
      }

      for (const auto& [name, value] : row.io) report.io[name] += value;
      for (const auto& [name, value] : row.timing) report.timing[name] += value;
      report.rows.push_back(std::move(row));
    } catch (const Error& e) {
      throw Error(e.code(), "team " + team_id + ": " + e.message());
    }
  }
  return report;
}

}  // namespace teamrank
