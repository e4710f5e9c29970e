#include "teamrank/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "teamrank/csv.hpp"
#include "teamrank/dataio.hpp"
#include "teamrank/error.hpp"
#include "teamrank/experiment.hpp"
#include "teamrank/nn_index.hpp"
#include "teamrank/ranking.hpp"
#include "teamrank/weighting.hpp"

namespace teamrank {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tabular command result. Cells are JSON scalars so CSV, JSON and the pretty
// renderer all print from the same values.
struct Output {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<ordered_json>> rows;
  ordered_json stats = ordered_json::object();
};

struct Options {
  // dataset
  std::string objects, teams, manifest;
  // team context
  std::string team, members, target, weights;
  std::size_t elite = 10;
  // ranking / index
  std::string method;
  std::size_t block_size = 100;
  std::size_t top_k = 10;
  std::string index_dir;
  // generation
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  std::string params;
  double lambda_min = 500.0, lambda_max = 3000.0;
  std::size_t threads = 0;
  std::size_t league_teams = 0, team_size = 5;
  std::string teams_out, manifest_out;
  // gof
  std::string dimension;
  std::size_t samples = 100000;
  double alpha = 0.05;
  // bench
  std::string config;
  std::vector<std::string> overrides;
  // output
  std::string format = "csv";
  std::string out;
  bool pretty = false;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string cell_text(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return csv::format_double(v.get<double>());
  return v.dump();
}

std::string pretty_text(const ordered_json& v) {
  if (!v.is_number_float()) return cell_text(v);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v.get<double>());
  return buf;
}

std::string render_csv(const Output& o) {
  std::string s;
  for (std::size_t c = 0; c < o.columns.size(); ++c) s += (c ? "," : "") + csv::escape(o.columns[c]);
  s += "\n";
  for (const auto& row : o.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) s += (c ? "," : "") + csv::escape(cell_text(row[c]));
    s += "\n";
  }
  return s;
}

std::string render_json(const Output& o, const std::map<std::string, std::string>& config) {
  ordered_json root;
  root["command"] = o.command;
  root["config"] = config;
  if (!o.stats.empty()) root["stats"] = o.stats;
  ordered_json result = ordered_json::array();
  for (const auto& row : o.rows) {
    ordered_json item = ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) item[o.columns[c]] = row[c];
    result.push_back(std::move(item));
  }
  root["result"] = std::move(result);
  return root.dump(2) + "\n";
}

std::string render_pretty(const Output& o) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back(o.columns);
  for (const auto& row : o.rows) {
    std::vector<std::string> line;
    for (const auto& v : row) line.push_back(pretty_text(v));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(o.columns.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string s;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      std::string field = cells[r][c];
      field.resize(width[c], ' ');
      s += (c ? "  " : "") + field;
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    s += "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w;
      s += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    }
  }
  for (const auto& [key, value] : o.stats.items()) s += key + ": " + cell_text(value) + "\n";
  return s;
}

// Every option of the invoked subcommand, with its effective value.
std::map<std::string, std::string> echo(const CLI::App& app) {
  std::map<std::string, std::string> out;
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help") continue;
    if (opt->get_expected_min() == 0) {
      out[name] = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      std::string joined;
      for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
      out[name] = joined;
    } else {
      out[name] = opt->get_default_str();
    }
  }
  return out;
}

void write_text(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  file.flush();
  if (!file) throw Error(ErrorCode::kIoError, "cannot write " + o.out);
}

void emit(const Options& o, const CLI::App& app, std::ostream& out, const Output& result) {
  if (o.pretty) return write_text(o, out, render_pretty(result));
  write_text(o, out, o.format == "json" ? render_json(result, echo(app)) : render_csv(result));
}

// ---------------------------------------------------------------------------
// Dataset plumbing shared by the league-level subcommands.

struct Loaded {
  DatasetManifest manifest;
  std::optional<ObjectSpace> space;
  std::optional<TeamTable> table;
  Rosters rosters;
};

Loaded load(const Options& o, bool need_objects, bool need_teams) {
  if (o.manifest.empty()) throw UsageError("--manifest is required");
  Loaded l{read_manifest(o.manifest), std::nullopt, std::nullopt, {}};
  if (need_objects && o.objects.empty()) throw UsageError("--objects is required");
  if (need_teams && o.teams.empty()) throw UsageError("--teams is required");
  if (!o.objects.empty()) {
    l.space.emplace(load_objects(o.objects, l.manifest));
    if (!l.manifest.team_column.empty()) l.rosters = load_rosters(o.objects, l.manifest);
  }
  if (!o.teams.empty()) l.table.emplace(load_teams(o.teams, l.manifest));
  return l;
}

WeightResult resolve_weights(const Options& o, const Loaded& l, std::size_t d) {
  if (!o.weights.empty()) {
    std::vector<double> w;
    for (const auto& item : split_list(o.weights)) {
      double v = 0;
      if (!csv::parse_double(item, v)) throw UsageError("--weights entry '" + item + "' is not a number");
      w.push_back(v);
    }
    detail::require_dimension(d, w.size(), "--weights");
    return WeightResult{WeightVector(std::move(w)), {}};
  }
  if (!l.table) throw UsageError("weights need --teams or --weights");
  std::vector<AttributeVector> stats;
  for (const auto& t : l.table->teams) stats.push_back(t.aggregate);
  return compute_weights(stats, l.table->wins);
}

TeamContext resolve_team(const Options& o, const Loaded& l) {
  if (o.team.empty() == o.members.empty()) throw UsageError("give exactly one of --team or --members");
  std::vector<ObjectId> ids;
  if (!o.members.empty()) {
    for (const auto& item : split_list(o.members)) {
      unsigned long long id = 0;
      if (!csv::parse_u64(item, id)) throw UsageError("--members entry '" + item + "' is not an id");
      ids.push_back(id);
    }
  } else {
    if (l.manifest.team_column.empty()) {
      throw Error(ErrorCode::kMissingColumn, "--team needs team_column in the manifest");
    }
    auto it = l.rosters.find(o.team);
    if (it == l.rosters.end()) throw Error(ErrorCode::kInvalidArgument, "no roster for team '" + o.team + "'");
    ids = it->second;
  }
  return make_team(*l.space, ids);
}

struct Context {
  TeamContext team;
  TargetContext target;
  WeightVector weights;
  double distance_before;
};

Context resolve_context(const Options& o, const Loaded& l) {
  TeamContext team = resolve_team(o, l);
  WeightVector w = resolve_weights(o, l, l.space->dimension()).weights;
  if (!l.table) throw UsageError("--teams is required to resolve a target");
  TargetContext target;
  if (!o.target.empty()) {
    const TargetContext* t = l.table->find(o.target);
    if (t == nullptr) throw Error(ErrorCode::kInvalidArgument, "unknown target team '" + o.target + "'");
    target = *t;
  } else {
    if (o.team.empty()) throw UsageError("automatic target selection needs --team; otherwise pass --target");
    const auto elite = elite_teams(*l.table, o.elite, o.team);
    target = *l.table->find(select_target(team, o.team, elite, w).target_id);
  }
  const double before = team_distance(team, target, w);
  return Context{std::move(team), std::move(target), std::move(w), before};
}

// ---------------------------------------------------------------------------
// Subcommands.

Output cmd_ingest(const Options& o) {
  const Loaded l = load(o, true, false);
  const ObjectSpace& space = *l.space;
  Output out{"ingest", {"attribute", "min", "max", "mean"}, {}, {}};
  auto summarize = [&](const std::string& name, auto value_of) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (const auto& rec : space.records()) {
      const double v = value_of(rec);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    out.rows.push_back({name, lo, hi, sum / static_cast<double>(space.size())});
  };
  summarize(l.manifest.lambda_column, [](const ObjectRecord& r) { return r.lambda; });
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    summarize(space.attribute_names()[i], [i](const ObjectRecord& r) { return r.attrs[i]; });
  }
  out.stats["objects"] = space.size();
  out.stats["dimension"] = space.dimension();
  out.stats["rosters"] = l.rosters.size();
  if (l.table) out.stats["teams"] = l.table->teams.size();
  return out;
}

Output cmd_weights(const Options& o) {
  const Loaded l = load(o, false, true);
  std::vector<AttributeVector> stats;
  for (const auto& t : l.table->teams) stats.push_back(t.aggregate);
  const WeightResult r = compute_weights(stats, l.table->wins);
  Output out{"weights", {"attribute", "tau", "weight", "floored"}, {}, {}};
  for (std::size_t i = 0; i < l.manifest.attributes.size(); ++i) {
    std::vector<double> column;
    for (const auto& t : l.table->teams) column.push_back(t.aggregate[i]);
    const bool floored = std::find(r.floored_dimensions.begin(), r.floored_dimensions.end(), i) !=
                         r.floored_dimensions.end();
    out.rows.push_back({l.manifest.attributes[i], kendall_tau(column, l.table->wins), r.weights[i], floored});
  }
  out.stats["teams"] = l.table->teams.size();
  return out;
}

Output cmd_target(const Options& o) {
  const Loaded l = load(o, true, true);
  if (o.team.empty()) throw UsageError("--team is required");
  const TeamContext team = resolve_team(o, l);
  const WeightVector w = resolve_weights(o, l, l.space->dimension()).weights;
  const auto elite = elite_teams(*l.table, o.elite, o.team);
  const TargetSelection chosen = select_target(team, o.team, elite, w);
  Output out{"target", {"team", "candidate", "distance", "selected"}, {}, {}};
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& t : elite) ranked.emplace_back(team_distance(team, t, w), t.team_id);
  std::sort(ranked.begin(), ranked.end());
  for (const auto& [d, id] : ranked) out.rows.push_back({o.team, id, d, id == chosen.target_id});
  out.stats["target"] = chosen.target_id;
  out.stats["distance"] = chosen.distance;
  return out;
}

Output cmd_index_build(const Options& o) {
  if (o.index_dir.empty()) throw UsageError("--index-dir is required");
  if (o.block_size == 0) throw UsageError("--block-size must be positive");
  const Loaded l = load(o, true, false);
  const Context c = resolve_context(o, l);
  const NnIndex index = NnIndex::build(*l.space, c.team, c.target, c.weights, o.block_size, o.index_dir);
  Output out{"index build", {"partition", "member_id", "entries", "blocks", "path"}, {}, {}};
  for (std::size_t p = 0; p < index.partitions(); ++p) {
    out.rows.push_back({p, index.member_id(p), index.size(), index.blocks_per_partition(),
                        index.partition_path(p).string()});
  }
  out.stats["fingerprint"] = fingerprint_hex(index.fingerprint());
  out.stats["target"] = c.target.team_id;
  out.stats["blocks_written"] = index.build_io().snapshot().blocks_written;
  return out;
}

Output cmd_rank(const Options& o) {
  if (o.block_size == 0 || o.top_k == 0) throw UsageError("--block-size and --top-k must be positive");
  const Loaded l = load(o, true, false);
  const Context c = resolve_context(o, l);
  std::vector<SwapRecommendation> recs;
  std::uint64_t blocks_read = 0;
  ordered_json member_reads;
  if (o.method == kMethodBruteForce) {
    IoStats io;
    recs = brute_force_rank(c.team, c.target, *l.space, c.weights, o.top_k, {o.block_size, &io});
    blocks_read = io.snapshot().blocks_read;
  } else {
    const bool scratch = o.index_dir.empty();
    const fs::path dir = scratch ? fs::temp_directory_path() / "teamrank-cli-index" : fs::path(o.index_dir);
    const auto fp = index_fingerprint(*l.space, c.team, c.target, c.weights);
    std::optional<NnIndex> index;
    if (!scratch && NnIndex::exists(dir, fp)) index.emplace(NnIndex::open(dir, fp));
    if (index && index->block_size() != o.block_size) index.reset();
    if (!index) index.emplace(NnIndex::build(*l.space, c.team, c.target, c.weights, o.block_size, dir));
    index->reset_query_io();
    recs = rtc_star_rank(c.team, c.target, *l.space, c.weights, *index, o.top_k);
    blocks_read = index->query_io().snapshot().blocks_read;
    ordered_json per_member = ordered_json::object();
    for (std::size_t p = 0; p < index->partitions(); ++p) {
      per_member[std::to_string(index->member_id(p))] = index->partition_blocks_read(p);
    }
    member_reads = std::move(per_member);
    if (scratch) {
      for (std::size_t p = 0; p < index->partitions(); ++p) {
        std::error_code ec;
        fs::remove(index->partition_path(p), ec);
      }
    }
  }
  Output out{"rank",
             {"rank", "swap_out_id", "swap_out_label", "swap_in_id", "swap_in_label", "new_distance", "odis"},
             {},
             {}};
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    out.rows.push_back({i + 1, r.swap_out_id, l.space->at(r.swap_out_id).label, r.swap_in_id,
                        l.space->at(r.swap_in_id).label, r.new_distance, r.odis});
  }
  out.stats["target"] = c.target.team_id;
  out.stats["distance_before"] = c.distance_before;
  out.stats["blocks_read"] = blocks_read;
  if (!member_reads.is_null()) out.stats["blocks_read_per_member"] = std::move(member_reads);
  return out;
}

std::vector<NbDimension> nb_params(const Options& o) {
  return o.params.empty() ? default_nb_params() : parse_nb_params(csv::slurp(o.params));
}

Output cmd_gen(const Options& o) {
  const std::vector<NbDimension> params = nb_params(o);
  SyntheticOptions opts;
  opts.count = o.count;
  opts.seed = o.seed;
  opts.lambda_min = o.lambda_min;
  opts.lambda_max = o.lambda_max;
  opts.threads = o.threads;
  ObjectSpace space = gen_synthetic(params, opts);

  DatasetManifest manifest;
  for (const auto& p : params) manifest.attributes.push_back(p.name);
  manifest.id_column = "id";
  manifest.label_column = "label";
  manifest.lambda_column = "lambda";
  manifest.team_id_column = "team";
  manifest.wins_column = "wins";

  std::optional<League> league;
  std::map<ObjectId, std::string> team_of;
  if (o.league_teams > 0) {
    manifest.team_column = "team";
    league.emplace(synthetic_league(std::move(space), o.league_teams, o.team_size));
    for (const auto& [team, ids] : league->rosters) {
      for (ObjectId id : ids) team_of[id] = team;
    }
  } else if (!o.teams_out.empty()) {
    throw UsageError("--teams-out needs --league-teams");
  }
  const ObjectSpace& objects = league ? league->space : space;

  Output out{"gen", {"id", "label", "lambda"}, {}, {}};
  if (league) out.columns.push_back("team");
  for (const auto& name : manifest.attributes) out.columns.push_back(name);
  out.rows.reserve(objects.size());
  for (const auto& rec : objects.records()) {
    std::vector<ordered_json> row{rec.id, rec.label, rec.lambda};
    if (league) {
      auto it = team_of.find(rec.id);
      row.push_back(it == team_of.end() ? std::string() : it->second);
    }
    for (double v : rec.attrs) row.push_back(v);
    out.rows.push_back(std::move(row));
  }

  if (league && !o.teams_out.empty()) {
    Output teams{"gen", {"team", "wins"}, {}, {}};
    for (const auto& name : manifest.attributes) teams.columns.push_back(name);
    for (std::size_t t = 0; t < league->table.teams.size(); ++t) {
      std::vector<ordered_json> row{league->table.teams[t].team_id, league->table.wins[t]};
      for (double v : league->table.teams[t].aggregate) row.push_back(v);
      teams.rows.push_back(std::move(row));
    }
    Options sink;
    sink.out = o.teams_out;
    write_text(sink, std::cout, render_csv(teams));
  }
  if (!o.manifest_out.empty()) {
    Options sink;
    sink.out = o.manifest_out;
    write_text(sink, std::cout, format_manifest(manifest));
  }
  out.stats["objects"] = objects.size();
  return out;
}

Output cmd_gof(const Options& o) {
  std::vector<NbDimension> params = nb_params(o);
  if (!o.dimension.empty()) {
    std::erase_if(params, [&](const NbDimension& p) { return p.name != o.dimension; });
    if (params.empty()) throw Error(ErrorCode::kInvalidArgument, "no parameters for dimension '" + o.dimension + "'");
  }
  std::optional<Loaded> data;
  if (!o.objects.empty()) data.emplace(load(o, true, false));

  Output out{"gof",
             {"dimension", "r", "p", "samples", "mean", "expected_mean", "variance", "expected_variance",
              "statistic", "dof", "critical", "accepted"},
             {},
             {}};
  for (std::size_t k = 0; k < params.size(); ++k) {
    const NbDimension& dim = params[k];
    std::vector<double> values;
    if (data) {
      const auto& names = data->space->attribute_names();
      const auto it = std::find(names.begin(), names.end(), dim.name);
      if (it == names.end()) continue;
      const std::size_t col = static_cast<std::size_t>(it - names.begin());
      for (const auto& rec : data->space->records()) values.push_back(rec.attrs[col]);
    } else {
      values = sample_nb(dim, o.samples, shard_seed(o.seed, k));
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= std::max(n - 1.0, 1.0);
    const GofResult g = chi_square_gof(values, dim.r, dim.p, o.alpha);
    out.rows.push_back({dim.name, dim.r, dim.p, values.size(), mean, dim.mean(), var, dim.variance(),
                        g.statistic, g.dof, g.critical, g.accepted});
  }
  if (out.rows.empty()) throw Error(ErrorCode::kMissingColumn, "no parameter dimension matches the data");
  return out;
}

std::string cmd_bench(const Options& o, bool pretty) {
  std::string text = o.config.empty() ? std::string() : csv::slurp(o.config);
  for (const auto& kv : o.overrides) text += "\n" + kv;
  const ExperimentConfig config = parse_experiment_config(text);
  const ExperimentReport report = run_experiment(config);
  if (!pretty) return format_report(report, o.format == "json" ? ReportFormat::kJson : ReportFormat::kCsv);

  Output out{"bench",
             {"team", "target", "before", "after", "bf_blocks", "rtcstar_blocks", "bf_seconds", "rtcstar_seconds"},
             {},
             {}};
  for (const auto& row : report.rows) {
    out.rows.push_back({row.team, row.target, row.distance_before, row.distance_after,
                        row.io.at("bf_blocks_read"), row.io.at("rtcstar_query_blocks_read"),
                        row.timing.at("bf_query_seconds"), row.timing.at("rtcstar_query_seconds")});
  }
  return render_pretty(out);
}

void add_dataset(CLI::App* app, Options& o, bool objects = true, bool teams = true) {
  app->add_option("--manifest", o.manifest, "column contract (key = value file)");
  if (objects) app->add_option("--objects", o.objects, "object CSV");
  if (teams) app->add_option("--teams", o.teams, "team CSV with aggregates and wins");
}

void add_context(CLI::App* app, Options& o) {
  app->add_option("--team", o.team, "team id from the roster column");
  app->add_option("--members", o.members, "comma-separated member ids instead of --team");
  app->add_option("--target", o.target, "target team id (default: closest elite team)");
  app->add_option("--elite", o.elite, "elite set size for target selection")->capture_default_str();
  app->add_option("--weights", o.weights, "comma-separated weights instead of learning them");
}

void add_output(CLI::App* app, Options& o, bool json = true) {
  if (json) {
    app->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  }
  app->add_option("--out", o.out, "write results here instead of standard output");
  app->add_flag("--pretty", o.pretty, "human-readable table");
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Ranking swap candidates for a team against a target team", "teamrank"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "load a dataset and summarize it");
  add_dataset(ingest, o);
  add_output(ingest, o);

  auto* weights = app.add_subcommand("weights", "per-attribute Kendall tau against wins");
  add_dataset(weights, o, false, true);
  add_output(weights, o);

  auto* target = app.add_subcommand("target", "choose the elite team to approach");
  add_dataset(target, o);
  add_context(target, o);
  add_output(target, o);

  auto* index = app.add_subcommand("index", "nearest-neighbour index maintenance");
  index->require_subcommand(1);
  auto* build = index->add_subcommand("build", "build per-member sorted runs on disk");
  add_dataset(build, o);
  add_context(build, o);
  build->add_option("--index-dir", o.index_dir, "directory for index files");
  build->add_option("--block-size", o.block_size, "records per block")->capture_default_str();
  add_output(build, o);

  auto* rank = app.add_subcommand("rank", "top-k (swap out, swap in) pairs");
  add_dataset(rank, o);
  add_context(rank, o);
  rank->add_option("--method", o.method, "bf or rtcstar")->required()->check(CLI::IsMember({"bf", "rtcstar"}));
  rank->add_option("--top-k", o.top_k, "number of pairs")->capture_default_str();
  rank->add_option("--block-size", o.block_size, "records per block")->capture_default_str();
  rank->add_option("--index-dir", o.index_dir, "reuse or keep the index here (rtcstar)");
  add_output(rank, o);

  auto* gen = app.add_subcommand("gen", "generate a synthetic object CSV");
  gen->add_option("--count", o.count, "objects to generate")->capture_default_str();
  gen->add_option("--seed", o.seed, "master seed")->capture_default_str();
  gen->add_option("--params", o.params, "CSV with dimension,r,p (default: built-in table)");
  gen->add_option("--lambda-min", o.lambda_min)->capture_default_str();
  gen->add_option("--lambda-max", o.lambda_max)->capture_default_str();
  gen->add_option("--threads", o.threads, "0 uses every core; output does not depend on it")
      ->capture_default_str();
  gen->add_option("--league-teams", o.league_teams, "also group objects into this many teams")
      ->capture_default_str();
  gen->add_option("--team-size", o.team_size)->capture_default_str();
  gen->add_option("--teams-out", o.teams_out, "write the league team CSV here");
  gen->add_option("--manifest-out", o.manifest_out, "write a manifest for the generated files here");
  add_output(gen, o);

  auto* gof = app.add_subcommand("gof", "chi-square goodness of fit against negative binomial marginals");
  gof->add_option("--params", o.params, "CSV with dimension,r,p (default: built-in table)");
  gof->add_option("--dimension", o.dimension, "test one dimension only");
  gof->add_option("--samples", o.samples, "draws per dimension when no data is given")->capture_default_str();
  gof->add_option("--seed", o.seed)->capture_default_str();
  gof->add_option("--alpha", o.alpha, "significance level")->capture_default_str();
  add_dataset(gof, o, true, false);
  add_output(gof, o);

  auto* bench = app.add_subcommand("bench", "run the brute-force vs index experiment");
  bench->add_option("--config", o.config, "experiment config file");
  bench->add_option("--set", o.overrides, "extra key=value config lines, applied last");
  add_output(bench, o);

  std::vector<std::string> argv_store{"teamrank"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    auto run = [&](CLI::App* sub, auto fn) { emit(o, *sub, out, fn(o)); };
    if (ingest->parsed()) run(ingest, cmd_ingest);
    else if (weights->parsed()) run(weights, cmd_weights);
    else if (target->parsed()) run(target, cmd_target);
    else if (build->parsed()) run(build, cmd_index_build);
    else if (rank->parsed()) run(rank, cmd_rank);
    else if (gen->parsed()) run(gen, cmd_gen);
    else if (gof->parsed()) run(gof, cmd_gof);
    else if (bench->parsed()) write_text(o, out, cmd_bench(o, o.pretty));
    return kExitOk;
  } catch (const UsageError& e) {
    err << "teamrank: " << e.what() << "\n" << "Run with --help for more information.\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "teamrank: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "teamrank: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace teamrank
