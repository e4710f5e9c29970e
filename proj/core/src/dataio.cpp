#include "teamrank/dataio.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "teamrank/csv.hpp"
#include "teamrank/error.hpp"

namespace teamrank {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::size_t require_column(const csv::Table& table, const std::string& name) {
  const std::size_t col = table.column(name);
  if (col == csv::Table::npos) {
    throw Error(ErrorCode::kMissingColumn, "column '" + name + "' not found in header");
  }
  return col;
}

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error(ErrorCode::kMalformedRow, "row at line " + std::to_string(line) + ": " + why);
}

double number_field(const csv::Table& table, std::size_t row, std::size_t col) {
  double value = 0.0;
  const std::string& text = table.rows[row][col];
  if (!csv::parse_double(text, value) || !std::isfinite(value)) {
    malformed(table.line_numbers[row],
              "column '" + table.header[col] + "' is not a finite number: '" + text + "'");
  }
  return value;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void validate(const NbDimension& dim) {
  if (!(dim.r > 0.0) || !std::isfinite(dim.r) || !(dim.p > 0.0) || !(dim.p < 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "negative binomial '" + dim.name + "' needs r > 0 and 0 < p < 1");
  }
}

// One gamma-Poisson draw: rate ~ Gamma(r, (1-p)/p), value ~ Poisson(rate).
template <typename Rng>
double draw_nb(std::gamma_distribution<double>& gamma, Rng& rng) {
  const double rate = gamma(rng);
  if (!(rate > 0.0)) return 0.0;
  std::poisson_distribution<long long> poisson(rate);
  return static_cast<double>(poisson(rng));
}

}  // namespace

DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest manifest;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "manifest line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key == "attributes") {
      manifest.attributes = split_list(value);
    } else if (key == "id_column") {
      manifest.id_column = value;
    } else if (key == "label_column") {
      manifest.label_column = value;
    } else if (key == "lambda_column") {
      manifest.lambda_column = value;
    } else if (key == "team_column") {
      manifest.team_column = value;
    } else if (key == "team_id_column") {
      manifest.team_id_column = value;
    } else if (key == "wins_column") {
      manifest.wins_column = value;
    } else if (key == "rows") {
      unsigned long long rows = 0;
      if (!csv::parse_u64(value, rows)) {
        throw Error(ErrorCode::kInvalidArgument, "manifest 'rows' must be a non-negative integer");
      }
      manifest.rows = static_cast<std::size_t>(rows);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown manifest key '" + key + "'");
    }
  }
  if (manifest.attributes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "manifest lists no attributes");
  }
  return manifest;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(csv::slurp(path));
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::string out = "attributes = ";
  for (std::size_t i = 0; i < manifest.attributes.size(); ++i) {
    if (i > 0) out += ",";
    out += manifest.attributes[i];
  }
  out += "\nid_column = " + manifest.id_column + "\n";
  if (!manifest.label_column.empty()) out += "label_column = " + manifest.label_column + "\n";
  out += "lambda_column = " + manifest.lambda_column + "\n";
  if (!manifest.team_column.empty()) out += "team_column = " + manifest.team_column + "\n";
  out += "team_id_column = " + manifest.team_id_column + "\n";
  out += "wins_column = " + manifest.wins_column + "\n";
  if (manifest.rows) out += "rows = " + std::to_string(*manifest.rows) + "\n";
  return out;
}

ObjectSpace parse_objects(std::string_view csv_text, const DatasetManifest& manifest) {
  const csv::Table table = csv::parse(csv_text);
  const std::size_t id_col = require_column(table, manifest.id_column);
  const std::size_t label_col = require_column(table, manifest.effective_label_column());
  const std::size_t lambda_col = require_column(table, manifest.lambda_column);
  std::vector<std::size_t> attr_cols;
  for (const auto& name : manifest.attributes) attr_cols.push_back(require_column(table, name));

  if (table.rows.empty()) throw Error(ErrorCode::kEmptyFile, "no data rows");
  if (manifest.rows && *manifest.rows != table.rows.size()) {
    throw Error(ErrorCode::kInvalidArgument, "manifest expects " + std::to_string(*manifest.rows) +
                                                 " rows, file has " + std::to_string(table.rows.size()));
  }

  std::vector<ObjectRecord> records;
  records.reserve(table.rows.size());
  std::map<ObjectId, std::size_t> seen;
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    ObjectRecord rec;
    unsigned long long id = 0;
    if (!csv::parse_u64(table.rows[row][id_col], id)) {
      malformed(table.line_numbers[row], "id '" + table.rows[row][id_col] + "' is not an unsigned integer");
    }
    rec.id = id;
    if (auto [it, inserted] = seen.emplace(rec.id, table.line_numbers[row]); !inserted) {
      malformed(table.line_numbers[row],
                "duplicate id " + std::to_string(id) + " (first at line " + std::to_string(it->second) + ")");
    }
    rec.label = table.rows[row][label_col];
    rec.lambda = number_field(table, row, lambda_col);
    if (!(rec.lambda > 0.0)) {
      malformed(table.line_numbers[row], "lambda must be positive, got " + table.rows[row][lambda_col]);
    }
    rec.attrs.reserve(attr_cols.size());
    for (std::size_t col : attr_cols) rec.attrs.push_back(number_field(table, row, col));
    records.push_back(std::move(rec));
  }
  return ObjectSpace(manifest.attributes, std::move(records));
}

ObjectSpace load_objects(const std::filesystem::path& path, const DatasetManifest& manifest) {
  try {
    return parse_objects(csv::slurp(path), manifest);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoError) throw;
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

Rosters load_rosters(const std::filesystem::path& path, const DatasetManifest& manifest) {
  if (manifest.team_column.empty()) {
    throw Error(ErrorCode::kMissingColumn, "manifest has no team_column for rosters");
  }
  const csv::Table table = csv::read(path);
  const std::size_t id_col = require_column(table, manifest.id_column);
  const std::size_t team_col = require_column(table, manifest.team_column);
  Rosters rosters;
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    unsigned long long id = 0;
    if (!csv::parse_u64(table.rows[row][id_col], id)) {
      malformed(table.line_numbers[row], "id is not an unsigned integer");
    }
    rosters[table.rows[row][team_col]].push_back(id);
  }
  return rosters;
}

std::vector<std::string> TeamTable::standings() const {
  std::vector<std::size_t> order(teams.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (wins[a] != wins[b]) return wins[a] > wins[b];
    return teams[a].team_id < teams[b].team_id;
  });
  std::vector<std::string> out;
  for (std::size_t i : order) out.push_back(teams[i].team_id);
  return out;
}

const TargetContext* TeamTable::find(std::string_view team_id) const noexcept {
  for (const auto& t : teams) {
    if (t.team_id == team_id) return &t;
  }
  return nullptr;
}

TeamTable parse_teams(std::string_view csv_text, const DatasetManifest& manifest) {
  const csv::Table table = csv::parse(csv_text);
  const std::size_t id_col = require_column(table, manifest.team_id_column);
  const std::size_t wins_col = require_column(table, manifest.wins_column);
  std::vector<std::size_t> attr_cols;
  for (const auto& name : manifest.attributes) attr_cols.push_back(require_column(table, name));
  if (table.rows.empty()) throw Error(ErrorCode::kEmptyFile, "no data rows");

  TeamTable out;
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    TargetContext team;
    team.team_id = table.rows[row][id_col];
    if (team.team_id.empty()) malformed(table.line_numbers[row], "empty team id");
    if (out.find(team.team_id) != nullptr) {
      malformed(table.line_numbers[row], "duplicate team id '" + team.team_id + "'");
    }
    for (std::size_t col : attr_cols) team.aggregate.push_back(number_field(table, row, col));
    out.wins.push_back(number_field(table, row, wins_col));
    out.teams.push_back(std::move(team));
  }
  return out;
}

TeamTable load_teams(const std::filesystem::path& path, const DatasetManifest& manifest) {
  try {
    return parse_teams(csv::slurp(path), manifest);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoError) throw;
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

std::string format_objects(const ObjectSpace& space, const DatasetManifest& manifest) {
  detail::require_dimension(space.dimension(), manifest.attributes.size(), "manifest attributes");
  std::string out = csv::escape(manifest.id_column);
  const bool separate_label = manifest.effective_label_column() != manifest.id_column;
  if (separate_label) out += "," + csv::escape(manifest.label_column);
  out += "," + csv::escape(manifest.lambda_column);
  for (const auto& name : manifest.attributes) out += "," + csv::escape(name);
  out += "\n";
  for (const ObjectRecord& rec : space.records()) {
    out += std::to_string(rec.id);
    if (separate_label) out += "," + csv::escape(rec.label);
    out += "," + csv::format_double(rec.lambda);
    for (double v : rec.attrs) out += "," + csv::format_double(v);
    out += "\n";
  }
  return out;
}

void save_objects(const ObjectSpace& space, const DatasetManifest& manifest,
                  const std::filesystem::path& path) {
  const std::string text = format_objects(space, manifest);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

std::vector<NbDimension> default_nb_params() {
  return {
      {"FG", 1.44, 0.008},  {"TRB", 1.62, 0.008}, {"BLK", 0.91, 0.004},
      {"DRB", 1.67, 0.01},  {"FT", 1.07, 0.013},  {"STL", 1.70, 0.045},
      {"FTA", 1.16, 0.01},  {"PTS", 1.40, 0.003}, {"AST", 0.93, 0.0092},
  };
}

std::vector<NbDimension> parse_nb_params(std::string_view csv_text) {
  const csv::Table table = csv::parse(csv_text);
  const std::size_t name_col = require_column(table, "dimension");
  const std::size_t r_col = require_column(table, "r");
  const std::size_t p_col = require_column(table, "p");
  std::vector<NbDimension> out;
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    NbDimension dim{table.rows[row][name_col], number_field(table, row, r_col),
                    number_field(table, row, p_col)};
    validate(dim);
    out.push_back(std::move(dim));
  }
  if (out.empty()) throw Error(ErrorCode::kEmptyFile, "no parameter rows");
  return out;
}

std::uint64_t shard_seed(std::uint64_t master_seed, std::uint64_t shard) noexcept {
  return splitmix64(splitmix64(master_seed) ^ (shard * 0xd1b54a32d192ed03ULL));
}

ObjectSpace gen_synthetic(std::span<const NbDimension> params, const SyntheticOptions& options) {
  if (params.empty()) throw Error(ErrorCode::kInvalidParams, "no dimensions to generate");
  for (const auto& dim : params) validate(dim);
  if (options.count == 0) throw Error(ErrorCode::kInvalidArgument, "count must be at least 1");
  if (!(options.lambda_min > 0.0) || !(options.lambda_max >= options.lambda_min)) {
    throw Error(ErrorCode::kInvalidParams, "lambda range must be positive and ordered");
  }

  const std::size_t d = params.size();
  std::vector<ObjectRecord> records(options.count);
  const std::size_t shards = (options.count + kShardSize - 1) / kShardSize;

  auto fill_shard = [&](std::size_t shard) {
    std::mt19937_64 rng(shard_seed(options.seed, shard));
    std::uniform_real_distribution<double> lambda_dist(options.lambda_min, options.lambda_max);
    std::vector<std::gamma_distribution<double>> gammas;
    gammas.reserve(d);
    for (const auto& dim : params) gammas.emplace_back(dim.r, (1.0 - dim.p) / dim.p);

    const std::size_t first = shard * kShardSize;
    const std::size_t last = std::min(options.count, first + kShardSize);
    for (std::size_t k = first; k < last; ++k) {
      ObjectRecord& rec = records[k];
      rec.id = k + 1;
      rec.label = "syn-" + std::to_string(k + 1);
      rec.lambda = options.lambda_min == options.lambda_max ? options.lambda_min : lambda_dist(rng);
      rec.attrs.resize(d);
      for (std::size_t i = 0; i < d; ++i) rec.attrs[i] = draw_nb(gammas[i], rng);
    }
  };

  std::size_t threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::clamp<std::size_t>(threads, 1, shards);
  if (threads == 1) {
    for (std::size_t s = 0; s < shards; ++s) fill_shard(s);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t s = t; s < shards; s += threads) fill_shard(s);
      });
    }
  }

  std::vector<std::string> names;
  for (const auto& dim : params) names.push_back(dim.name);
  return ObjectSpace(std::move(names), std::move(records));
}

std::vector<double> sample_nb(const NbDimension& params, std::size_t count, std::uint64_t seed) {
  validate(params);
  std::mt19937_64 rng(shard_seed(seed, 0));
  std::gamma_distribution<double> gamma(params.r, (1.0 - params.p) / params.p);
  std::vector<double> out(count);
  for (double& v : out) v = draw_nb(gamma, rng);
  return out;
}

double nb_log_pmf(std::uint64_t k, double r, double p) noexcept {
  const double kd = static_cast<double>(k);
  return std::lgamma(kd + r) - std::lgamma(r) - std::lgamma(kd + 1.0) + r * std::log(p) +
         kd * std::log1p(-p);
}

double chi_square_statistic(std::span<const double> observed, std::span<const double> expected) {
  detail::require_dimension(observed.size(), expected.size(), "expected counts");
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "expected counts must be positive");
    }
    const double delta = observed[i] - expected[i];
    stat += delta * delta / expected[i];
  }
  return stat;
}

GofResult chi_square_gof(std::span<const double> samples, double r, double p, double alpha) {
  if (samples.size() < 50) {
    throw Error(ErrorCode::kInsufficientData, "goodness of fit needs at least 50 samples");
  }
  validate(NbDimension{"gof", r, p});
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  }

  constexpr double kMinExpected = 5.0;
  const double n = static_cast<double>(samples.size());
  GofResult result;
  double pending = 0.0, cdf = 0.0;
  std::uint64_t lo = 0;
  // Hard stop far in the tail in case the pmf underflows before the tail mass does.
  const double mean = r * (1.0 - p) / p;
  const double sd = std::sqrt(r * (1.0 - p)) / p;
  const auto limit = static_cast<std::uint64_t>(mean + 60.0 * sd + 1000.0);
  for (std::uint64_t k = 0; k <= limit; ++k) {
    const double pk = std::exp(nb_log_pmf(k, r, p));
    pending += pk;
    cdf += pk;
    if (n * pending >= kMinExpected) {
      result.bins.push_back({lo, k, n * pending, 0.0});
      lo = k + 1;
      pending = 0.0;
    }
    if (n * std::max(0.0, 1.0 - cdf) < kMinExpected) break;
  }
  const double tail = n * (pending + std::max(0.0, 1.0 - cdf));
  if (result.bins.empty()) {
    result.bins.push_back({0, 0, tail, 0.0});
  } else {
    result.bins.back().expected += tail;
  }
  result.bins.back().hi = std::numeric_limits<std::uint64_t>::max();
  if (result.bins.size() < 2) {
    throw Error(ErrorCode::kDegenerateBinning, "fewer than two bins with expected count >= 5");
  }

  for (double s : samples) {
    const double k = std::max(0.0, std::round(s));
    auto it = std::upper_bound(result.bins.begin(), result.bins.end(), k,
                               [](double value, const GofBin& bin) {
                                 return value < static_cast<double>(bin.lo);
                               });
    std::prev(it)->observed += 1.0;
  }

  std::vector<double> observed, expected;
  for (const auto& bin : result.bins) {
    observed.push_back(bin.observed);
    expected.push_back(bin.expected);
  }
  result.statistic = chi_square_statistic(observed, expected);
  result.dof = result.bins.size() - 1;
  boost::math::chi_squared dist(static_cast<double>(result.dof));
  result.critical = boost::math::quantile(dist, 1.0 - alpha);
  result.accepted = result.statistic <= result.critical;
  return result;
}

}  // namespace teamrank
