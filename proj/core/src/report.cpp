#include <fstream>
#include <nlohmann/json.hpp>

#include "teamrank/csv.hpp"
#include "teamrank/error.hpp"
#include "teamrank/experiment.hpp"

namespace teamrank {

namespace {

using nlohmann::ordered_json;

ordered_json recommendation_json(const SwapRecommendation& rec) {
  return ordered_json{{"swap_out_id", rec.swap_out_id},
                      {"swap_in_id", rec.swap_in_id},
                      {"new_distance", rec.new_distance},
                      {"odis", rec.odis}};
}

std::string to_json(const ExperimentReport& report) {
  ordered_json root;
  root["schema_version"] = report.schema_version;
  root["config"] = report.config;
  ordered_json rows = ordered_json::array();
  for (const TeamRow& row : report.rows) {
    ordered_json r;
    r["team"] = row.team;
    r["target"] = row.target;
    r["distance_before"] = row.distance_before;
    r["distance_after"] = row.distance_after;
    r["members"] = row.members;
    ordered_json recs = ordered_json::object();
    for (const auto& [method, list] : row.recommendations) {
      ordered_json items = ordered_json::array();
      for (const auto& rec : list) items.push_back(recommendation_json(rec));
      recs[method] = std::move(items);
    }
    r["recommendations"] = std::move(recs);
    r["io"] = row.io;
    r["timing"] = row.timing;
    rows.push_back(std::move(r));
  }
  root["rows"] = std::move(rows);
  root["io"] = report.io;
  root["timing"] = report.timing;
  return root.dump(2) + "\n";
}

ExperimentReport from_json(std::string_view text) {
  try {
    const auto root = nlohmann::json::parse(text);
    ExperimentReport report;
    report.schema_version = root.at("schema_version").get<int>();
    if (report.schema_version != ExperimentReport::kSchemaVersion) {
      throw Error(ErrorCode::kInvalidArgument, "unsupported report schema " +
                                                   std::to_string(report.schema_version));
    }
    report.config = root.at("config").get<std::map<std::string, std::string>>();
    for (const auto& r : root.at("rows")) {
      TeamRow row;
      row.team = r.at("team").get<std::string>();
      row.target = r.at("target").get<std::string>();
      row.distance_before = r.at("distance_before").get<double>();
      row.distance_after = r.at("distance_after").get<double>();
      row.members = r.at("members").get<std::size_t>();
      for (const auto& [method, items] : r.at("recommendations").items()) {
        auto& list = row.recommendations[method];
        for (const auto& item : items) {
          list.push_back({item.at("swap_out_id").get<ObjectId>(), item.at("swap_in_id").get<ObjectId>(),
                          item.at("new_distance").get<double>(), item.at("odis").get<double>()});
        }
      }
      row.io = r.at("io").get<std::map<std::string, std::uint64_t>>();
      row.timing = r.at("timing").get<std::map<std::string, double>>();
      report.rows.push_back(std::move(row));
    }
    report.io = root.at("io").get<std::map<std::string, std::uint64_t>>();
    report.timing = root.at("timing").get<std::map<std::string, double>>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed report json: ") + e.what());
  }
}

// Long-format CSV: one value per line, stable ordering.
constexpr const char* kCsvHeader = "kind,team,target,method,rank,swap_out_id,swap_in_id,name,value";

void csv_line(std::string& out, std::string_view kind, std::string_view team, std::string_view target,
              std::string_view method, std::string_view rank, std::string_view out_id,
              std::string_view in_id, std::string_view name, std::string_view value) {
  for (std::string_view field : {kind, team, target, method, rank, out_id, in_id, name}) {
    out += csv::escape(field);
    out += ',';
  }
  out += csv::escape(value);
  out += '\n';
}

std::string to_csv(const ExperimentReport& report) {
  std::string out = std::string(kCsvHeader) + "\n";
  csv_line(out, "schema", "", "", "", "", "", "", "schema_version",
           std::to_string(report.schema_version));
  for (const auto& [key, value] : report.config) csv_line(out, "config", "", "", "", "", "", "", key, value);
  for (const auto& [key, value] : report.io) {
    csv_line(out, "io", "", "", "", "", "", "", key, std::to_string(value));
  }
  for (const auto& [key, value] : report.timing) {
    csv_line(out, "timing", "", "", "", "", "", "", key, csv::format_double(value));
  }
  for (const TeamRow& row : report.rows) {
    auto team_value = [&](std::string_view kind, std::string_view name, const std::string& value) {
      csv_line(out, kind, row.team, row.target, "", "", "", "", name, value);
    };
    team_value("row", "distance_before", csv::format_double(row.distance_before));
    team_value("row", "distance_after", csv::format_double(row.distance_after));
    team_value("row", "members", std::to_string(row.members));
    for (const auto& [key, value] : row.io) team_value("row_io", key, std::to_string(value));
    for (const auto& [key, value] : row.timing) team_value("row_timing", key, csv::format_double(value));
    for (const auto& [method, list] : row.recommendations) {
      // A marker line keeps empty recommendation lists distinguishable from absent ones.
      csv_line(out, "method", row.team, row.target, method, "", "", "", "count",
               std::to_string(list.size()));
      for (std::size_t rank = 0; rank < list.size(); ++rank) {
        const auto& rec = list[rank];
        const std::string r = std::to_string(rank + 1);
        const std::string o = std::to_string(rec.swap_out_id);
        const std::string i = std::to_string(rec.swap_in_id);
        csv_line(out, "rec", row.team, row.target, method, r, o, i, "new_distance",
                 csv::format_double(rec.new_distance));
        csv_line(out, "rec", row.team, row.target, method, r, o, i, "odis",
                 csv::format_double(rec.odis));
      }
    }
  }
  return out;
}

double number(const std::string& text) {
  double v = 0.0;
  if (!csv::parse_double(text, v)) {
    throw Error(ErrorCode::kInvalidArgument, "report value '" + text + "' is not a number");
  }
  return v;
}

std::uint64_t count(const std::string& text) {
  unsigned long long v = 0;
  if (!csv::parse_u64(text, v)) {
    throw Error(ErrorCode::kInvalidArgument, "report value '" + text + "' is not a count");
  }
  return v;
}

ExperimentReport from_csv(std::string_view text) {
  const csv::Table table = csv::parse(text);
  if (table.header.size() != 9) throw Error(ErrorCode::kInvalidArgument, "unexpected report header");
  ExperimentReport report;
  report.schema_version = 0;

  auto row_for = [&](const std::string& team, const std::string& target) -> TeamRow& {
    if (report.rows.empty() || report.rows.back().team != team) {
      TeamRow row;
      row.team = team;
      row.target = target;
      report.rows.push_back(std::move(row));
    }
    return report.rows.back();
  };

  for (const auto& f : table.rows) {
    const std::string& kind = f[0];
    const std::string& name = f[7];
    const std::string& value = f[8];
    if (kind == "schema") {
      report.schema_version = static_cast<int>(count(value));
    } else if (kind == "config") {
      report.config[name] = value;
    } else if (kind == "io") {
      report.io[name] = count(value);
    } else if (kind == "timing") {
      report.timing[name] = number(value);
    } else if (kind == "row") {
      TeamRow& row = row_for(f[1], f[2]);
      if (name == "distance_before") row.distance_before = number(value);
      else if (name == "distance_after") row.distance_after = number(value);
      else if (name == "members") row.members = count(value);
    } else if (kind == "row_io") {
      row_for(f[1], f[2]).io[name] = count(value);
    } else if (kind == "row_timing") {
      row_for(f[1], f[2]).timing[name] = number(value);
    } else if (kind == "method") {
      row_for(f[1], f[2]).recommendations[f[3]];
    } else if (kind == "rec") {
      auto& list = row_for(f[1], f[2]).recommendations[f[3]];
      const std::size_t rank = count(f[4]);
      if (list.size() < rank) list.resize(rank);
      SwapRecommendation& rec = list[rank - 1];
      rec.swap_out_id = count(f[5]);
      rec.swap_in_id = count(f[6]);
      if (name == "new_distance") rec.new_distance = number(value);
      else if (name == "odis") rec.odis = number(value);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown report line kind '" + kind + "'");
    }
  }
  if (report.schema_version != ExperimentReport::kSchemaVersion) {
    throw Error(ErrorCode::kInvalidArgument, "unsupported report schema");
  }
  return report;
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  return std::nullopt;
}

std::string format_report(const ExperimentReport& report, ReportFormat format) {
  return format == ReportFormat::kJson ? to_json(report) : to_csv(report);
}

ExperimentReport parse_report(std::string_view text, ReportFormat format) {
  return format == ReportFormat::kJson ? from_json(text) : from_csv(text);
}

void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  const std::string text = format_report(report, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "cannot write report to " + path.string());
}

}  // namespace teamrank
