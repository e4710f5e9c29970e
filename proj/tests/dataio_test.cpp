#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "teamrank/csv.hpp"
#include "teamrank/dataio.hpp"
#include "teamrank/error.hpp"

namespace teamrank {
namespace {

namespace fs = std::filesystem;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no teamrank::Error thrown";
  return ErrorCode::kInvalidArgument;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

DatasetManifest basic_manifest() {
  return parse_manifest(
      "# players\n"
      "attributes = PTS, AST\n"
      "id_column = Rk\n"
      "label_column = Player\n"
      "lambda_column = MP\n"
      "team_column = Tm\n"
      "team_id_column = Team\n"
      "wins_column = W\n");
}

constexpr const char* kPlayers =
    "Rk,Player,Tm,MP,PTS,AST,Extra\n"
    "1,\"Smith, J\",ATL,2000,1200,300,x\n"
    "2,Doe,ATL,1500,800,150,y\n"
    "3,Roe,HOU,1800,900,400,z\n";

TEST(Csv, QuotingAndLineNumbers) {
  const csv::Table t = csv::parse("a,b\n\"x,1\",\"he said \"\"hi\"\"\"\n\"multi\nline\",2\n3,4\n");
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0][0], "x,1");
  EXPECT_EQ(t.rows[0][1], "he said \"hi\"");
  EXPECT_EQ(t.rows[1][0], "multi\nline");
  EXPECT_EQ(t.line_numbers, (std::vector<std::size_t>{2, 3, 5}));
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_EQ(t.column("zz"), csv::Table::npos);
}

TEST(Csv, Errors) {
  EXPECT_EQ(code_of([] { csv::parse(""); }), ErrorCode::kEmptyFile);
  EXPECT_EQ(code_of([] { csv::parse("a,b\n1\n"); }), ErrorCode::kMalformedRow);
  EXPECT_EQ(code_of([] { csv::parse("a,b\n\"1,2\n"); }), ErrorCode::kMalformedRow);
}

TEST(Csv, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, -2.5, 0.0}) {
    double back = 0;
    ASSERT_TRUE(csv::parse_double(csv::format_double(v), back));
    EXPECT_EQ(back, v);
  }
  double d = 0;
  EXPECT_FALSE(csv::parse_double("1.5x", d));
  EXPECT_FALSE(csv::parse_double("", d));
  unsigned long long u = 0;
  EXPECT_TRUE(csv::parse_u64("42", u));
  EXPECT_EQ(u, 42u);
  EXPECT_FALSE(csv::parse_u64("-1", u));
  EXPECT_EQ(csv::escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::escape("plain"), "plain");
}

TEST(Manifest, ParseAndFormatRoundTrip) {
  const DatasetManifest m = basic_manifest();
  EXPECT_EQ(m.attributes, (std::vector<std::string>{"PTS", "AST"}));
  EXPECT_EQ(m.id_column, "Rk");
  const DatasetManifest again = parse_manifest(format_manifest(m));
  EXPECT_EQ(again.attributes, m.attributes);
  EXPECT_EQ(again.label_column, m.label_column);
  EXPECT_EQ(again.team_column, m.team_column);
  EXPECT_EQ(again.wins_column, m.wins_column);
}

TEST(Manifest, Errors) {
  EXPECT_EQ(code_of([] { parse_manifest("id_column = x\n"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { parse_manifest("attributes = a\ncolour = red\n"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { parse_manifest("attributes a\n"); }), ErrorCode::kInvalidArgument);
}

TEST(Objects, LoadsSelectedColumns) {
  const ObjectSpace space = parse_objects(kPlayers, basic_manifest());
  ASSERT_EQ(space.size(), 3u);
  EXPECT_EQ(space.dimension(), 2u);
  EXPECT_EQ(space.at(1).label, "Smith, J");
  EXPECT_EQ(space.at(1).lambda, 2000.0);
  EXPECT_EQ(space.at(3).attrs, (AttributeVector{900, 400}));
}

TEST(Objects, MissingColumn) {
  DatasetManifest m = basic_manifest();
  m.attributes.push_back("BLK");
  EXPECT_EQ(code_of([&] { parse_objects(kPlayers, m); }), ErrorCode::kMissingColumn);
}

TEST(Objects, MalformedRowsReportLine) {
  const std::string bad = "Rk,Player,Tm,MP,PTS,AST\n1,a,X,10,1,2\n2,b,X,ten,1,2\n";
  EXPECT_EQ(code_of([&] { parse_objects(bad, basic_manifest()); }), ErrorCode::kMalformedRow);
  EXPECT_NE(message_of([&] { parse_objects(bad, basic_manifest()); }).find("line 3"), std::string::npos);

  const std::string dup = "Rk,Player,Tm,MP,PTS,AST\n1,a,X,10,1,2\n1,b,X,10,1,2\n";
  EXPECT_EQ(code_of([&] { parse_objects(dup, basic_manifest()); }), ErrorCode::kMalformedRow);

  const std::string zero_lambda = "Rk,Player,Tm,MP,PTS,AST\n1,a,X,0,1,2\n";
  EXPECT_EQ(code_of([&] { parse_objects(zero_lambda, basic_manifest()); }), ErrorCode::kMalformedRow);

  EXPECT_EQ(code_of([&] { parse_objects("Rk,Player,Tm,MP,PTS,AST\n", basic_manifest()); }),
            ErrorCode::kEmptyFile);
}

TEST(Objects, RowCountCheck) {
  DatasetManifest m = basic_manifest();
  m.rows = 4;
  EXPECT_EQ(code_of([&] { parse_objects(kPlayers, m); }), ErrorCode::kInvalidArgument);
  m.rows = 3;
  EXPECT_NO_THROW(parse_objects(kPlayers, m));
}

TEST(Objects, SaveLoadRoundTrip) {
  const DatasetManifest m = basic_manifest();
  const ObjectSpace space = parse_objects(kPlayers, m);
  const fs::path path = fs::path(testing::TempDir()) / "teamrank_objects.csv";
  save_objects(space, m, path);
  const ObjectSpace back = load_objects(path, m);
  ASSERT_EQ(back.size(), space.size());
  for (std::size_t i = 0; i < space.size(); ++i) EXPECT_EQ(back.records()[i], space.records()[i]);
  EXPECT_EQ(code_of([&] { load_objects(fs::path(testing::TempDir()) / "nope.csv", m); }), ErrorCode::kIoError);
}

TEST(Rosters, GroupByTeam) {
  const fs::path path = fs::path(testing::TempDir()) / "teamrank_rosters.csv";
  {
    std::ofstream(path) << kPlayers;
  }
  const Rosters r = load_rosters(path, basic_manifest());
  EXPECT_EQ(r.at("ATL"), (std::vector<ObjectId>{1, 2}));
  EXPECT_EQ(r.at("HOU"), (std::vector<ObjectId>{3}));
}

TEST(Teams, StandingsOrder) {
  const TeamTable t = parse_teams("Team,W,PTS,AST\nB,40,1,2\nA,40,3,4\nC,50,5,6\n", basic_manifest());
  EXPECT_EQ(t.standings(), (std::vector<std::string>{"C", "A", "B"}));
  ASSERT_NE(t.find("A"), nullptr);
  EXPECT_EQ(t.find("A")->aggregate, (AttributeVector{3, 4}));
  EXPECT_EQ(t.find("Z"), nullptr);
  EXPECT_EQ(code_of([] { parse_teams("Team,W,PTS,AST\nA,1,1,1\nA,2,2,2\n", basic_manifest()); }),
            ErrorCode::kMalformedRow);
}

TEST(Synthetic, DeterministicAcrossThreadCounts) {
  const auto params = default_nb_params();
  SyntheticOptions a;
  a.count = 10000;
  a.seed = 77;
  a.threads = 1;
  SyntheticOptions b = a;
  b.threads = 4;
  const ObjectSpace x = gen_synthetic(params, a);
  const ObjectSpace y = gen_synthetic(params, b);
  EXPECT_EQ(x.version(), y.version());
  ASSERT_EQ(x.size(), 10000u);
  EXPECT_EQ(x.records().front().id, 1u);
  EXPECT_EQ(x.records().back().id, 10000u);
  for (const auto& rec : x.records()) {
    EXPECT_GE(rec.lambda, 500.0);
    EXPECT_LE(rec.lambda, 3000.0);
    for (double v : rec.attrs) {
      EXPECT_GE(v, 0.0);
      EXPECT_EQ(v, std::floor(v));
    }
  }
  a.seed = 78;
  EXPECT_NE(gen_synthetic(params, a).version(), x.version());
}

TEST(Synthetic, PrefixStable) {
  // A shorter run is a prefix of a longer one with the same seed.
  SyntheticOptions small;
  small.count = 5000;
  small.seed = 9;
  SyntheticOptions large = small;
  large.count = 9000;
  const auto params = default_nb_params();
  const ObjectSpace a = gen_synthetic(params, small);
  const ObjectSpace b = gen_synthetic(params, large);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.records()[i], b.records()[i]);
}

TEST(Synthetic, Validation) {
  SyntheticOptions o;
  EXPECT_EQ(code_of([&] { gen_synthetic(std::vector<NbDimension>{{"x", 1.0, 1.5}}, o); }),
            ErrorCode::kInvalidParams);
  EXPECT_EQ(code_of([&] { gen_synthetic(std::vector<NbDimension>{}, o); }), ErrorCode::kInvalidParams);
  o.count = 0;
  EXPECT_EQ(code_of([&] { gen_synthetic(default_nb_params(), o); }), ErrorCode::kInvalidArgument);
}

TEST(Synthetic, TableOneMoments) {
  for (const NbDimension& dim : default_nb_params()) {
    const auto s = sample_nb(dim, 200000, 5);
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    var /= static_cast<double>(s.size() - 1);
    EXPECT_NEAR(mean / dim.mean(), 1.0, 0.02) << dim.name;
    EXPECT_NEAR(var / dim.variance(), 1.0, 0.05) << dim.name;
  }
}

TEST(NbParams, ParseCsv) {
  const auto p = parse_nb_params("dimension,r,p\nFG,1.44,0.008\nX,2,0.5\n");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[1].name, "X");
  EXPECT_DOUBLE_EQ(p[1].mean(), 2.0);
  EXPECT_DOUBLE_EQ(p[1].variance(), 4.0);
  EXPECT_EQ(code_of([] { parse_nb_params("dimension,r,p\nX,2,0\n"); }), ErrorCode::kInvalidParams);
}

TEST(ChiSquare, HandStatistic) {
  const std::vector<double> obs{10, 20, 30};
  const std::vector<double> exp{15, 20, 25};
  EXPECT_DOUBLE_EQ(chi_square_statistic(obs, exp), 8.0 / 3.0);
  const std::vector<double> short_exp{1, 2};
  EXPECT_EQ(code_of([&] { chi_square_statistic(obs, short_exp); }), ErrorCode::kDimensionMismatch);
}

TEST(ChiSquare, PmfSumsToOne) {
  double sum = 0.0;
  for (std::uint64_t k = 0; k < 400; ++k) sum += std::exp(nb_log_pmf(k, 2.0, 0.2));
  EXPECT_NEAR(sum, 1.0, 1e-12);
  // NB(1, p) is geometric.
  EXPECT_NEAR(std::exp(nb_log_pmf(3, 1.0, 0.25)), 0.25 * std::pow(0.75, 3), 1e-15);
}

TEST(ChiSquare, GofBinningAndDecision) {
  const auto s = sample_nb({"x", 2.0, 0.2}, 5000, 11);
  const GofResult g = chi_square_gof(s, 2.0, 0.2, 0.05);
  ASSERT_GE(g.bins.size(), 2u);
  EXPECT_EQ(g.dof, g.bins.size() - 1);
  double total_expected = 0.0, total_observed = 0.0;
  for (const auto& bin : g.bins) {
    EXPECT_GE(bin.expected, 5.0);
    total_expected += bin.expected;
    total_observed += bin.observed;
  }
  EXPECT_NEAR(total_expected, 5000.0, 1e-6);
  EXPECT_EQ(total_observed, 5000.0);
  EXPECT_TRUE(g.accepted);

  // Same samples tested against a clearly different distribution.
  EXPECT_FALSE(chi_square_gof(s, 2.0, 0.5, 0.05).accepted);
}

TEST(ChiSquare, CriticalValues) {
  // Textbook upper 5% points.
  std::vector<double> s(60, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i % 2);
  const GofResult g = chi_square_gof(s, 1.0, 0.5, 0.05);
  const double table[] = {0.0, 3.841458820694124, 5.991464547107979, 7.814727903251178, 9.487729036781154};
  ASSERT_LT(g.dof, 5u);
  EXPECT_NEAR(g.critical, table[g.dof], 1e-9);
}

TEST(ChiSquare, Errors) {
  const std::vector<double> few(10, 1.0);
  EXPECT_EQ(code_of([&] { chi_square_gof(few, 1.0, 0.5, 0.05); }), ErrorCode::kInsufficientData);
  const std::vector<double> many(100, 1.0);
  EXPECT_EQ(code_of([&] { chi_square_gof(many, 1.0, 0.5, 1.5); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { chi_square_gof(many, -1.0, 0.5, 0.05); }), ErrorCode::kInvalidParams);
  // Nearly all mass at zero: only one bin can reach an expected count of 5.
  EXPECT_EQ(code_of([&] { chi_square_gof(many, 0.001, 0.999, 0.05); }), ErrorCode::kDegenerateBinning);
}

}  // namespace
}  // namespace teamrank
