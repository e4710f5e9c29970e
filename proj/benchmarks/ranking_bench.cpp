// Brute force vs index-backed ranking on synthetic leagues.
//   ./teamrank_bench --benchmark_filter=Query

#include <benchmark/benchmark.h>

#include <filesystem>
#include <map>
#include <memory>

#include "teamrank/dataio.hpp"
#include "teamrank/experiment.hpp"
#include "teamrank/nn_index.hpp"
#include "teamrank/ranking.hpp"
#include "teamrank/weighting.hpp"

namespace {

using namespace teamrank;
namespace fs = std::filesystem;

constexpr std::size_t kBlock = 10;
constexpr std::size_t kTopK = 2;

struct Fixture {
  League league;
  TeamContext team;
  TargetContext target;
};

// One cached league per size; the query team is the first mid-class team.
const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[n];
  if (!slot) {
    SyntheticOptions gen;
    gen.count = n;
    gen.seed = 11;
    League league = synthetic_league(gen_synthetic(default_nb_params(), gen), 30, 5);
    const std::string id = mid_class_teams(league.table, 10).front();
    TeamContext team = make_team(league.space, league.rosters.at(id));
    const auto elite = elite_teams(league.table, 10, id);
    TargetContext target = *league.table.find(select_target(team, id, elite, league.weights).target_id);
    slot = std::make_unique<Fixture>(Fixture{std::move(league), std::move(team), std::move(target)});
  }
  return *slot;
}

fs::path index_dir() { return fs::temp_directory_path() / "teamrank-bench-index"; }

void BM_BruteForceQuery(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  IoStats io;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        brute_force_rank(f.team, f.target, f.league.space, f.league.weights, kTopK, {kBlock, &io}));
  }
  state.counters["blocks_per_query"] =
      static_cast<double>(io.snapshot().blocks_read) / static_cast<double>(state.iterations());
}

void BM_RtcStarQuery(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  const NnIndex index = NnIndex::build(f.league.space, f.team, f.target, f.league.weights, kBlock, index_dir());
  index.reset_query_io();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rtc_star_rank(f.team, f.target, f.league.space, f.league.weights, index, kTopK));
  }
  state.counters["blocks_per_query"] = static_cast<double>(index.query_io().snapshot().blocks_read) /
                                       static_cast<double>(state.iterations());
  for (std::size_t p = 0; p < index.partitions(); ++p) fs::remove(index.partition_path(p));
}

void BM_IndexBuild(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const NnIndex index =
        NnIndex::build(f.league.space, f.team, f.target, f.league.weights, kBlock, index_dir());
    state.PauseTiming();
    for (std::size_t p = 0; p < index.partitions(); ++p) fs::remove(index.partition_path(p));
    state.ResumeTiming();
  }
}

void BM_GenSynthetic(benchmark::State& state) {
  SyntheticOptions gen;
  gen.count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gen_synthetic(default_nb_params(), gen));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_BruteForceQuery)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RtcStarQuery)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_IndexBuild)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenSynthetic)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
