#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "mpmab/cli.hpp"
#include "mpmab/errors.hpp"
#include "mpmab/report.hpp"

using namespace mpmab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mpmab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static inline int counter = 0;
};

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mpmab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

Aggregate tiny_aggregate(const std::string& algo, int reps, std::vector<std::int64_t> rounds) {
  Aggregate a;
  a.algorithm = algo;
  a.eps = 0.15;
  a.num_subpar = 8;
  a.rounds = std::move(rounds);
  a.values = Eigen::MatrixXd(reps, static_cast<Eigen::Index>(a.rounds.size()));
  for (int r = 0; r < reps; ++r) {
    for (Eigen::Index c = 0; c < a.values.cols(); ++c) a.values(r, c) = 0.1 * (r + 1) * double(c + 1) + 1.0 / 3.0;
  }
  return a;
}

}  // namespace

TEST_CASE("csv output") {
  SUBCASE("empty aggregate writes the header only") {
    const std::vector<Aggregate> none{Aggregate{}};
    CHECK(results_csv(none) == std::string(kCsvHeader) + "\n");
    CHECK(results_csv({}) == std::string(kCsvHeader) + "\n");
  }
  SUBCASE("single checkpoint round-trips") {
    const std::vector<Aggregate> one{tiny_aggregate("ind-ucb", 1, {500})};
    const std::string csv = results_csv(one);
    CHECK(count(csv, "\n") == 2);
    const auto back = aggregates_from_csv(csv);
    REQUIRE(back.size() == 1);
    CHECK(back[0].algorithm == "ind-ucb");
    CHECK(back[0].num_subpar == 8);
    CHECK(back[0].rounds == std::vector<std::int64_t>{500});
    CHECK(back[0].values == one[0].values);
  }
  SUBCASE("property: multi-series csv round-trips exactly") {
    const std::vector<Aggregate> many{tiny_aggregate("robustagg-adapted", 3, {10, 20, 30}),
                                      tiny_aggregate("ind-ucb", 3, {10, 20, 30})};
    const auto back = aggregates_from_csv(results_csv(many));
    REQUIRE(back.size() == 2);
    for (int i = 0; i < 2; ++i) {
      CHECK(back[i].algorithm == many[i].algorithm);
      CHECK(back[i].values == many[i].values);
    }
  }
  CHECK_THROWS_AS(aggregates_from_csv("bad,header\n"), ArgumentError);
  CHECK_THROWS_AS(aggregates_from_csv(std::string(kCsvHeader) + "\nx,0.1,,0,5\n"), ArgumentError);
}

TEST_CASE("json output echoes config and checkpoint statistics") {
  const std::vector<Aggregate> aggs{tiny_aggregate("naive-agg", 4, {1, 2})};
  const auto doc = nlohmann::json::parse(results_json(aggs));
  REQUIRE(doc.size() == 1);
  CHECK(doc[0]["config"]["algorithm"] == "naive-agg");
  CHECK(doc[0]["config"]["num_replications"] == 4);
  CHECK(doc[0]["checkpoints"].size() == 2);
  CHECK(doc[0]["checkpoints"][1]["t"] == 2);
  CHECK(doc[0]["checkpoints"][1]["mean"].get<double>() == doctest::Approx(aggs[0].mean()(1)));
}

TEST_CASE("svg has one polyline per series and labelled axes") {
  const std::vector<Aggregate> aggs{tiny_aggregate("robustagg-adapted", 3, {10, 20}),
                                    tiny_aggregate("ind-ucb", 3, {10, 20}),
                                    tiny_aggregate("naive-agg", 3, {10, 20})};
  const std::string svg = regret_svg(curves_from(aggs), "K=10");
  CHECK(count(svg, "<polyline") == 3);
  CHECK(count(svg, "<polygon") == 3);
  CHECK(svg.find(">rounds<") != std::string::npos);
  CHECK(svg.find(">cumulative collective regret<") != std::string::npos);
  CHECK(svg.find("robustagg-adapted(0.15)") != std::string::npos);
}

TEST_CASE("emit_results reports unwritable paths") {
  const std::vector<Aggregate> aggs{tiny_aggregate("ind-ucb", 1, {1})};
  CHECK_THROWS_AS(emit_results(aggs, ResultFormat::kCsv, "/nonexistent/dir/out.csv"), IoError);
  CHECK_THROWS_AS(parse_result_format("png"), ArgumentError);
}

TEST_CASE("cli generate writes a schema-valid instance") {
  TempDir dir;
  const auto file = dir.path / "inst.json";
  const auto r = cli({"generate", "--players", "20", "--arms", "10", "--subpar", "8", "--eps", "0.15", "--seed", "7",
                      "--out", file.string()});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(read_text(file));
  CHECK(doc["num_players"] == 20);
  CHECK(doc["num_arms"] == 10);
  CHECK(doc["reward_kind"] == "bernoulli");
  CHECK(doc["means"].size() == 20);
  const MpmabInstance inst = load_instance(file);
  CHECK(subpar_arms(inst, 0.15).size() == 8);
  // Same instance as replication 0 of a generated run with seed 7.
  InstanceSource src;
  src.num_subpar = 8;
  CHECK(src.materialize(7) == inst);
}

TEST_CASE("cli run on the example-1 fixture") {
  TempDir dir;
  const auto inst_file = dir.path / "ex1.json";
  save_instance(example1_instance(4, 0.05), inst_file);
  const auto out = dir.path / "res.csv";
  auto r = cli({"run", "--algo", "ind-ucb", "--horizon", "2000", "--reps", "2", "--instance", inst_file.string(),
                "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto aggs = aggregates_from_csv(read_text(out));
  REQUIRE(aggs.size() == 1);
  CHECK(aggs[0].values.rows() == 2);
  CHECK(aggs[0].rounds.back() == 2000);
  CHECK_FALSE(aggs[0].num_subpar.has_value());

  r = cli({"run", "--algo", "robustagg-adapted,naive-agg", "--source", "example1", "--players", "3", "--horizon",
           "500", "--reps", "1", "--format", "json", "--out", (dir.path / "res.json").string()});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(read_text(dir.path / "res.json")).size() == 2);

  // Identical configs produce identical files.
  const auto out2 = dir.path / "res2.csv";
  cli({"run", "--algo", "ind-ucb", "--horizon", "2000", "--reps", "2", "--instance", inst_file.string(), "--out",
       out2.string()});
  CHECK(read_text(out) == read_text(out2));
}

TEST_CASE("cli error handling") {
  TempDir dir;
  CHECK(cli({"run", "--bogus", "1"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"run", "--algo", "thompson", "--horizon", "100", "--reps", "1", "--out", (dir.path / "x.csv").string()})
            .code == 2);
  CHECK(cli({"run", "--horizon", "5", "--reps", "1", "--out", (dir.path / "x.csv").string()}).code == 2);
  CHECK(cli({"generate", "--subpar", "10", "--out", (dir.path / "g.json").string()}).code == 2);
  CHECK(cli({"run", "--players", "2", "--arms", "3", "--horizon", "100", "--reps", "1", "--out",
             "/nonexistent/dir/out.csv"})
            .code == 1);
  CHECK(cli({"plot", (dir.path / "missing.csv").string(), "--out", (dir.path / "p.svg").string()}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("cli sweep and plot") {
  TempDir dir;
  const auto r = cli({"sweep", "--players", "3", "--arms", "4", "--subpar", "0,3", "--horizon", "300", "--reps", "2",
                      "--out", dir.path.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir.path / "M3_v0.svg"));
  CHECK(fs::exists(dir.path / "M3_v3.svg"));
  CHECK(count(read_text(dir.path / "M3_v3.svg"), "<polyline") == 3);
  const auto aggs = aggregates_from_csv(read_text(dir.path / "results.csv"));
  CHECK(aggs.size() == 6);

  const auto svg = dir.path / "plot.svg";
  REQUIRE(cli({"plot", (dir.path / "results.csv").string(), "--out", svg.string()}).code == 0);
  CHECK(count(read_text(svg), "<polyline") == 6);
}

TEST_CASE("cli config file and seed environment override") {
  TempDir dir;
  const auto cfg = dir.path / "run.conf";
  write_text(cfg, "algo=ind-ucb\nplayers=3\narms=4\nsubpar=2\nhorizon=400\nreps=1\nseed=5\n");
  const auto a = dir.path / "a.csv";
  REQUIRE(cli({"run", "--config", cfg.string(), "--out", a.string()}).code == 0);
  auto aggs = aggregates_from_csv(read_text(a));
  REQUIRE(aggs.size() == 1);
  CHECK(aggs[0].algorithm == "ind-ucb");
  CHECK(aggs[0].rounds.back() == 400);

  // Flags override the file.
  const auto b = dir.path / "b.csv";
  REQUIRE(cli({"run", "--config", cfg.string(), "--horizon", "600", "--out", b.string()}).code == 0);
  CHECK(aggregates_from_csv(read_text(b))[0].rounds.back() == 600);

  // MPMAB_SEED overrides --seed: seed 5 from the environment reproduces file a.
  const auto c = dir.path / "c.csv";
  ::setenv("MPMAB_SEED", "5", 1);
  const int code = cli({"run", "--config", cfg.string(), "--seed", "99", "--out", c.string()}).code;
  ::unsetenv("MPMAB_SEED");
  REQUIRE(code == 0);
  CHECK(read_text(a) == read_text(c));
}
