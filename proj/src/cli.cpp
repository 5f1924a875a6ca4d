#include "mpmab/cli.hpp"

#include <cstdlib>
#include <iomanip>
#include <ostream>

#include <CLI11.hpp>

#include "mpmab/errors.hpp"
#include "mpmab/report.hpp"

namespace mpmab {
namespace {

struct Options {
  std::vector<std::string> algos;
  double eps = 0.15;
  std::vector<int> players{20};
  int arms = 10;
  std::vector<int> subpar;
  std::int64_t horizon = 100000;
  int reps = 30;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  std::string source;
  std::string instance;
  double delta = 0.05;
  std::string kind = "bernoulli";
  int threads = 0;
  std::optional<double> coeff;
  double ucb_bonus = 2.0;
  std::optional<int> num_base;
  std::optional<double> mix_gamma;
  std::optional<double> lr_growth;
  bool normalize_loss = false;
  std::string plot_input;
  std::string title;
};

PolicySpec policy_spec(const Options& o, const std::string& algo) {
  PolicySpec spec;
  spec.algorithm = algo;
  spec.eps = o.eps;
  spec.coeff = o.coeff;
  spec.ucb_bonus = o.ucb_bonus;
  spec.num_base = o.num_base;
  spec.mix_gamma = o.mix_gamma;
  spec.lr_growth = o.lr_growth;
  spec.normalize_master_loss = o.normalize_loss;
  return spec;
}

InstanceSource instance_source(const Options& o, int players, int subpar) {
  InstanceSource src;
  std::string kind = o.source;
  if (kind.empty()) kind = o.instance.empty() ? "generated" : "file";
  if (kind == "generated") {
    src.kind = InstanceSource::Kind::kGenerated;
  } else if (kind == "example1") {
    src.kind = InstanceSource::Kind::kExample1;
  } else if (kind == "file") {
    if (o.instance.empty()) throw ArgumentError("--source file needs --instance");
    src.kind = InstanceSource::Kind::kFile;
    src.file = o.instance;
  } else {
    throw ArgumentError("unknown --source: " + kind);
  }
  src.num_players = players;
  src.num_arms = o.arms;
  src.num_subpar = subpar;
  src.eps = o.eps;
  src.delta = o.delta;
  src.reward_kind = parse_reward_kind(o.kind);
  return src;
}

void require_out(const Options& o, const char* what) {
  if (o.out.empty()) throw ArgumentError(std::string(what) + " needs --out");
}

int cmd_generate(const Options& o, std::ostream& out) {
  require_out(o, "generate");
  if (o.players.size() != 1) throw ArgumentError("generate takes a single --players value");
  const int subpar = o.subpar.empty() ? 0 : o.subpar.front();
  Philox4x32 rng(o.seed, stream_id(StreamTag::kInstance));
  const MpmabInstance inst =
      generate_instance(o.players.front(), o.arms, subpar, o.eps, rng, parse_reward_kind(o.kind));
  save_instance(inst, o.out);
  out << "wrote " << o.out << " (M=" << inst.num_players() << ", K=" << inst.num_arms()
      << ", |I_eps|=" << subpar_arms(inst, o.eps).size() << ")\n";
  return 0;
}

int cmd_run(const Options& o, std::ostream& out) {
  require_out(o, "run");
  if (o.players.size() != 1) throw ArgumentError("run takes a single --players value");
  if (o.subpar.size() > 1) throw ArgumentError("run takes a single --subpar value");
  const auto format = parse_result_format(o.format);
  const std::vector<std::string> algos = o.algos.empty() ? std::vector<std::string>{"robustagg-adapted"} : o.algos;
  std::vector<Aggregate> results;
  for (const std::string& algo : algos) {
    ExperimentConfig cfg;
    cfg.horizon = o.horizon;
    cfg.policy = policy_spec(o, algo);
    cfg.source = instance_source(o, o.players.front(), o.subpar.empty() ? 0 : o.subpar.front());
    cfg.num_replications = o.reps;
    cfg.base_seed = o.seed;
    cfg.threads = o.threads;
    results.push_back(run_replicated(cfg));
    const Aggregate& a = results.back();
    out << std::left << std::setw(22) << algo << " final regret " << a.mean()(a.mean().size() - 1) << " +- "
        << a.stderr_of_mean()(a.mean().size() - 1) << '\n';
  }
  emit_results(results, format, o.out);
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const std::filesystem::path dir = o.out.empty() ? std::filesystem::path("sweep_out") : std::filesystem::path(o.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());

  const std::vector<std::string> algos =
      o.algos.empty() ? std::vector<std::string>{"robustagg-adapted", "ind-ucb", "naive-agg"} : o.algos;
  std::vector<int> subpars = o.subpar;
  if (subpars.empty()) {
    for (int v = 0; v < o.arms; ++v) subpars.push_back(v);
  }

  std::vector<Aggregate> all;
  for (int m : o.players) {
    for (int v : subpars) {
      std::vector<Aggregate> cell;
      for (const std::string& algo : algos) {
        ExperimentConfig cfg;
        cfg.horizon = o.horizon;
        cfg.policy = policy_spec(o, algo);
        cfg.source = instance_source(o, m, v);
        cfg.num_replications = o.reps;
        cfg.base_seed = o.seed;
        cfg.threads = o.threads;
        cell.push_back(run_replicated(cfg));
        const Aggregate& a = cell.back();
        const auto last = a.mean().size() - 1;
        out << "M=" << std::setw(3) << m << " v=" << std::setw(2) << v << "  " << std::left << std::setw(22) << algo
            << std::right << " final regret " << a.mean()(last) << " +- " << a.stderr_of_mean()(last) << '\n';
      }
      const std::string stem = "M" + std::to_string(m) + "_v" + std::to_string(v);
      const auto curves = curves_from(cell);
      write_text(dir / (stem + ".svg"),
                 regret_svg(curves, "K=" + std::to_string(o.arms) + ", M=" + std::to_string(m) +
                                        ", |I_eps|=" + std::to_string(v)));
      all.insert(all.end(), cell.begin(), cell.end());
    }
  }
  write_text(dir / "results.csv", results_csv(all));
  write_text(dir / "summary.json", results_json(all));
  out << "wrote " << (dir / "results.csv").string() << '\n';
  return 0;
}

int cmd_plot(const Options& o, std::ostream& out) {
  require_out(o, "plot");
  const auto aggregates = aggregates_from_csv(read_text(o.plot_input));
  write_text(o.out, regret_svg(curves_from(aggregates), o.title));
  out << "wrote " << o.out << " (" << aggregates.size() << " series)\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and benchmark tool for multi-player multi-armed bandits"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file mirroring the long flags");
  Options o;

  app.add_option("--algo", o.algos, "policy preset(s), comma separated")->delimiter(',');
  app.add_option("--eps", o.eps, "dissimilarity eps")->capture_default_str();
  app.add_option("--players", o.players, "number of players (sweep: comma list)")->delimiter(',');
  app.add_option("--arms", o.arms, "number of arms")->capture_default_str();
  app.add_option("--subpar", o.subpar, "number of subpar arms (sweep: comma list)")->delimiter(',');
  app.add_option("--horizon", o.horizon, "horizon T")->capture_default_str();
  app.add_option("--reps", o.reps, "replications")->capture_default_str();
  app.add_option("--seed", o.seed, "base seed (MPMAB_SEED overrides)")->capture_default_str();
  app.add_option("--out", o.out, "output path (sweep: directory)");
  app.add_option("--format", o.format, "csv | json | svg")->capture_default_str();
  app.add_option("--source", o.source, "generated | example1 | file");
  app.add_option("--instance", o.instance, "instance JSON file");
  app.add_option("--delta", o.delta, "example1 gap")->capture_default_str();
  app.add_option("--kind", o.kind, "bernoulli | pointmass")->capture_default_str();
  app.add_option("--threads", o.threads, "worker threads (0: all cores)");
  app.add_option("--coeff", o.coeff, "override the width coefficient");
  app.add_option("--ucb-bonus", o.ucb_bonus, "ind-ucb bonus constant")->capture_default_str();
  app.add_option("--num-base", o.num_base, "agnostic: number of base learners B");
  app.add_option("--mix-gamma", o.mix_gamma, "agnostic: uniform mixing gamma");
  app.add_option("--lr-growth", o.lr_growth, "agnostic: learning-rate growth beta");
  app.add_flag("--normalize-loss", o.normalize_loss, "agnostic: divide master loss by M");

  auto* generate = app.add_subcommand("generate", "write a generated instance file")->fallthrough();
  auto* run = app.add_subcommand("run", "run one configuration and write results")->fallthrough();
  auto* sweep = app.add_subcommand("sweep", "sweep subpar-arm counts and presets")->fallthrough();
  auto* plot = app.add_subcommand("plot", "render a results CSV as SVG")->fallthrough();
  plot->add_option("input", o.plot_input, "results CSV")->required();
  plot->add_option("--title", o.title, "plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (const char* env = std::getenv("MPMAB_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      o.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument(env);
    } catch (const std::exception&) {
      err << "error: MPMAB_SEED must be an unsigned integer\n";
      return 2;
    }
  }

  try {
    if (generate->parsed()) return cmd_generate(o, out);
    if (run->parsed()) return cmd_run(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (plot->parsed()) return cmd_plot(o, out);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace mpmab
