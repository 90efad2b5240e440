// Command-line front end: one subcommand per algorithm (seeded trials with
// oracle checks), plus instance generation and the contention simulation.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ampc/ampc.hpp"

namespace {

struct CommonFlags {
  ampc::harness::ExperimentSpec spec;
  std::string out;
  std::string summary;
  bool grid = false;
};

// Writes to the named file, or to `fallback` when the name is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ampc::ConfigError("cannot open '" + path + "' for writing");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void add_experiment_flags(CLI::App* cmd, CommonFlags& f) {
  auto& s = f.spec;
  cmd->add_option("--n", s.n, "vertices (or list elements)")->capture_default_str();
  cmd->add_option("--m", s.m, "edges; 0 picks 4n")->capture_default_str();
  cmd->add_option("--epsilon", s.epsilon, "space exponent, S = n^epsilon")->capture_default_str();
  cmd->add_option("--seed", s.seed, "seed of trial 0; trial i uses seed + i")->capture_default_str();
  cmd->add_option("--trials", s.trials, "number of trials")->capture_default_str();
  cmd->add_option("--space-multiplier", s.space_multiplier, "total space T = multiplier * (n + m)")
      ->capture_default_str();
  cmd->add_option("--budget-slack", s.budget_slack, "per-machine budget = slack * S")->capture_default_str();
  cmd->add_flag("--strict-budget", s.strict_budget, "abort a trial on the first budget violation");
  cmd->add_flag("--strict-leaders", s.strict_leaders, "fail (and retry) when a vertex sees no leader");
  cmd->add_option("--pieces", s.pieces, "two-cycle: 1 or 2 cycles")->capture_default_str();
  cmd->add_option("--trees", s.trees, "trees of a forest or lists to rank")->capture_default_str();
  cmd->add_option("--threads", s.threads, "trials run concurrently")->capture_default_str();
  cmd->add_flag("--wall-time", s.wall_time, "add wall_time to records (breaks byte-identical reruns)");
  cmd->add_option("--out", f.out, "JSON-lines records; stdout when omitted");
  cmd->add_option("--summary", f.summary, "CSV summary; stderr when omitted");
  cmd->add_flag("--grid", f.grid, "run the default grid instead of a single n and epsilon");
}

int run_experiments(const std::string& algorithm, CommonFlags& f) {
  f.spec.algorithm = algorithm;
  std::vector<ampc::harness::ExperimentSpec> specs;
  if (f.grid) {
    specs = ampc::harness::default_grid(algorithm, f.spec.trials, f.spec.seed);
    for (auto& s : specs) {
      s.threads = f.spec.threads;
      s.space_multiplier = f.spec.space_multiplier;
      s.budget_slack = f.spec.budget_slack;
      s.strict_budget = f.spec.strict_budget;
      s.strict_leaders = f.spec.strict_leaders;
      s.wall_time = f.spec.wall_time;
    }
  } else {
    specs.push_back(f.spec);
  }
  for (const auto& spec : specs) spec.validate();
  Sink records(f.out, std::cout);
  Sink summary(f.summary, std::cerr);
  *summary << ampc::harness::ExperimentSummary::csv_header() << '\n';
  bool ok = true;
  for (const auto& spec : specs) {
    const auto report = ampc::harness::run_experiment(spec);
    *records << report.jsonl();
    *summary << report.summary.csv_row() << '\n';
    ok = ok && report.all_correct();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AMPC algorithm simulator and experiment runner"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<CommonFlags>> flags;
  for (const auto& id : ampc::harness::algorithms()) {
    auto* cmd = app.add_subcommand(id, "run seeded " + id + " trials against a sequential reference");
    flags.push_back(std::make_unique<CommonFlags>());
    CommonFlags* f = flags.back().get();
    add_experiment_flags(cmd, *f);
    cmd->callback([id, f] { throw CLI::RuntimeError(run_experiments(id, *f)); });
  }

  std::uint64_t total = 262144, bins = 256, cseed = 1;
  std::size_t ctrials = 1000;
  std::string profile = "adversarial", cout_path;
  auto* contention = app.add_subcommand("contention", "balls-into-bins maximum load");
  contention->add_option("--T", total, "total weight (and ball count)")->capture_default_str();
  contention->add_option("--P", bins, "bins; each ball weighs at most P")->capture_default_str();
  contention->add_option("--profile", profile, "uniform | adversarial | single-heavy")->capture_default_str();
  contention->add_option("--trials", ctrials, "trials")->capture_default_str();
  contention->add_option("--seed", cseed, "seed")->capture_default_str();
  contention->add_option("--out", cout_path, "JSON report; stdout when omitted");
  contention->callback([&] {
    const auto r = ampc::harness::contention_sim(total, bins, ampc::harness::parse_profile(profile), ctrials, cseed);
    Sink sink(cout_path, std::cout);
    *sink << r.to_json().dump() << '\n';
  });

  std::string kind = "random", gout;
  std::size_t gn = 1024, gm = 0, gtrees = 1;
  int gpieces = 1;
  std::uint64_t gseed = 1;
  bool weighted = false;
  auto* gen = app.add_subcommand("gen", "write a seeded instance as an edge list");
  gen->add_option("--kind", kind, "random | cycles | forest")->capture_default_str();
  gen->add_option("--n", gn, "vertices")->capture_default_str();
  gen->add_option("--m", gm, "edges (random); 0 picks 4n")->capture_default_str();
  gen->add_option("--pieces", gpieces, "cycles: 1 or 2")->capture_default_str();
  gen->add_option("--trees", gtrees, "forest: number of trees")->capture_default_str();
  gen->add_option("--seed", gseed, "seed")->capture_default_str();
  gen->add_flag("--weighted", weighted, "distinct weights 1..m");
  gen->add_option("--out", gout, "output file; stdout when omitted");
  gen->callback([&] {
    ampc::Graph g;
    if (kind == "random") {
      const std::size_t pairs = gn < 2 ? 0 : gn * (gn - 1) / 2;
      g = ampc::gen_random_graph(gn, std::min(gm == 0 ? 4 * gn : gm, pairs), gseed, weighted);
    } else if (kind == "cycles") {
      g = ampc::gen_cycles(gn, gpieces, gseed);
    } else if (kind == "forest") {
      g = ampc::gen_random_forest(gn, gtrees, gseed, weighted);
    } else {
      throw ampc::ConfigError("unknown instance kind '" + kind + "'");
    }
    Sink sink(gout, std::cout);
    ampc::write_graph(*sink, g);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ampc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
