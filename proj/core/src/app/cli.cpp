#include "pretrec/app/cli.hpp"

#include <optional>
#include <vector>

#include <CLI11.hpp>

#include "pretrec/app/experiment.hpp"
#include "pretrec/error.hpp"

namespace pretrec {

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::string embeddings;
  std::string seeds;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("config", o.config, "experiment config file")->required();
  cmd->add_option("--out", o.out, "output directory (overrides 'out')");
  cmd->add_option("--workers", o.workers, "parallel jobs (overrides 'workers')");
  cmd->add_option("--seed", o.seed, "run seed (overrides 'seed')");
}

void print_summary(const RunReport& r, std::ostream& out) {
  if (r.metrics) {
    for (const auto& s : r.metrics->averaged)
      out << to_string(s.metric) << "@" << s.k << " = " << s.mean << "\n";
  }
  if (r.stability)
    out << "stability: mean " << r.stability->mean << ", std " << r.stability->std << ", failures "
        << r.stability->failures << "\n";
  for (const auto& a : r.ablation)
    out << "feature dropout " << a.parameter << ": mean " << a.runs.mean << ", std " << a.runs.std << "\n";
  for (const auto& [name, path] : r.artifacts) out << name << ": " << path.string() << "\n";
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-based pre-training for recommenders"};
  app.require_subcommand(1);
  Options o;
  auto* run = app.add_subcommand("run", "pre-train, fine-tune and evaluate");
  auto* pre = app.add_subcommand("pretrain", "pre-train and write embeddings");
  auto* fine = app.add_subcommand("finetune", "fine-tune from stored embeddings");
  auto* eval = app.add_subcommand("evaluate", "evaluate stored embeddings directly");
  auto* stab = app.add_subcommand("stability", "repeat the pipeline over several seeds");
  auto* abl = app.add_subcommand("ablate", "feature-dropout ablation");
  for (auto* c : {run, pre, fine, eval, stab, abl}) add_common(c, o);
  for (auto* c : {fine, eval})
    c->add_option("--embeddings", o.embeddings, "directory with the embedding files")->required();
  stab->add_option("--seeds", o.seeds, "seed range a..b or comma list")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  ExperimentConfig cfg;
  std::vector<std::uint64_t> seeds;
  try {
    cfg = load_config(o.config);
    if (!o.out.empty()) cfg.out = o.out;
    if (o.workers) cfg.workers = *o.workers;
    if (o.seed) cfg.seed = *o.seed;
    if (stab->parsed()) {
      seeds = parse_seed_list(o.seeds);
      if (seeds.size() < 2) throw ConfigError("--seeds needs at least two seeds");
    }
    cfg.validate();
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    Experiment exp(cfg);
    RunReport report;
    if (run->parsed()) report = exp.run();
    else if (pre->parsed()) report = exp.pretrain_only();
    else if (fine->parsed()) report = exp.finetune_from(o.embeddings);
    else if (eval->parsed()) report = exp.evaluate_embeddings(o.embeddings);
    else if (stab->parsed()) report = exp.stability(seeds);
    else report = exp.ablate();
    emit_report(report, cfg.out);
    print_summary(report, out);
    return kExitOk;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "pipeline error: " << e.what() << "\n";
    return kExitPipeline;
  }
}

}  // namespace pretrec
