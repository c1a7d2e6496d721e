#include "pretrec/app/experiment.hpp"

#include <charconv>
#include <chrono>
#include <fstream>

#include <json.hpp>

#include "pretrec/error.hpp"
#include "pretrec/graphs/graphs.hpp"

namespace pretrec {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Runs `body`, timing it and tagging library errors with the stage name. IO errors pass
// through untouched so the CLI can map them to their own exit code.
template <class F>
auto timed_stage(RunReport& report, const std::string& name, F&& body) {
  const auto start = Clock::now();
  auto finish = [&](std::string model = {}, std::string initialization = {},
                    std::optional<TrainingResult> training = {}) {
    StageRecord rec{name, 0.0, std::move(model), std::move(initialization), std::move(training)};
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    report.stages.push_back(std::move(rec));
  };
  try {
    return body(finish);
  } catch (const IoError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset == DatasetSource::synthetic) return generate_cluster_dataset(cfg.synthetic);
  Dataset d;
  auto loaded = load_interactions(cfg.interactions);
  d.interactions = std::move(loaded.matrix);
  d.users = std::move(loaded.users);
  d.items = std::move(loaded.items);
  d.user_features = load_features(cfg.user_features, d.users, d.interactions.n_users).features;
  d.item_features = load_features(cfg.item_features, d.items, d.interactions.n_items).features;
  return d;
}

FeatureMatrix dropped(const FeatureMatrix& f, double ratio, std::uint64_t seed, std::string_view side) {
  if (ratio == 0.0) return f;
  return drop_features(f, ratio, RngStream(seed).split(std::string("feature-dropout-") + std::string(side))).features;
}

Json training_json(const TrainingResult& t) {
  return {{"epochs_run", t.epochs_run},
          {"best_epoch", t.best_epoch},
          {"best_validation", t.best_validation},
          {"validation_curve", t.validation_curve}};
}

Json stability_json(const StabilityReport& s) {
  Json seeds = Json::array();
  for (const auto& o : s.seeds) {
    Json j{{"seed", o.seed}, {"ok", o.ok}};
    if (o.ok) j["value"] = o.value;
    else j["error"] = o.error;
    seeds.push_back(std::move(j));
  }
  return {{"seeds", std::move(seeds)}, {"mean", s.mean}, {"std", s.std}, {"failures", s.failures}};
}

Json metrics_json(const EvaluationReport& r) {
  Json averaged = Json::array();
  for (const auto& s : r.averaged)
    averaged.push_back({{"metric", to_string(s.metric)}, {"k", s.k}, {"mean", s.mean}, {"per_set", s.per_set}});
  Json sets = Json::array();
  for (const auto& s : r.sets) sets.push_back({{"seed", s.seed}, {"users", s.users.size()}});
  return {{"cutoffs", r.cutoffs}, {"averaged", std::move(averaged)}, {"sets", std::move(sets)}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

// Config values echoed as JSON numbers, arrays of numbers, null (unset) or strings.
Json config_value(std::string_view key, const std::string& text) {
  auto number = [](std::string_view t) -> std::optional<double> {
    double v = 0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || end != t.data() + t.size() || t.empty()) return std::nullopt;
    return v;
  };
  if (key == "cutoffs" || key == "seeds" || key == "ablation_ratios" || key == "sweep_dimensions") {
    Json arr = Json::array();
    std::size_t start = 0;
    while (start < text.size()) {
      const auto comma = std::min(text.find(',', start), text.size());
      arr.push_back(*number(std::string_view(text).substr(start, comma - start)));
      start = comma + 1;
    }
    return arr;
  }
  if (text.empty()) return nullptr;
  if (key == "out" || key.ends_with("features") || key == "interactions") return text;
  if (const auto v = number(text)) return *v;
  return text;
}

std::string csv_real(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {
  config_.validate();
  try {
    data_ = load_dataset(config_);
    split_ = leave_one_out_split(data_.interactions, RngStream(config_.split_seed));
    validation_ = build_candidate_set(split_, Split::validation, config_.n_eval, config_.validation_seed);
    tests_ = build_eval_sets(split_, config_.n_eval_sets, config_.n_eval, config_.eval_seed);
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("data", e.what());
  }
}

RunReport Experiment::base_report() const {
  RunReport r;
  r.config = config_;
  r.config_hash = config_hash(config_);
  return r;
}

std::vector<std::uint64_t> Experiment::run_seeds() const {
  if (!config_.seeds.empty()) return config_.seeds;
  return {config_.seed};
}

double Experiment::seed_metric(std::uint64_t seed, double feature_dropout, std::size_t dim,
                               bool use_pretrainer) const {
  std::optional<EmbeddingSet> emb;
  if (use_pretrainer && config_.pretrainer) {
    PretrainConfig pc = make_pretrain_config(config_);
    pc.encoder.dim = dim;
    const auto users = dropped(data_.user_features, feature_dropout, seed, "user");
    const auto items = dropped(data_.item_features, feature_dropout, seed, "item");
    emb = pretrain(pc, split_, users, items, validation_, seed).embeddings;
  }
  FinetuneConfig fc = make_finetune_config(config_);
  fc.model.dim = dim;
  const auto out = run_finetune(fc, split_, emb ? &*emb : nullptr, validation_, tests_, seed);
  return out.report.evaluation.value(config_.stability_metric, config_.stability_cutoff);
}

RunReport Experiment::pretrain_only() {
  RunReport report = base_report();
  if (!config_.pretrainer) throw StageError("pretrain", "pretrainer = none, nothing to pre-train");
  timed_stage(report, "pretrain", [&](auto finish) {
    const auto users = dropped(data_.user_features, config_.feature_dropout, config_.seed, "user");
    const auto items = dropped(data_.item_features, config_.feature_dropout, config_.seed, "item");
    auto result = pretrain(make_pretrain_config(config_), split_, users, items, validation_, config_.seed);
    result.embeddings.config_hash = report.config_hash;
    const auto dir = config_.out / "embeddings";
    save_embeddings(result.embeddings, dir);
    report.artifacts["user_embeddings"] = dir / kUserEmbeddingFile;
    report.artifacts["item_embeddings"] = dir / kItemEmbeddingFile;
    finish(result.embeddings.model, "random", result.training);
    return 0;
  });
  return report;
}

RunReport Experiment::run() {
  RunReport report = config_.pretrainer ? pretrain_only() : base_report();
  std::optional<EmbeddingSet> emb;
  if (config_.pretrainer) {
    emb = timed_stage(report, "load-embeddings", [&](auto finish) {
      auto e = load_embeddings(config_.out / "embeddings");
      finish();
      return e;
    });
  }
  timed_stage(report, "finetune", [&](auto finish) {
    const auto out =
        run_finetune(make_finetune_config(config_), split_, emb ? &*emb : nullptr, validation_, tests_, config_.seed);
    report.metrics = out.report.evaluation;
    finish(out.report.model, out.report.initialization, out.report.training);
    return 0;
  });
  if (config_.seeds.size() >= 2) {
    const auto seeded = stability(config_.seeds);
    report.stages.push_back(seeded.stages.front());
    report.stability = seeded.stability;
  }
  if (!config_.sweep_dimensions.empty()) {
    timed_stage(report, "sweep-dimension", [&](auto finish) {
      std::vector<double> dims(config_.sweep_dimensions.begin(), config_.sweep_dimensions.end());
      const auto seeds = run_seeds();
      const std::string name(to_string(config_.finetuner));
      std::vector<bool> arms{false};
      if (config_.pretrainer) arms.push_back(true);
      for (bool pre : arms) {
        auto job = [&, pre](double d, std::uint64_t s) {
          return seed_metric(s, config_.feature_dropout, static_cast<std::size_t>(d), pre);
        };
        report.dimension_sweep.push_back(
            {name + "+" + (pre ? std::string(to_string(*config_.pretrainer)) : std::string("random")),
             sweep(job, dims, seeds, config_.workers)});
      }
      finish();
      return 0;
    });
  }
  return report;
}

RunReport Experiment::finetune_from(const std::filesystem::path& embeddings_dir) {
  RunReport report = base_report();
  const auto emb = timed_stage(report, "load-embeddings", [&](auto finish) {
    auto e = load_embeddings(embeddings_dir);
    finish();
    return e;
  });
  timed_stage(report, "finetune", [&](auto finish) {
    const auto out = run_finetune(make_finetune_config(config_), split_, &emb, validation_, tests_, config_.seed);
    report.metrics = out.report.evaluation;
    finish(out.report.model, out.report.initialization, out.report.training);
    return 0;
  });
  return report;
}

RunReport Experiment::evaluate_embeddings(const std::filesystem::path& embeddings_dir) {
  RunReport report = base_report();
  const auto emb = timed_stage(report, "load-embeddings", [&](auto finish) {
    auto e = load_embeddings(embeddings_dir);
    finish();
    return e;
  });
  timed_stage(report, "evaluate", [&](auto finish) {
    if (emb.users.rows() != split_.n_users || emb.items.rows() != split_.n_items)
      throw ConfigError("embedding row counts do not match the dataset");
    const EmbeddingScorer scorer(emb.users, emb.items);
    report.metrics = evaluate(scorer, tests_, config_.cutoffs);
    finish(emb.model, emb.model);
    return 0;
  });
  return report;
}

RunReport Experiment::stability(std::span<const std::uint64_t> seeds) {
  RunReport report = base_report();
  timed_stage(report, "stability", [&](auto finish) {
    auto job = [&](std::uint64_t s) { return seed_metric(s, config_.feature_dropout, config_.dim, true); };
    report.stability = stability_run(job, seeds, config_.workers);
    finish();
    return 0;
  });
  return report;
}

RunReport Experiment::ablate() {
  RunReport report = base_report();
  if (!config_.pretrainer) throw StageError("ablation", "feature dropout needs a pre-trainer");
  timed_stage(report, "ablation", [&](auto finish) {
    auto job = [&](double ratio, std::uint64_t s) { return seed_metric(s, ratio, config_.dim, true); };
    report.ablation = ablation_sweep(job, config_.ablation_ratios, run_seeds(), config_.workers);
    finish();
    return 0;
  });
  return report;
}

std::string report_json(const RunReport& report, bool volatile_fields) {
  Json config = Json::object();
  for (const auto& [key, value] : canonical_entries(report.config))
    if (volatile_fields || !is_volatile_key(key)) config[key] = config_value(key, value);

  Json stages = Json::array();
  for (const auto& s : report.stages) {
    Json j{{"name", s.name}};
    if (volatile_fields) j["wall_seconds"] = s.wall_seconds;
    if (!s.model.empty()) j["model"] = s.model;
    if (!s.initialization.empty()) j["initialization"] = s.initialization;
    if (s.training) j["training"] = training_json(*s.training);
    stages.push_back(std::move(j));
  }

  Json metrics = report.metrics ? metrics_json(*report.metrics) : Json::object();
  if (!report.dimension_sweep.empty()) {
    Json arms = Json::array();
    for (const auto& arm : report.dimension_sweep) {
      Json points = Json::array();
      for (const auto& p : arm.points) points.push_back({{"dim", p.parameter}, {"runs", stability_json(p.runs)}});
      arms.push_back({{"arm", arm.arm}, {"points", std::move(points)}});
    }
    metrics["dimension_sweep"] = std::move(arms);
  }

  Json ablation = nullptr;
  if (!report.ablation.empty()) {
    ablation = Json::array();
    for (const auto& a : report.ablation)
      ablation.push_back({{"ratio", a.parameter}, {"runs", stability_json(a.runs)}});
  }

  Json artifacts = Json::object();
  if (volatile_fields)
    for (const auto& [name, path] : report.artifacts) artifacts[name] = path.generic_string();

  Json out{{"config", std::move(config)},
           {"config_hash", report.config_hash},
           {"stages", std::move(stages)},
           {"metrics", std::move(metrics)},
           {"stability", report.stability ? stability_json(*report.stability) : Json(nullptr)},
           {"ablation", std::move(ablation)},
           {"artifacts", std::move(artifacts)}};
  return out.dump(2) + "\n";
}

void emit_report(RunReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const std::string label = std::string(to_string(report.config.stability_metric)) + "@" +
                            std::to_string(report.config.stability_cutoff);
  if (report.metrics) {
    std::string csv = "k,metric,value\n";
    for (Metric m : kAllMetrics)
      for (std::size_t k : report.metrics->cutoffs)
        csv += std::to_string(k) + "," + std::string(to_string(m)) + "," + csv_real(report.metrics->value(m, k)) + "\n";
    write_file(out_dir / "metrics_by_cutoff.csv", csv);
    report.artifacts["metrics_by_cutoff"] = out_dir / "metrics_by_cutoff.csv";
  }
  if (report.stability) {
    std::string csv = "seed," + label + "\n";
    for (const auto& o : report.stability->seeds)
      csv += std::to_string(o.seed) + "," + (o.ok ? csv_real(o.value) : std::string("failed")) + "\n";
    csv += "mean," + csv_real(report.stability->mean) + "\n";
    csv += "std," + csv_real(report.stability->std) + "\n";
    write_file(out_dir / "metrics_by_seed.csv", csv);
    report.artifacts["metrics_by_seed"] = out_dir / "metrics_by_seed.csv";
  }
  if (!report.ablation.empty()) {
    std::string csv = "ratio,mean,std,completed,failures\n";
    for (const auto& a : report.ablation)
      csv += csv_real(a.parameter) + "," + csv_real(a.runs.mean) + "," + csv_real(a.runs.std) + "," +
             std::to_string(a.runs.seeds.size() - a.runs.failures) + "," + std::to_string(a.runs.failures) + "\n";
    write_file(out_dir / "ablation.csv", csv);
    report.artifacts["ablation"] = out_dir / "ablation.csv";
  }
  if (!report.dimension_sweep.empty()) {
    std::string csv = "arm,dim,mean,std\n";
    for (const auto& arm : report.dimension_sweep)
      for (const auto& p : arm.points)
        csv += arm.arm + "," + std::to_string(static_cast<std::size_t>(p.parameter)) + "," + csv_real(p.runs.mean) +
               "," + csv_real(p.runs.std) + "\n";
    write_file(out_dir / "sweep_dimension.csv", csv);
    report.artifacts["sweep_dimension"] = out_dir / "sweep_dimension.csv";
  }
  report.artifacts["report"] = out_dir / "report.json";
  write_file(out_dir / "report.json", report_json(report));
}

}  // namespace pretrec
