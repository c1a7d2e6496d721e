#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pretrec/data/synthetic.hpp"
#include "pretrec/eval/metrics.hpp"
#include "pretrec/finetune/finetune.hpp"
#include "pretrec/pretrain/pretrain.hpp"

namespace pretrec {

enum class DatasetSource : std::uint8_t { synthetic, files };

// Every key a config file may set. Paths are resolved against the config file's directory.
struct ExperimentConfig {
  DatasetSource dataset = DatasetSource::synthetic;
  std::filesystem::path interactions;
  std::filesystem::path user_features;
  std::filesystem::path item_features;
  std::filesystem::path out = "pretrec-out";
  ClusterDatasetConfig synthetic;

  std::optional<PretrainerKind> pretrainer = PretrainerKind::com_p;  // nullopt = none
  FinetunerKind finetuner = FinetunerKind::mf_bce;
  std::size_t dim = 64;
  std::size_t layers = 3;
  std::size_t bases = 10;
  double lr = 1e-3;
  double lambda = 1e-4;
  double dropout = 0.0;
  std::optional<double> finetune_lr;
  std::optional<double> finetune_lambda;
  std::size_t lightgcn_layers = 3;
  std::size_t batch_size = 1000;
  std::size_t negatives = 4;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  std::size_t n_eval = 100;
  std::size_t n_eval_sets = 10;
  std::vector<std::size_t> cutoffs{1, 3, 5, 10};
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;
  double feature_dropout = 0.0;
  std::vector<double> ablation_ratios{0.0, 0.2, 0.4, 0.6, 0.8};
  double similarity_threshold = 0.0;
  std::size_t relation_cap = 0;  // 0 keeps full cliques
  std::vector<std::size_t> sweep_dimensions;
  Metric stability_metric = Metric::ndcg;
  std::size_t stability_cutoff = 10;
  std::uint64_t split_seed = 1;
  std::uint64_t validation_seed = 77;
  std::uint64_t eval_seed = 1000;
  std::size_t workers = 1;

  // Throws ConfigError naming the first offending key.
  void validate() const;
};

// Parses `key = value` lines; `#` starts a comment. Unknown or repeated keys, malformed values
// and out-of-range values raise ConfigError naming the line and key.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// `a..b` (inclusive) or a comma list.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

// Canonical (key, value) pairs for every key, sorted by key. Values are normalized so that
// equivalent spellings compare equal.
std::vector<std::pair<std::string, std::string>> canonical_entries(const ExperimentConfig& config);

// Keys whose values never affect results (paths and worker count).
bool is_volatile_key(std::string_view key);

// FNV-1a 64 over the canonical non-volatile entries, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

PretrainConfig make_pretrain_config(const ExperimentConfig& config);
FinetuneConfig make_finetune_config(const ExperimentConfig& config);

}  // namespace pretrec
