#include "pretrec/app/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pretrec/error.hpp"

namespace pretrec {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t parse_uint(std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
    throw ConfigError("expected a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

double parse_real(std::string_view text) {
  text = trim(text);
  double v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty() || !std::isfinite(v))
    throw ConfigError("expected a finite number, got '" + std::string(text) + "'");
  return v;
}

std::string real_text(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <class T, class F>
std::string join(const std::vector<T>& values, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + fmt(values[i]);
  return out;
}

std::string uint_text(std::uint64_t v) { return std::to_string(v); }

struct Key {
  std::string name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
Key uint_key(std::string name, T ExperimentConfig::*field) {
  return {std::move(name), [field](ExperimentConfig& c, std::string_view v) { c.*field = static_cast<T>(parse_uint(v)); },
          [field](const ExperimentConfig& c) { return uint_text(c.*field); }};
}

Key real_key(std::string name, double ExperimentConfig::*field) {
  return {std::move(name), [field](ExperimentConfig& c, std::string_view v) { c.*field = parse_real(v); },
          [field](const ExperimentConfig& c) { return real_text(c.*field); }};
}

Key optional_real_key(std::string name, std::optional<double> ExperimentConfig::*field) {
  return {std::move(name),
          [field](ExperimentConfig& c, std::string_view v) { c.*field = parse_real(v); },
          [field](const ExperimentConfig& c) { return (c.*field) ? real_text(*(c.*field)) : std::string(); }};
}

Key path_key(std::string name, std::filesystem::path ExperimentConfig::*field) {
  return {std::move(name), [field](ExperimentConfig& c, std::string_view v) { c.*field = std::filesystem::path(v); },
          [field](const ExperimentConfig& c) { return (c.*field).generic_string(); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"dataset",
                 [](ExperimentConfig& c, std::string_view v) {
                   if (v == "synthetic") c.dataset = DatasetSource::synthetic;
                   else if (v == "files") c.dataset = DatasetSource::files;
                   else throw ConfigError("expected synthetic or files");
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.dataset == DatasetSource::synthetic ? "synthetic" : "files");
                 }});
    k.push_back(path_key("interactions", &ExperimentConfig::interactions));
    k.push_back(path_key("user_features", &ExperimentConfig::user_features));
    k.push_back(path_key("item_features", &ExperimentConfig::item_features));
    k.push_back(path_key("out", &ExperimentConfig::out));
    k.push_back({"synthetic_users", [](ExperimentConfig& c, std::string_view v) { c.synthetic.users = parse_uint(v); },
                 [](const ExperimentConfig& c) { return uint_text(c.synthetic.users); }});
    k.push_back({"synthetic_items", [](ExperimentConfig& c, std::string_view v) { c.synthetic.items = parse_uint(v); },
                 [](const ExperimentConfig& c) { return uint_text(c.synthetic.items); }});
    k.push_back({"synthetic_clusters",
                 [](ExperimentConfig& c, std::string_view v) { c.synthetic.clusters = parse_uint(v); },
                 [](const ExperimentConfig& c) { return uint_text(c.synthetic.clusters); }});
    k.push_back({"synthetic_noise_columns",
                 [](ExperimentConfig& c, std::string_view v) { c.synthetic.noise_columns = parse_uint(v); },
                 [](const ExperimentConfig& c) { return uint_text(c.synthetic.noise_columns); }});
    k.push_back({"synthetic_within_probability",
                 [](ExperimentConfig& c, std::string_view v) { c.synthetic.within_probability = parse_real(v); },
                 [](const ExperimentConfig& c) { return real_text(c.synthetic.within_probability); }});
    k.push_back({"synthetic_cross_probability",
                 [](ExperimentConfig& c, std::string_view v) { c.synthetic.cross_probability = parse_real(v); },
                 [](const ExperimentConfig& c) { return real_text(c.synthetic.cross_probability); }});
    k.push_back({"synthetic_seed", [](ExperimentConfig& c, std::string_view v) { c.synthetic.seed = parse_uint(v); },
                 [](const ExperimentConfig& c) { return uint_text(c.synthetic.seed); }});
    k.push_back({"pretrainer",
                 [](ExperimentConfig& c, std::string_view v) {
                   if (v == "none") {
                     c.pretrainer.reset();
                     return;
                   }
                   const auto kind = parse_pretrainer(v);
                   if (!kind) throw ConfigError("expected none, gcn-p, com-p or gmf");
                   c.pretrainer = *kind;
                 },
                 [](const ExperimentConfig& c) {
                   return c.pretrainer ? std::string(to_string(*c.pretrainer)) : std::string("none");
                 }});
    k.push_back({"finetuner",
                 [](ExperimentConfig& c, std::string_view v) {
                   const auto kind = parse_finetuner(v);
                   if (!kind) throw ConfigError("expected mf-bce, mf-bpr, ncf or lightgcn");
                   c.finetuner = *kind;
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.finetuner)); }});
    k.push_back(uint_key("dim", &ExperimentConfig::dim));
    k.push_back(uint_key("layers", &ExperimentConfig::layers));
    k.push_back(uint_key("bases", &ExperimentConfig::bases));
    k.push_back(real_key("lr", &ExperimentConfig::lr));
    k.push_back(real_key("lambda", &ExperimentConfig::lambda));
    k.push_back(real_key("dropout", &ExperimentConfig::dropout));
    k.push_back(optional_real_key("finetune_lr", &ExperimentConfig::finetune_lr));
    k.push_back(optional_real_key("finetune_lambda", &ExperimentConfig::finetune_lambda));
    k.push_back(uint_key("lightgcn_layers", &ExperimentConfig::lightgcn_layers));
    k.push_back(uint_key("batch_size", &ExperimentConfig::batch_size));
    k.push_back(uint_key("negatives", &ExperimentConfig::negatives));
    k.push_back(uint_key("max_epochs", &ExperimentConfig::max_epochs));
    k.push_back(uint_key("patience", &ExperimentConfig::patience));
    k.push_back(uint_key("n_eval", &ExperimentConfig::n_eval));
    k.push_back(uint_key("n_eval_sets", &ExperimentConfig::n_eval_sets));
    k.push_back({"cutoffs",
                 [](ExperimentConfig& c, std::string_view v) {
                   std::set<std::size_t> unique;
                   for (auto item : split_list(v)) unique.insert(parse_uint(item));
                   c.cutoffs.assign(unique.begin(), unique.end());
                 },
                 [](const ExperimentConfig& c) { return join(c.cutoffs, uint_text); }});
    k.push_back(uint_key("seed", &ExperimentConfig::seed));
    k.push_back({"seeds", [](ExperimentConfig& c, std::string_view v) { c.seeds = parse_seed_list(v); },
                 [](const ExperimentConfig& c) { return join(c.seeds, uint_text); }});
    k.push_back(real_key("feature_dropout", &ExperimentConfig::feature_dropout));
    k.push_back({"ablation_ratios",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.ablation_ratios.clear();
                   for (auto item : split_list(v)) c.ablation_ratios.push_back(parse_real(item));
                 },
                 [](const ExperimentConfig& c) { return join(c.ablation_ratios, real_text); }});
    k.push_back(real_key("similarity_threshold", &ExperimentConfig::similarity_threshold));
    k.push_back(uint_key("relation_cap", &ExperimentConfig::relation_cap));
    k.push_back({"sweep_dimensions",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.sweep_dimensions.clear();
                   for (auto item : split_list(v)) c.sweep_dimensions.push_back(parse_uint(item));
                 },
                 [](const ExperimentConfig& c) { return join(c.sweep_dimensions, uint_text); }});
    k.push_back({"stability_metric",
                 [](ExperimentConfig& c, std::string_view v) {
                   for (Metric m : kAllMetrics) {
                     if (v == to_string(m)) {
                       c.stability_metric = m;
                       return;
                     }
                   }
                   throw ConfigError("expected ndcg, recall or map");
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.stability_metric)); }});
    k.push_back(uint_key("stability_cutoff", &ExperimentConfig::stability_cutoff));
    k.push_back(uint_key("split_seed", &ExperimentConfig::split_seed));
    k.push_back(uint_key("validation_seed", &ExperimentConfig::validation_seed));
    k.push_back(uint_key("eval_seed", &ExperimentConfig::eval_seed));
    k.push_back(uint_key("workers", &ExperimentConfig::workers));
    std::sort(k.begin(), k.end(), [](const Key& a, const Key& b) { return a.name < b.name; });
    return k;
  }();
  return table;
}

const Key* find_key(std::string_view name) {
  for (const Key& k : keys())
    if (k.name == name) return &k;
  return nullptr;
}

void require(bool ok, std::string_view key, std::string_view what) {
  if (!ok) throw ConfigError("config key '" + std::string(key) + "': " + std::string(what));
}

bool is_rate(double v) { return v > 0.0 && v <= 1.0; }
bool is_ratio(double v) { return v >= 0.0 && v < 1.0; }

}  // namespace

void ExperimentConfig::validate() const {
  if (dataset == DatasetSource::files) {
    require(!interactions.empty(), "interactions", "required when dataset = files");
    require(!user_features.empty(), "user_features", "required when dataset = files");
    require(!item_features.empty(), "item_features", "required when dataset = files");
  } else {
    require(synthetic.users >= 1, "synthetic_users", "must be >= 1");
    require(synthetic.items >= 1, "synthetic_items", "must be >= 1");
    require(synthetic.clusters >= 1, "synthetic_clusters", "must be >= 1");
    require(synthetic.within_probability >= 0 && synthetic.within_probability <= 1,
            "synthetic_within_probability", "must lie in [0, 1]");
    require(synthetic.cross_probability >= 0 && synthetic.cross_probability <= 1,
            "synthetic_cross_probability", "must lie in [0, 1]");
  }
  require(dim >= 1 && dim <= 1024, "dim", "must lie in [1, 1024]");
  require(layers >= 1 && layers <= 3, "layers", "must lie in [1, 3]");
  require(bases >= 1, "bases", "must be >= 1");
  require(is_rate(lr), "lr", "must lie in (0, 1]");
  require(lambda >= 0 && lambda <= 1, "lambda", "must lie in [0, 1]");
  require(is_ratio(dropout), "dropout", "must lie in [0, 1)");
  require(!finetune_lr || is_rate(*finetune_lr), "finetune_lr", "must lie in (0, 1]");
  require(!finetune_lambda || (*finetune_lambda >= 0 && *finetune_lambda <= 1), "finetune_lambda",
          "must lie in [0, 1]");
  require(lightgcn_layers <= 5, "lightgcn_layers", "must lie in [0, 5]");
  require(negatives >= 1, "negatives", "must be >= 1");
  require(batch_size >= negatives + 1, "batch_size", "must hold at least one positive and its negatives");
  require(max_epochs >= 1, "max_epochs", "must be >= 1");
  require(patience >= 1, "patience", "must be >= 1");
  require(n_eval >= 1, "n_eval", "must be >= 1");
  require(n_eval_sets >= 1, "n_eval_sets", "must be >= 1");
  require(!cutoffs.empty(), "cutoffs", "must list at least one cut-off");
  require(cutoffs.front() >= 1, "cutoffs", "cut-offs must be >= 1");
  require(seeds.size() != 1, "seeds", "a stability run needs at least two seeds");
  require(is_ratio(feature_dropout), "feature_dropout", "must lie in [0, 1)");
  require(!ablation_ratios.empty(), "ablation_ratios", "must list at least one ratio");
  for (double r : ablation_ratios) require(is_ratio(r), "ablation_ratios", "ratios must lie in [0, 1)");
  require(similarity_threshold >= 0 && similarity_threshold < 1, "similarity_threshold", "must lie in [0, 1)");
  for (std::size_t d : sweep_dimensions) require(d >= 1 && d <= 1024, "sweep_dimensions", "must lie in [1, 1024]");
  require(std::find(cutoffs.begin(), cutoffs.end(), stability_cutoff) != cutoffs.end(), "stability_cutoff",
          "must be one of the configured cut-offs");
  require(workers >= 1 && workers <= 256, "workers", "must lie in [1, 256]");
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  text = trim(text);
  const auto dots = text.find("..");
  if (dots != std::string_view::npos) {
    const std::uint64_t a = parse_uint(text.substr(0, dots)), b = parse_uint(text.substr(dots + 2));
    if (b < a) throw ConfigError("seed range '" + std::string(text) + "' is empty");
    if (b - a >= 100000) throw ConfigError("seed range '" + std::string(text) + "' is too long");
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
    return out;
  }
  std::vector<std::uint64_t> out;
  for (auto item : split_list(text)) out.push_back(parse_uint(item));
  std::set<std::uint64_t> unique(out.begin(), out.end());
  if (unique.size() != out.size()) throw ConfigError("seed list '" + std::string(text) + "' repeats a seed");
  return out;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const Key* k = find_key(key);
    if (!k) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "key '" + key + "' set twice");
    try {
      k->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + "key '" + key + "': " + e.what());
    }
  }
  if (!base_dir.empty()) {
    for (auto* p : {&cfg.interactions, &cfg.user_features, &cfg.item_features, &cfg.out})
      if (!p->empty() && p->is_relative()) *p = base_dir / *p;
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::vector<std::pair<std::string, std::string>> canonical_entries(const ExperimentConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Key& k : keys()) out.emplace_back(k.name, k.get(config));
  return out;
}

bool is_volatile_key(std::string_view key) {
  return key == "interactions" || key == "user_features" || key == "item_features" || key == "out" ||
         key == "workers";
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 14695981039346656037ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [key, value] : canonical_entries(config)) {
    if (is_volatile_key(key)) continue;
    feed(key);
    feed("=");
    feed(value);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PretrainConfig make_pretrain_config(const ExperimentConfig& config) {
  PretrainConfig p;
  p.kind = config.pretrainer.value_or(PretrainerKind::com_p);
  p.encoder.dim = config.dim;
  p.encoder.layers = config.layers;
  p.encoder.bases = config.bases;
  p.encoder.dropout = config.dropout;
  p.encoder.l2 = config.lambda;
  p.training.adam.learning_rate = config.lr;
  p.training.batch_size = config.batch_size;
  p.training.negatives_per_positive = config.negatives;
  p.training.max_epochs = config.max_epochs;
  p.training.patience = config.patience;
  p.similarity_threshold = config.similarity_threshold;
  if (config.relation_cap > 0) p.relation_cap = config.relation_cap;
  return p;
}

FinetuneConfig make_finetune_config(const ExperimentConfig& config) {
  FinetuneConfig f;
  f.kind = config.finetuner;
  f.model.dim = config.dim;
  f.model.l2 = config.finetune_lambda.value_or(config.lambda);
  f.model.lightgcn_layers = config.lightgcn_layers;
  f.training.adam.learning_rate = config.finetune_lr.value_or(config.lr);
  f.training.batch_size = config.batch_size;
  f.training.negatives_per_positive = config.negatives;
  f.training.max_epochs = config.max_epochs;
  f.training.patience = config.patience;
  f.cutoffs = config.cutoffs;
  return f;
}

}  // namespace pretrec
