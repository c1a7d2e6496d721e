#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pretrec/data/interactions.hpp"
#include "pretrec/numeric/tensor.hpp"

namespace pretrec {

enum class ColumnKind : std::uint8_t {
  binary,              // 0/1 presence (tags, bag-of-words hits)
  categorical_onehot,  // one member of a one-hot group produced by categorize_real_feature
  real,                // must be categorized before multi-relational use
};

// Dense entity x feature matrix with a per-column kind. Values are non-negative.
struct FeatureMatrix {
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t entities, std::size_t features)
      : values(entities, features), kinds(features, ColumnKind::binary) {}

  std::size_t entity_count() const noexcept { return values.rows(); }
  std::size_t feature_count() const noexcept { return values.cols(); }
  std::span<const double> row(std::size_t e) const { return values.row(e); }

  // Re-derives kinds: a column is binary when every value is 0 or 1, real otherwise.
  // categorical_onehot columns keep their kind.
  void infer_kinds();
  // Replaces column `col` with the one-hot buckets from categorize_real_feature.
  void categorize_column(std::size_t col, double bin_width, std::size_t bin_count);

  Tensor2 values;
  std::vector<ColumnKind> kinds;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

struct LoadedFeatures {
  FeatureMatrix features;
  std::size_t zero_rows = 0;        // entities with no feature line (or only zeros)
  std::size_t unresolved_ids = 0;   // feature lines whose id is absent from the index map
};

// Reads `#k=<count>` then `entity_id<TAB>f:v[ f:v ...]`. Entities are resolved through `ids`;
// `entity_count` rows are produced and missing entities stay all-zero.
LoadedFeatures load_features(const std::filesystem::path& path, const IndexMap& ids,
                             std::size_t entity_count);
LoadedFeatures parse_features(std::string_view text, const IndexMap& ids, std::size_t entity_count);

void save_features(const FeatureMatrix& f, const IndexMap& ids, const std::filesystem::path& path);

// Bucket of v is min(floor(v / bin_width), bin_count - 1); returns an entity x bin_count one-hot.
// Negative values raise DataError; bin_width <= 0 or bin_count == 0 raise ConfigError.
Tensor2 categorize_real_feature(std::span<const double> values, double bin_width,
                                std::size_t bin_count);

}  // namespace pretrec
