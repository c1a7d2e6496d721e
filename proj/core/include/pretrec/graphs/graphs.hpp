#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pretrec/data/features.hpp"
#include "pretrec/numeric/rng.hpp"
#include "pretrec/numeric/tensor.hpp"

namespace pretrec {

// f_i . f_j / (|f_i| |f_j|), or 0 when either vector is all-zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Cosine-weighted entity graph. `adjacency` is symmetric with a zero diagonal; `normalized` is
// D^-1/2 (A + I) D^-1/2.
struct SingleRelGraph {
  std::size_t node_count = 0;
  SparseMatrix adjacency;
  SparseMatrix normalized;
  double threshold = 0.0;
};

// Edge (i, j), i != j, weighted by cosine(f_i, f_j) whenever that weight exceeds `threshold`.
SingleRelGraph build_single_rel_graph(const FeatureMatrix& f, double threshold = 0.0);

// D^-1/2 (A + I) D^-1/2 with D_ii = sum_j (A + I)_ij. Throws DataError if A is not square,
// has negative entries, or is asymmetric beyond 1e-12.
SparseMatrix normalize_adjacency(const SparseMatrix& a);

enum class RelationDirection : std::uint8_t { original, inverse, self_loop };

// One relation per shared (feature column, category value).
struct RelationInfo {
  std::size_t column = 0;
  double value = 0.0;

  friend bool operator==(const RelationInfo&, const RelationInfo&) = default;
};

// Directed typed edge; the message travels from `source` into `target`.
struct TypedEdge {
  std::size_t source = 0;
  std::size_t target = 0;
  std::size_t relation = 0;

  friend auto operator<=>(const TypedEdge&, const TypedEdge&) = default;
};

// Relation ids: [0, R) original, [R, 2R) inverse (r + R), 2R the self-loop.
class MultiRelGraph {
 public:
  MultiRelGraph() = default;
  MultiRelGraph(std::size_t node_count, std::vector<RelationInfo> relations,
                std::vector<TypedEdge> edges);

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t relation_count() const noexcept { return relations_.size(); }
  std::size_t extended_relation_count() const noexcept { return 2 * relations_.size() + 1; }
  std::size_t self_loop() const noexcept { return 2 * relations_.size(); }
  std::size_t inverse_of(std::size_t r) const;
  RelationDirection direction(std::size_t r) const;

  std::span<const RelationInfo> relations() const noexcept { return relations_; }
  // Original edges, one per unordered pair and shared relation, stored with source < target.
  std::span<const TypedEdge> edges() const noexcept { return edges_; }
  // Original edges plus inverses plus one self-loop per node, sorted.
  std::span<const TypedEdge> extended_edges() const noexcept { return extended_; }

 private:
  std::size_t node_count_ = 0;
  std::vector<RelationInfo> relations_;
  std::vector<TypedEdge> edges_;
  std::vector<TypedEdge> extended_;
};

// Closure under edge reversal (original <-> inverse) plus one self-loop per node; sorted and
// deduplicated, so applying it to its own output is a no-op.
std::vector<TypedEdge> extend_edges(std::span<const TypedEdge> edges, std::size_t node_count,
                                    std::size_t relation_count);

// Every pair of entities sharing a non-zero value in a binary or one-hot column gets an edge of
// that (column, value) relation; pairs sharing several values get parallel edges. With a cap,
// pairs of each relation are visited in random order and kept while both endpoints have fewer
// than `cap` neighbours of that relation. Real-valued columns raise ConfigError.
MultiRelGraph build_multi_rel_graph(const FeatureMatrix& f,
                                    std::optional<std::size_t> per_relation_cap = std::nullopt,
                                    RngStream rng = RngStream(0));

struct FeatureDropResult {
  FeatureMatrix features;
  std::vector<std::size_t> dropped_columns;  // ascending
};

// Zeroes a uniformly sampled ceil(ratio * k)-subset of feature columns for every entity.
FeatureDropResult drop_features(const FeatureMatrix& f, double ratio, RngStream rng);

// Debug dumps: `i<TAB>j<TAB>weight`, `i<TAB>j<TAB>relation_id`, `relation_id<TAB>column<TAB>value`.
void dump_single_rel_graph(const SingleRelGraph& g, const std::filesystem::path& path);
void dump_multi_rel_edges(const MultiRelGraph& g, const std::filesystem::path& path);
void dump_relation_catalogue(const MultiRelGraph& g, const std::filesystem::path& path);

}  // namespace pretrec
