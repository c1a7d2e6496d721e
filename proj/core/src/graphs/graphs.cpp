#include "pretrec/graphs/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "pretrec/error.hpp"
#include "text_util.hpp"

namespace pretrec {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("cosine_similarity: lengths " + std::to_string(a.size()) + " and " +
                      std::to_string(b.size()) + " differ");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

SparseMatrix normalize_adjacency(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw DataError("normalize_adjacency: matrix is not square");
  const std::size_t n = a.rows();
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  std::vector<double> degree(n, 1.0);  // the added identity
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t p = offsets[r]; p < offsets[r + 1]; ++p) {
      if (vals[p] < 0.0) throw DataError("normalize_adjacency: negative weight");
      if (std::abs(vals[p] - a.at(cols[p], r)) > 1e-12) {
        throw DataError("normalize_adjacency: asymmetric entry (" + std::to_string(r) + ", " +
                        std::to_string(cols[p]) + ")");
      }
      degree[r] += vals[p];
    }
  }
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);
  std::vector<Triplet> t;
  t.reserve(a.nonzeros() + n);
  for (std::size_t r = 0; r < n; ++r) {
    t.push_back({r, r, inv_sqrt[r] * inv_sqrt[r]});
    for (std::size_t p = offsets[r]; p < offsets[r + 1]; ++p)
      t.push_back({r, cols[p], inv_sqrt[r] * vals[p] * inv_sqrt[cols[p]]});
  }
  return SparseMatrix(n, n, std::move(t));
}

SingleRelGraph build_single_rel_graph(const FeatureMatrix& f, double threshold) {
  if (threshold < 0.0) throw ConfigError("similarity threshold must be >= 0");
  const std::size_t n = f.entity_count();
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = cosine_similarity(f.row(i), f.row(j));
      if (w > threshold) {
        t.push_back({i, j, w});
        t.push_back({j, i, w});
      }
    }
  }
  SingleRelGraph g;
  g.node_count = n;
  g.threshold = threshold;
  g.adjacency = SparseMatrix(n, n, std::move(t));
  g.normalized = normalize_adjacency(g.adjacency);
  return g;
}

MultiRelGraph::MultiRelGraph(std::size_t node_count, std::vector<RelationInfo> relations,
                             std::vector<TypedEdge> edges)
    : node_count_(node_count), relations_(std::move(relations)), edges_(std::move(edges)) {
  for (const auto& e : edges_) {
    if (e.source >= node_count_ || e.target >= node_count_ || e.relation >= relations_.size()) {
      throw ConfigError("MultiRelGraph: edge references an unknown node or relation");
    }
  }
  std::sort(edges_.begin(), edges_.end());
  extended_ = extend_edges(edges_, node_count_, relations_.size());
}

std::size_t MultiRelGraph::inverse_of(std::size_t r) const {
  const std::size_t R = relations_.size();
  if (r < R) return r + R;
  if (r < 2 * R) return r - R;
  if (r == 2 * R) return r;
  throw ConfigError("relation id " + std::to_string(r) + " out of range");
}

RelationDirection MultiRelGraph::direction(std::size_t r) const {
  const std::size_t R = relations_.size();
  if (r < R) return RelationDirection::original;
  if (r < 2 * R) return RelationDirection::inverse;
  if (r == 2 * R) return RelationDirection::self_loop;
  throw ConfigError("relation id " + std::to_string(r) + " out of range");
}

std::vector<TypedEdge> extend_edges(std::span<const TypedEdge> edges, std::size_t node_count,
                                    std::size_t relation_count) {
  const std::size_t R = relation_count;
  std::vector<TypedEdge> out;
  out.reserve(2 * edges.size() + node_count);
  for (const auto& e : edges) {
    if (e.relation == 2 * R) {
      if (e.source != e.target) throw ConfigError("extend_edges: self-loop relation on a non-loop edge");
      continue;  // re-added below
    }
    if (e.relation > 2 * R) throw ConfigError("extend_edges: relation out of range");
    const std::size_t reversed = e.relation < R ? e.relation + R : e.relation - R;
    out.push_back(e);
    out.push_back({e.target, e.source, reversed});
  }
  for (std::size_t u = 0; u < node_count; ++u) out.push_back({u, u, 2 * R});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

MultiRelGraph build_multi_rel_graph(const FeatureMatrix& f, std::optional<std::size_t> cap,
                                    RngStream rng) {
  const std::size_t n = f.entity_count();
  if (cap && *cap == 0) throw ConfigError("per-relation cap must be >= 1");
  std::vector<RelationInfo> relations;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t c = 0; c < f.feature_count(); ++c) {
    if (f.kinds[c] == ColumnKind::real) {
      throw ConfigError("build_multi_rel_graph: column " + std::to_string(c) +
                        " is real-valued; categorize it first");
    }
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t e = 0; e < n; ++e) {
      const double v = f.values(e, c);
      if (v != 0.0) groups[v].push_back(e);
    }
    for (auto& [value, group] : groups) {
      relations.push_back({c, value});
      members.push_back(std::move(group));
    }
  }
  std::vector<TypedEdge> edges;
  for (std::size_t r = 0; r < relations.size(); ++r) {
    const auto& group = members[r];
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < group.size(); ++a)
      for (std::size_t b = a + 1; b < group.size(); ++b) pairs.emplace_back(group[a], group[b]);
    if (cap) {
      RngStream rel_rng = rng.split(r);
      rel_rng.shuffle(pairs);
      std::map<std::size_t, std::size_t> degree;
      for (auto [i, j] : pairs) {
        if (degree[i] < *cap && degree[j] < *cap) {
          ++degree[i];
          ++degree[j];
          edges.push_back({i, j, r});
        }
      }
    } else {
      for (auto [i, j] : pairs) edges.push_back({i, j, r});
    }
  }
  return MultiRelGraph(n, std::move(relations), std::move(edges));
}

FeatureDropResult drop_features(const FeatureMatrix& f, double ratio, RngStream rng) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw ConfigError("feature dropout ratio must lie in [0, 1)");
  const std::size_t k = f.feature_count();
  // Guard against ratio * k landing a rounding error above an integer (0.6 * 5 = 3.0000000000000004).
  const auto drop = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(k) - 1e-9));
  FeatureDropResult out{f, rng.sample_without_replacement(k, drop)};
  std::sort(out.dropped_columns.begin(), out.dropped_columns.end());
  for (std::size_t c : out.dropped_columns)
    for (std::size_t e = 0; e < f.entity_count(); ++e) out.features.values(e, c) = 0.0;
  return out;
}

namespace {

std::ofstream open_dump(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void dump_single_rel_graph(const SingleRelGraph& g, const std::filesystem::path& path) {
  auto out = open_dump(path);
  const auto offsets = g.adjacency.row_offsets();
  for (std::size_t r = 0; r < g.node_count; ++r)
    for (std::size_t p = offsets[r]; p < offsets[r + 1]; ++p)
      out << r << '\t' << g.adjacency.col_indices()[p] << '\t'
          << detail::format_real17(g.adjacency.values()[p]) << '\n';
}

void dump_multi_rel_edges(const MultiRelGraph& g, const std::filesystem::path& path) {
  auto out = open_dump(path);
  for (const auto& e : g.extended_edges()) out << e.source << '\t' << e.target << '\t' << e.relation << '\n';
}

void dump_relation_catalogue(const MultiRelGraph& g, const std::filesystem::path& path) {
  auto out = open_dump(path);
  const auto rels = g.relations();
  for (std::size_t r = 0; r < rels.size(); ++r)
    out << r << '\t' << rels[r].column << '\t' << detail::format_real17(rels[r].value) << '\n';
}

}  // namespace pretrec
