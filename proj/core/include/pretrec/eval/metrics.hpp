#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pretrec/data/sampling.hpp"
#include "pretrec/numeric/tensor.hpp"

namespace pretrec {

enum class Metric : std::uint8_t { ndcg, recall, map };
std::string_view to_string(Metric m) noexcept;
inline constexpr Metric kAllMetrics[] = {Metric::ndcg, Metric::recall, Metric::map};

// Candidates ordered by descending score, exact ties by ascending item index.
struct RankedList {
  std::size_t user = 0;
  std::vector<std::size_t> items;
  std::size_t positive_rank = 0;  // 1-based
};

// Candidate 0 is the held-out positive. A NaN score raises EvaluationError naming `user`.
RankedList rank_candidates(std::span<const double> scores, std::span<const std::size_t> items,
                           std::size_t user = 0);

// Single-relevant-item forms; rank is 1-based.
double ndcg_at_k(std::size_t rank, std::size_t k);
double recall_at_k(std::size_t rank, std::size_t k);
double map_at_k(std::size_t rank, std::size_t k);
double metric_at_k(Metric m, std::size_t rank, std::size_t k);

// Anything that can score (user, item) pairs.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::size_t item_count() const = 0;
  virtual void score(std::size_t user, std::span<const std::size_t> items,
                     std::span<double> out) const = 0;
};

// U_u . V_i + b_u + b_i + global.
class EmbeddingScorer final : public Scorer {
 public:
  EmbeddingScorer(Tensor2 users, Tensor2 items, std::vector<double> user_bias = {},
                  std::vector<double> item_bias = {}, double global_bias = 0.0);

  std::size_t item_count() const override { return items_.rows(); }
  void score(std::size_t user, std::span<const std::size_t> items,
             std::span<double> out) const override;

 private:
  Tensor2 users_;
  Tensor2 items_;
  std::vector<double> user_bias_;
  std::vector<double> item_bias_;
  double global_bias_;
};

struct MetricReport {
  Metric metric = Metric::ndcg;
  std::size_t k = 10;
  std::vector<double> per_user;
  double mean = 0.0;
};

struct SetEvaluation {
  std::uint64_t seed = 0;
  std::vector<std::size_t> users;
  std::vector<std::size_t> ranks;
  std::vector<MetricReport> metrics;  // metric-major, cut-offs in configured order
};

struct MetricSummary {
  Metric metric = Metric::ndcg;
  std::size_t k = 10;
  std::vector<double> per_set;
  double mean = 0.0;
};

struct EvaluationReport {
  std::vector<std::size_t> cutoffs;
  std::vector<SetEvaluation> sets;
  std::vector<MetricSummary> averaged;

  // Mean over sets; throws EvaluationError for an unreported (metric, k).
  double value(Metric m, std::size_t k) const;
};

SetEvaluation evaluate_set(const Scorer& scorer, const EvalCandidateSet& set,
                           std::span<const std::size_t> cutoffs);
// Per-user metrics, then per-set means, then the mean over sets.
EvaluationReport evaluate(const Scorer& scorer, std::span<const EvalCandidateSet> sets,
                          std::span<const std::size_t> cutoffs);
// Mean NDCG@k over one set's users (0 for an empty set).
double mean_ndcg(const Scorer& scorer, const EvalCandidateSet& set, std::size_t k = 10);

}  // namespace pretrec
