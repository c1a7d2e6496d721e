#include "pretrec/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pretrec/error.hpp"

namespace pretrec {

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::ndcg: return "ndcg";
    case Metric::recall: return "recall";
    case Metric::map: return "map";
  }
  return "?";
}

namespace {

void check_scores(std::span<const double> scores, std::size_t user) {
  for (double s : scores)
    if (std::isnan(s)) throw EvaluationError("NaN score for user " + std::to_string(user));
}

// 1-based position of candidate 0 under the descending-score, ascending-item order.
std::size_t positive_rank(std::span<const double> scores, std::span<const std::size_t> items) {
  std::size_t ahead = 0;
  for (std::size_t c = 1; c < scores.size(); ++c)
    ahead += scores[c] > scores[0] || (scores[c] == scores[0] && items[c] < items[0]);
  return ahead + 1;
}

void check_rank(std::size_t rank) {
  if (rank == 0) throw EvaluationError("rank must be >= 1");
}

}  // namespace

RankedList rank_candidates(std::span<const double> scores, std::span<const std::size_t> items,
                           std::size_t user) {
  if (scores.size() != items.size() || scores.empty())
    throw EvaluationError("rank_candidates: need one score per candidate for user " + std::to_string(user));
  check_scores(scores, user);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return items[a] < items[b];
  });
  RankedList out;
  out.user = user;
  out.items.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    out.items.push_back(items[order[pos]]);
    if (order[pos] == 0) out.positive_rank = pos + 1;
  }
  return out;
}

double ndcg_at_k(std::size_t rank, std::size_t k) {
  check_rank(rank);
  return rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

double recall_at_k(std::size_t rank, std::size_t k) {
  check_rank(rank);
  return rank <= k ? 1.0 : 0.0;
}

double map_at_k(std::size_t rank, std::size_t k) {
  check_rank(rank);
  return rank <= k ? 1.0 / static_cast<double>(rank) : 0.0;
}

double metric_at_k(Metric m, std::size_t rank, std::size_t k) {
  switch (m) {
    case Metric::ndcg: return ndcg_at_k(rank, k);
    case Metric::recall: return recall_at_k(rank, k);
    case Metric::map: return map_at_k(rank, k);
  }
  return 0.0;
}

EmbeddingScorer::EmbeddingScorer(Tensor2 users, Tensor2 items, std::vector<double> user_bias,
                                 std::vector<double> item_bias, double global_bias)
    : users_(std::move(users)),
      items_(std::move(items)),
      user_bias_(std::move(user_bias)),
      item_bias_(std::move(item_bias)),
      global_bias_(global_bias) {
  if (users_.cols() != items_.cols()) throw ConfigError("EmbeddingScorer: user/item dimensions differ");
  if (user_bias_.empty()) user_bias_.assign(users_.rows(), 0.0);
  if (item_bias_.empty()) item_bias_.assign(items_.rows(), 0.0);
  if (user_bias_.size() != users_.rows() || item_bias_.size() != items_.rows())
    throw ConfigError("EmbeddingScorer: bias length does not match the entity count");
}

void EmbeddingScorer::score(std::size_t user, std::span<const std::size_t> items,
                            std::span<double> out) const {
  const auto u = users_.row(user);
  for (std::size_t c = 0; c < items.size(); ++c) {
    const auto v = items_.row(items[c]);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
    out[c] = s + user_bias_[user] + item_bias_[items[c]] + global_bias_;
  }
}

double EvaluationReport::value(Metric m, std::size_t k) const {
  for (const auto& s : averaged)
    if (s.metric == m && s.k == k) return s.mean;
  throw EvaluationError(std::string("metric ") + std::string(to_string(m)) + "@" + std::to_string(k) +
                        " was not evaluated");
}

namespace {

// Ranks of each user's positive within its candidate list.
void rank_users(const Scorer& scorer, const EvalCandidateSet& set, std::vector<std::size_t>& users,
                std::vector<std::size_t>& ranks) {
  std::vector<std::size_t> items;
  std::vector<double> scores;
  for (const auto& uc : set.users) {
    items.assign(1, uc.positive);
    items.insert(items.end(), uc.negatives.begin(), uc.negatives.end());
    for (std::size_t i : items) {
      if (i >= scorer.item_count()) {
        throw EvaluationError("candidate item " + std::to_string(i) + " for user " +
                              std::to_string(uc.user) + " is outside the item range");
      }
    }
    scores.assign(items.size(), 0.0);
    scorer.score(uc.user, items, scores);
    check_scores(scores, uc.user);
    users.push_back(uc.user);
    ranks.push_back(positive_rank(scores, items));
  }
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

SetEvaluation evaluate_set(const Scorer& scorer, const EvalCandidateSet& set,
                           std::span<const std::size_t> cutoffs) {
  SetEvaluation out;
  out.seed = set.seed;
  rank_users(scorer, set, out.users, out.ranks);
  for (Metric m : kAllMetrics) {
    for (std::size_t k : cutoffs) {
      MetricReport rep{m, k, {}, 0.0};
      rep.per_user.reserve(out.ranks.size());
      for (std::size_t r : out.ranks) rep.per_user.push_back(metric_at_k(m, r, k));
      rep.mean = mean_of(rep.per_user);
      out.metrics.push_back(std::move(rep));
    }
  }
  return out;
}

EvaluationReport evaluate(const Scorer& scorer, std::span<const EvalCandidateSet> sets,
                          std::span<const std::size_t> cutoffs) {
  if (sets.empty()) throw EvaluationError("evaluate: no candidate sets");
  EvaluationReport out;
  out.cutoffs.assign(cutoffs.begin(), cutoffs.end());
  for (const auto& s : sets) out.sets.push_back(evaluate_set(scorer, s, cutoffs));
  for (std::size_t idx = 0; idx < out.sets.front().metrics.size(); ++idx) {
    const auto& first = out.sets.front().metrics[idx];
    MetricSummary summary{first.metric, first.k, {}, 0.0};
    for (const auto& s : out.sets) summary.per_set.push_back(s.metrics[idx].mean);
    summary.mean = mean_of(summary.per_set);
    out.averaged.push_back(std::move(summary));
  }
  return out;
}

double mean_ndcg(const Scorer& scorer, const EvalCandidateSet& set, std::size_t k) {
  std::vector<std::size_t> users, ranks;
  rank_users(scorer, set, users, ranks);
  if (ranks.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t r : ranks) total += ndcg_at_k(r, k);
  return total / static_cast<double>(ranks.size());
}

}  // namespace pretrec
