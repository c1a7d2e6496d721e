// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>

#include <boost/math/distributions/students_t.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pretrec/app/experiment.hpp"
#include "pretrec/numeric/gradcheck.hpp"
#include "pretrec/parallel.hpp"
#include "test_support.hpp"

using namespace pretrec;
using test::random_tensor;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 30.0;
constexpr double kOracleTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-12;
constexpr double kSpectralSlack = 1e-9;
constexpr double kMetricTolerance = 1e-12;
constexpr double kSignificance = 0.05;
constexpr double kDeskSeconds = 15.0 * 60.0;
constexpr std::size_t kDeskSeeds = 10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void verdict(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_diff(const Tensor2& got, const oracle::Dense& want) {
  double worst = 0.0;
  for (std::size_t r = 0; r < got.rows(); ++r)
    for (std::size_t c = 0; c < got.cols(); ++c) worst = std::max(worst, std::abs(got(r, c) - want[r][c]));
  return worst;
}

double model_grad_error(TrainableModel& model, const TrainBatch& batch) {
  const auto params = model.parameters();
  auto loss = [&](Tape& tape) {
    RngStream unused(0);
    return model.batch_loss(tape, batch, unused);
  };
  return finite_difference_check(loss, params).max_relative_error;
}

void randomize(TrainableModel& model, RngStream& rng, std::string_view only = {}) {
  for (Parameter* p : model.parameters())
    if (only.empty() || p->name.find(only) != std::string::npos)
      p->value = random_tensor(p->value.rows(), p->value.cols(), rng);
}

// --- 1 ---------------------------------------------------------------------------------------

void gradient_suite() {
  const auto start = Clock::now();
  RngStream rng(101);
  double worst[4] = {0, 0, 0, 0};
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = test::tiny_instance(rng);
    const std::size_t n = inst.interactions.n_users, m = inst.interactions.n_items;
    const std::size_t d = 1 + rng.uniform_index(5);
    const EncoderConfig enc{.dim = d, .layers = 2, .bases = 2, .dropout = 0.0, .l2 = 0.01};
    GcnPModel gcn(build_single_rel_graph(inst.user_features).normalized,
                  build_single_rel_graph(inst.item_features).normalized, enc, RngStream(trial));
    ComPModel comp(build_multi_rel_graph(inst.user_features), build_multi_rel_graph(inst.item_features), enc,
                   RngStream(trial));
    // Unit-scale features keep ReLU pre-activations away from the kink.
    randomize(gcn, rng, "features");
    randomize(comp, rng, "features");
    const FinetuneModelConfig fcfg{.dim = d, .l2 = 0.05, .lightgcn_layers = 2};
    NcfModel ncf(n, m, fcfg, RngStream(trial));
    randomize(ncf, rng);
    LightGcnModel lg(inst.interactions, fcfg, RngStream(trial));
    worst[0] = std::max(worst[0], model_grad_error(gcn, inst.batch));
    worst[1] = std::max(worst[1], model_grad_error(comp, inst.batch));
    worst[2] = std::max(worst[2], model_grad_error(ncf, inst.batch));
    worst[3] = std::max(worst[3], model_grad_error(lg, inst.batch));
  }
  const double secs = seconds_since(start);
  const bool pass = *std::max_element(worst, worst + 4) < kGradTolerance && secs < kGradSeconds;
  verdict(1, "gradient suite", pass,
          fmt("max rel err gcn-p %.2e, com-p %.2e, ncf %.2e, lightgcn %.2e (tol %.0e); %.1f s (limit %.0f s)", worst[0],
              worst[1], worst[2], worst[3], kGradTolerance, secs, kGradSeconds));
}

// --- 2 ---------------------------------------------------------------------------------------

void equivalence_oracles() {
  RngStream rng(202);
  double gcn_worst = 0.0, comp_worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(10), d = 1 + rng.uniform_index(5), o = 1 + rng.uniform_index(5);
    Tensor2 a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.bernoulli(0.4)) a(i, j) = a(j, i) = rng.uniform(0.05, 1.0);
    const auto a_hat = normalize_adjacency(SparseMatrix::from_dense(a));
    const Tensor2 h = random_tensor(n, d, rng), w = random_tensor(d, o, rng);
    const bool relu = trial % 2 == 0;
    Tape tape;
    RngStream unused(0);
    const Tensor2 got = gcn_layer_forward(tape.constant(h), a_hat, tape.constant(w),
                                          relu ? Activation::relu : Activation::identity, 0.0, unused, false)
                            .value();
    gcn_worst = std::max(gcn_worst, max_diff(got, oracle::gcn_message_passing(oracle::to_dense(a_hat.to_dense()),
                                                                              oracle::to_dense(h), oracle::to_dense(w),
                                                                              relu)));
  }
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(10), d = 1 + rng.uniform_index(4), o = 1 + rng.uniform_index(4);
    const auto g = build_multi_rel_graph(test::random_binary_features(n, 1 + rng.uniform_index(4), 0.5, rng));
    const auto ops = CompGcnOperators::build(g);
    const Tensor2 h = random_tensor(n, d, rng), z = random_tensor(g.extended_relation_count(), d, rng);
    const Tensor2 w[3] = {random_tensor(d, o, rng), random_tensor(d, o, rng), random_tensor(d, o, rng)};
    const bool relu = trial % 2 == 1;
    Tape tape;
    RngStream unused(0);
    const CompGcnWeights cw{{tape.constant(w[0]), tape.constant(w[1]), tape.constant(w[2])},
                            tape.constant(random_tensor(d, d, rng))};
    const auto out = compgcn_layer_forward(tape.constant(h), tape.constant(z), ops, cw,
                                           relu ? Activation::relu : Activation::identity, 0.0, unused, false);
    std::vector<oracle::Edge> edges;
    for (const auto& e : g.extended_edges()) edges.push_back({e.source, e.target, e.relation});
    const oracle::Dense wd[3] = {oracle::to_dense(w[0]), oracle::to_dense(w[1]), oracle::to_dense(w[2])};
    comp_worst = std::max(comp_worst, max_diff(out.h.value(), oracle::compgcn_node_by_node(
                                                                  edges, g.relation_count(), oracle::to_dense(h),
                                                                  oracle::to_dense(z), wd, relu)));
  }
  verdict(2, "equivalence oracles", gcn_worst <= kOracleTolerance && comp_worst <= kOracleTolerance,
          fmt("GCN matrix vs message passing max |diff| %.2e over 50 graphs; COM-P vs edge-wise oracle %.2e over 50 "
              "typed graphs (tol %.0e)",
              gcn_worst, comp_worst, kOracleTolerance));
}

// --- 3 ---------------------------------------------------------------------------------------

void graph_invariants() {
  RngStream rng(303);
  double asym = 0.0, min_entry = 0.0, max_norm = 0.0;
  std::size_t count_mismatch = 0, idempotence_failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(20), k = 1 + rng.uniform_index(6);
    FeatureMatrix f = test::random_binary_features(n, k, 0.4, rng);
    if (trial % 2 == 1) {
      for (double& v : f.values.values()) v = rng.bernoulli(0.6) ? rng.uniform(0.0, 3.0) : 0.0;
      f.infer_kinds();
    }
    const Tensor2 a_hat = build_single_rel_graph(f).normalized.to_dense();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        asym = std::max(asym, std::abs(a_hat(i, j) - a_hat(j, i)));
        min_entry = std::min(min_entry, a_hat(i, j));
      }
    }
    max_norm = std::max(max_norm, oracle::spectral_norm(oracle::to_dense(a_hat)));

    const auto binary = test::random_binary_features(n, k, 0.4, rng);
    const auto g = build_multi_rel_graph(binary);
    std::size_t pairs = 0;
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t group = 0;
      for (std::size_t e = 0; e < n; ++e) group += binary.values(e, c) != 0.0;
      pairs += group * (group - (group > 0)) / 2;
    }
    count_mismatch += g.edges().size() != pairs;
    const auto twice = extend_edges(g.extended_edges(), n, g.relation_count());
    idempotence_failures += std::vector<TypedEdge>(g.extended_edges().begin(), g.extended_edges().end()) != twice;
  }
  const bool pass = asym <= kSymmetryTolerance && min_entry >= 0.0 && max_norm <= 1.0 + kSpectralSlack &&
                    count_mismatch == 0 && idempotence_failures == 0;
  verdict(3, "graph invariants", pass,
          fmt("100 matrices: max asymmetry %.2e, min entry %.2e, max spectral norm %.12f; edge-count mismatches %zu; "
              "non-idempotent extensions %zu",
              asym, min_entry, max_norm, count_mismatch, idempotence_failures));
}

// --- 4 ---------------------------------------------------------------------------------------

class PerUserScorer final : public Scorer {
 public:
  explicit PerUserScorer(std::size_t items) : items_(items) {}
  std::size_t item_count() const override { return items_; }
  void score(std::size_t user, std::span<const std::size_t> items, std::span<double> out) const override {
    const auto& table = scores.at(user);
    for (std::size_t c = 0; c < items.size(); ++c) out[c] = table.at(items[c]);
  }
  std::vector<std::unordered_map<std::size_t, double>> scores;

 private:
  std::size_t items_;
};

void metric_oracle() {
  RngStream rng(404);
  const std::size_t cutoffs[] = {1, 3, 5, 10, 20, 50};
  constexpr std::size_t kVectors = 1000, kItems = 500;
  EvalCandidateSet set;
  PerUserScorer scorer(kItems);
  std::vector<std::vector<double>> vectors;
  std::vector<std::vector<std::size_t>> lists;
  for (std::size_t u = 0; u < kVectors; ++u) {
    const auto picks = rng.sample_without_replacement(kItems, 101);
    std::vector<double> s(101);
    // Half the vectors use coarse values so that exact ties are common.
    for (double& v : s) v = u % 2 ? std::floor(rng.uniform(0.0, 8.0)) : rng.normal(0.0, 1.0);
    set.users.push_back({u, picks[0], {picks.begin() + 1, picks.end()}, false});
    scorer.scores.emplace_back();
    for (std::size_t c = 0; c < 101; ++c) scorer.scores.back()[picks[c]] = s[c];
    vectors.push_back(std::move(s));
    lists.push_back(picks);
  }
  const auto ev = evaluate_set(scorer, set, cutoffs);
  double worst = 0.0;
  std::size_t idx = 0;
  for (Metric m : kAllMetrics) {
    for (std::size_t k : cutoffs) {
      const auto& rep = ev.metrics[idx++];
      for (std::size_t u = 0; u < kVectors; ++u) {
        const std::size_t r = oracle::naive_rank(vectors[u], lists[u]);
        const double want = m == Metric::ndcg     ? oracle::naive_ndcg(r, k)
                            : m == Metric::recall ? oracle::naive_recall(r, k)
                                                  : oracle::naive_map(r, k);
        worst = std::max(worst, std::abs(rep.per_user[u] - want));
      }
    }
  }
  // All-equal scores: the positive is placed after every candidate with a smaller item index.
  std::size_t tie_failures = 0;
  for (int t = 0; t < 100; ++t) {
    const auto items = rng.sample_without_replacement(kItems, 101);
    const std::vector<double> flat(101, 0.5);
    const std::size_t smaller = static_cast<std::size_t>(
        std::count_if(items.begin() + 1, items.end(), [&](std::size_t i) { return i < items[0]; }));
    tie_failures += rank_candidates(flat, items).positive_rank != smaller + 1;
  }
  verdict(4, "metric oracle", worst <= kMetricTolerance && tie_failures == 0,
          fmt("1000 score vectors x k in {1,3,5,10,20,50} x 3 metrics: max |diff| %.2e (tol %.0e); all-equal tie "
              "rule failures %zu/100",
              worst, kMetricTolerance, tie_failures));
}

// --- 5 ---------------------------------------------------------------------------------------

void locality() {
  RngStream rng(505);
  std::size_t checked = 0, violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(8), m = 2 + rng.uniform_index(8);
    const EncoderConfig cfg{.dim = 1 + rng.uniform_index(6), .layers = 1, .bases = 2};
    GcnPModel gcn(normalize_adjacency(SparseMatrix(n, n, {})), normalize_adjacency(SparseMatrix(m, m, {})), cfg,
                  RngStream(trial));
    ComPModel comp(MultiRelGraph(n, {}, {}), MultiRelGraph(m, {}, {}), cfg, RngStream(trial));
    for (GraphEncoderModel* model : std::initializer_list<GraphEncoderModel*>{&gcn, &comp}) {
      randomize(*model, rng, "features");
      model->refresh();
      const auto before = model->embeddings();
      const std::size_t u = rng.uniform_index(n), i = rng.uniform_index(m);
      auto& uf = model->user_features().value;
      auto& itf = model->item_features().value;
      for (std::size_t r = 0; r < n; ++r)
        if (r != u)
          for (std::size_t c = 0; c < uf.cols(); ++c) uf(r, c) += rng.uniform(-1.0, 1.0);
      for (std::size_t r = 0; r < m; ++r)
        if (r != i)
          for (std::size_t c = 0; c < itf.cols(); ++c) itf(r, c) += rng.uniform(-1.0, 1.0);
      model->refresh();
      const auto after = model->embeddings();
      checked += 2;
      violations += !std::ranges::equal(before.users.row(u), after.users.row(u));
      violations += !std::ranges::equal(before.items.row(i), after.items.row(i));
    }
  }
  verdict(5, "reduction/locality", violations == 0,
          fmt("%zu entity outputs under perturbation of all other entities' features (GCN-P and COM-P, no edges, "
              "L=1): %zu changed",
              checked, violations));
}

// --- 6, 7, 8, 10 (desk-scale runs) -----------------------------------------------------------

const char* kDeskBase =
    "dataset = synthetic\n"
    "dim = 32\nlr = 0.01\nlambda = 0.0001\nbatch_size = 1000\nnegatives = 4\n"
    "max_epochs = 500\npatience = 20\nn_eval = 100\nn_eval_sets = 10\ncutoffs = 1,3,5,10\n";

struct ArmStats {
  double mean = 0.0, std = 0.0;
};

ArmStats stats(const std::vector<double>& v) { return {pretrec::mean(v), population_std(v)}; }

// Paired one-sided t-test of mean(a - b) > 0.
double paired_p_value(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t s = 0; s < a.size(); ++s) d[s] = a[s] - b[s];
  const double n = static_cast<double>(d.size());
  const double mu = pretrec::mean(d);
  double ss = 0.0;
  for (double x : d) ss += (x - mu) * (x - mu);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) return mu > 0.0 ? 0.0 : 1.0;
  const boost::math::students_t dist(n - 1.0);
  return boost::math::cdf(boost::math::complement(dist, mu / (sd / std::sqrt(n))));
}

void desk_scale(const Experiment& gcn_exp, const Experiment& comp_exp) {
  const auto start = Clock::now();
  enum Arm { mf_rand, mf_gcn, mf_comp, lg_rand, lg_comp, ncf_rand, ncf_comp, mf_comp_drop80, kArms };
  const char* names[kArms] = {"mf random", "mf+gcn-p", "mf+com-p", "lightgcn random", "lightgcn+com-p",
                              "ncf random", "ncf+com-p", "mf+com-p dropout 0.8"};
  std::vector<std::vector<double>> values(kArms, std::vector<double>(kDeskSeeds));
  const auto& split = comp_exp.split();
  const auto& validation = comp_exp.validation();
  const auto& tests = comp_exp.test_sets();

  auto job = [&](std::size_t idx) {
    const std::uint64_t seed = idx;
    const auto pre_g = pretrain(make_pretrain_config(gcn_exp.config()), split, gcn_exp.dataset().user_features,
                                gcn_exp.dataset().item_features, validation, seed)
                           .embeddings;
    const auto pre_c = pretrain(make_pretrain_config(comp_exp.config()), split, comp_exp.dataset().user_features,
                                comp_exp.dataset().item_features, validation, seed)
                           .embeddings;
    FinetuneConfig fc = make_finetune_config(comp_exp.config());
    auto ndcg10 = [&](FinetunerKind kind, const EmbeddingSet* emb) {
      fc.kind = kind;
      return run_finetune(fc, split, emb, validation, tests, seed).report.evaluation.value(Metric::ndcg, 10);
    };
    values[mf_rand][idx] = ndcg10(FinetunerKind::mf_bce, nullptr);
    values[mf_gcn][idx] = ndcg10(FinetunerKind::mf_bce, &pre_g);
    values[mf_comp][idx] = ndcg10(FinetunerKind::mf_bce, &pre_c);
    values[lg_rand][idx] = ndcg10(FinetunerKind::lightgcn, nullptr);
    values[lg_comp][idx] = ndcg10(FinetunerKind::lightgcn, &pre_c);
    values[ncf_rand][idx] = ndcg10(FinetunerKind::ncf, nullptr);
    values[ncf_comp][idx] = ndcg10(FinetunerKind::ncf, &pre_c);
    values[mf_comp_drop80][idx] = comp_exp.seed_metric(seed, 0.8, comp_exp.config().dim, true);
    std::fprintf(stderr, "  seed %zu done (%.0f s)\n", idx, seconds_since(start));
  };
  run_parallel(kDeskSeeds, std::max(1u, std::thread::hardware_concurrency()), job);
  const double secs = seconds_since(start);

  std::string table;
  for (int a = 0; a < kArms; ++a) {
    const auto s = stats(values[a]);
    table += fmt("    %-22s mean %.4f std %.4f :", names[a], s.mean, s.std);
    for (double v : values[a]) table += fmt(" %.4f", v);
    table += "\n";
  }
  std::printf("desk-scale NDCG@10 over %zu seeds (%.0f s):\n%s", kDeskSeeds, secs, table.c_str());

  // 6: effectiveness.
  const std::pair<Arm, Arm> pairs[] = {{mf_gcn, mf_rand}, {mf_comp, mf_rand}, {lg_comp, lg_rand}};
  bool effective = secs < kDeskSeconds;
  std::string detail;
  for (const auto& [pre, rand] : pairs) {
    const double p = paired_p_value(values[pre], values[rand]);
    const bool ok = stats(values[pre]).mean > stats(values[rand]).mean && p < kSignificance;
    effective = effective && ok;
    detail += fmt("%s %.4f vs %.4f (p=%.2e); ", names[pre], stats(values[pre]).mean, stats(values[rand]).mean, p);
  }
  verdict(6, "effectiveness (synthetic)", effective,
          detail + fmt("alpha %.2f; runtime %.0f s (limit %.0f s)", kSignificance, secs, kDeskSeconds));

  // 7: stability.
  const std::pair<Arm, Arm> std_pairs[] = {{mf_comp, mf_rand}, {ncf_comp, ncf_rand}, {lg_comp, lg_rand}};
  int stabler = 0;
  detail.clear();
  for (const auto& [pre, rand] : std_pairs) {
    const double a = stats(values[pre]).std, b = stats(values[rand]).std;
    stabler += a <= b;
    detail += fmt("%s std %.4f vs %.4f; ", names[pre], a, b);
  }
  verdict(7, "stability (synthetic)", stabler >= 2, detail + fmt("%d of 3 fine-tuners at or below random", stabler));

  // 8: ablation trend.
  const double full = stats(values[mf_comp]).mean, dropped = stats(values[mf_comp_drop80]).mean;
  verdict(8, "ablation trend", dropped < full,
          fmt("mf+com-p mean NDCG@10 at feature dropout 0.8 = %.4f, at 0.0 = %.4f", dropped, full));
}

// --- 9 ---------------------------------------------------------------------------------------

void determinism() {
  const test::TempDir a, b;
  const std::string cfg_text = std::string("dataset = synthetic\nsynthetic_users = 60\nsynthetic_items = 60\n"
                                           "synthetic_clusters = 4\ndim = 8\nlayers = 2\nlr = 0.01\n"
                                           "batch_size = 250\nmax_epochs = 15\npatience = 5\nn_eval = 30\n"
                                           "n_eval_sets = 3\npretrainer = com-p\nseeds = 1,2\nseed = 9\n");
  auto ra = Experiment(parse_config(cfg_text + "out = " + a.path().string() + "\n")).run();
  auto rb = Experiment(parse_config(cfg_text + "out = " + b.path().string() + "\n")).run();
  emit_report(ra, a.path());
  emit_report(rb, b.path());
  const bool json_equal = report_json(ra, false) == report_json(rb, false);

  const auto cfg = parse_config(cfg_text + "out = " + a.path().string() + "\n");
  const Experiment exp(cfg);
  const auto direct = pretrain(make_pretrain_config(cfg), exp.split(), exp.dataset().user_features,
                               exp.dataset().item_features, exp.validation(), cfg.seed);
  const auto loaded = load_embeddings(a.path() / "embeddings");
  const bool bit_exact = loaded.users == direct.embeddings.users && loaded.items == direct.embeddings.items;

  // Extreme magnitudes survive the text format too.
  EmbeddingSet odd = direct.embeddings;
  odd.users(0, 0) = 5e-324;
  odd.users(1, 0) = -1.7976931348623157e308;
  odd.items(0, 0) = 0.1 + 0.2;
  save_embeddings(odd, b.path() / "odd");
  const auto odd_back = load_embeddings(b.path() / "odd");
  const bool odd_exact = odd_back.users == odd.users && odd_back.items == odd.items;

  verdict(9, "determinism & round-trip", json_equal && bit_exact && odd_exact,
          fmt("report JSON (timestamps/paths excluded) identical: %s, %zu bytes; saved embeddings bit-exact: %s; "
              "extreme values bit-exact: %s",
              json_equal ? "yes" : "no", report_json(ra, false).size(), bit_exact ? "yes" : "no",
              odd_exact ? "yes" : "no"));
}

// --- 10 --------------------------------------------------------------------------------------

// Validation quality rises for `improve_until` epochs, then freezes.
class ScriptedModel final : public TrainableModel {
 public:
  explicit ScriptedModel(std::size_t improve_until) : improve_until_(improve_until), p_("p", Tensor2(1, 1)) {}
  std::vector<Parameter*> parameters() override { return {&p_}; }
  std::size_t item_count() const override { return 200; }
  void score(std::size_t user, std::span<const std::size_t> items, std::span<double> out) const override {
    const double q = static_cast<double>(std::min(quality_, improve_until_));
    for (std::size_t c = 0; c < items.size(); ++c) out[c] = c == 0 ? q : static_cast<double>(user) + 0.5;
  }
  Var batch_loss(Tape& tape, const TrainBatch&, RngStream&) override { return sum(tape.parameter(p_)); }
  void refresh() override { quality_ = refreshes_++; }

 private:
  std::size_t improve_until_;
  std::size_t refreshes_ = 0, quality_ = 0;
  Parameter p_;
};

void protocol(const Experiment& desk) {
  RngStream rng(1010);
  // User u's positive overtakes its negatives once quality exceeds u, so the metric keeps
  // rising for 40 refreshes.
  const auto train = test::random_train_matrix(40, 200, 0.05, rng);
  EvalCandidateSet validation;
  for (std::size_t u = 0; u < 40; ++u) {
    UserCandidates uc{u, 100 + u, {}, false};
    for (std::size_t i = 0; i < 100; ++i) uc.negatives.push_back(i);
    validation.users.push_back(uc);
  }
  std::size_t stop_errors = 0;
  std::string stops;
  for (std::size_t last : {1, 2, 7, 30}) {
    ScriptedModel model(last);
    const auto r = train_with_early_stopping(model, train, validation, {.batch_size = 50, .patience = 20}, RngStream(1));
    stop_errors += r.best_epoch != last || r.epochs_run != last + 20;
    stops += fmt("%zu->%zu ", r.best_epoch, r.epochs_run);
  }

  // Candidate-set shape and averaging on the desk-scale split.
  const auto& sets = desk.test_sets();
  const UserItemIndex index(desk.split());
  std::size_t shape_errors = 0;
  for (const auto& s : sets) {
    for (const auto& uc : s.users) {
      std::set<std::size_t> distinct(uc.negatives.begin(), uc.negatives.end());
      shape_errors += uc.negatives.size() != 100 || distinct.size() != 100 || distinct.contains(uc.positive);
      for (std::size_t i : uc.negatives) shape_errors += index.interacted(uc.user, i);
      shape_errors += index.held_out(uc.user, Split::test) != uc.positive;
    }
  }
  const EmbeddingScorer scorer(random_tensor(desk.split().n_users, 4, rng), random_tensor(desk.split().n_items, 4, rng));
  const auto rep = evaluate(scorer, sets, desk.config().cutoffs);
  double avg_err = 0.0;
  for (const auto& summary : rep.averaged) {
    double total = 0.0;
    for (std::size_t s = 0; s < sets.size(); ++s) {
      const EvalCandidateSet one[] = {sets[s]};
      total += evaluate(scorer, one, desk.config().cutoffs).value(summary.metric, summary.k);
    }
    avg_err = std::max(avg_err, std::abs(summary.mean - total / static_cast<double>(sets.size())));
  }
  const bool pass = stop_errors == 0 && sets.size() == 10 && shape_errors == 0 && avg_err < 1e-12;
  verdict(10, "protocol conformance", pass,
          fmt("best->stop epochs %s(patience 20); %zu test sets, candidate-shape violations %zu; set-average error "
              "%.1e",
              stops.c_str(), sets.size(), shape_errors, avg_err));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  gradient_suite();
  equivalence_oracles();
  graph_invariants();
  metric_oracle();
  locality();

  const Experiment gcn_exp(parse_config(std::string(kDeskBase) +
                                        "pretrainer = gcn-p\nlayers = 1\nsimilarity_threshold = 0.5\n"));
  const Experiment comp_exp(parse_config(std::string(kDeskBase) +
                                         "pretrainer = com-p\nlayers = 2\nrelation_cap = 10\ndropout = 0.3\n"));
  desk_scale(gcn_exp, comp_exp);
  determinism();
  protocol(comp_exp);
  std::printf("%d criteria failed; total %.0f s\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
