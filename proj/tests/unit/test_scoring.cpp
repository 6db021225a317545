#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mfood/errors.hpp"
#include "mfood/scoring.hpp"
#include "oracles.hpp"

using namespace mfood;
using namespace mfood::testing;

namespace {

FittedScale unit_huber_fit(double k = 0.5) {
  FittedScale f;
  f.kind = FittedScale::Kind::kHuber;
  f.scale = k;
  f.delta_prime = 0.1;
  f.n = 100;
  return f;
}

ManifoldFlowModel random_model(std::size_t dim, std::size_t d, std::uint64_t seed) {
  ManifoldFlowModel m;
  m.split = {d, dim};
  m.base = FlowModel::build(dim, small_flow_config(2), seed);
  randomize(m.base, seed + 1, 0.3);
  return m;
}

std::vector<std::size_t> ranking(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  return idx;
}

}  // namespace

TEST(Bpd, Examples) {
  EXPECT_DOUBLE_EQ(bpd(5 * std::numbers::ln2, 5), 1.0);
  EXPECT_EQ(bpd(0.0, 3), 0.0);
  EXPECT_THROW(bpd(1.0, 0), DomainError);
}

TEST(Bpd, GaussianEntropyMonteCarlo) {
  ManifoldFlowModel m;
  m.split = {2, 2};
  m.base = FlowModel::build(2, small_flow_config(1, false), 0);
  const Tensor x = random_tensor(100000, 2, 1);
  const auto lp = m.base.log_prob(x);
  double mean = 0.0;
  for (double v : lp) mean += bpd(-v, 2);
  mean /= static_cast<double>(lp.size());
  const double expected = (std::log(2 * std::numbers::pi) / 2 + 0.5) * 2 / (2 * std::numbers::ln2);
  EXPECT_NEAR(expected, 2.047, 1e-3);
  EXPECT_NEAR(mean, expected, 0.05);
}

TEST(Auroc, Examples) {
  const std::vector<double> a = {1, 2}, b = {3, 4};
  EXPECT_EQ(auroc(EvalLabeling::from(a, b)), 1.0);
  EXPECT_EQ(auroc(EvalLabeling::from(b, a)), 0.0);
  const std::vector<double> same = {2, 2};
  EXPECT_EQ(auroc(EvalLabeling::from(same, same)), 0.5);
}

TEST(Auroc, MatchesPairwiseOracleIncludingTies) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n_id = 1 + rng.below(60), n_ood = 1 + rng.below(60);
    const std::size_t levels = 2 + rng.below(t % 2 ? 5 : 1000);
    std::vector<double> id(n_id), ood(n_ood);
    for (auto& v : id) v = static_cast<double>(rng.below(levels));
    for (auto& v : ood) v = static_cast<double>(rng.below(levels)) + (t % 3 == 0 ? 0.5 : 0.0);
    EXPECT_EQ(auroc(EvalLabeling::from(id, ood)), pairwise_auroc(id, ood)) << "set " << t;
  }
}

TEST(Auroc, RankInvariances) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> id(40), ood(30);
    for (auto& v : id) v = rng.normal();
    for (auto& v : ood) v = rng.normal() + 0.7;
    const double base = auroc(EvalLabeling::from(id, ood));
    auto map = [](std::vector<double> v, auto f) {
      for (auto& x : v) x = f(x);
      return v;
    };
    const auto cubic = [](double x) { return x * x * x + x; };
    const auto shift = [](double x) { return x + 17.25; };
    EXPECT_EQ(auroc(EvalLabeling::from(map(id, cubic), map(ood, cubic))), base);
    EXPECT_EQ(auroc(EvalLabeling::from(map(id, shift), map(ood, shift))), base);
    EXPECT_NEAR(auroc(EvalLabeling::from(ood, id)), 1.0 - base, 1e-15);
  }
}

TEST(Auroc, Contracts) {
  const std::vector<double> some = {1, 2}, none, with_nan = {1, NAN};
  EXPECT_THROW(auroc(EvalLabeling::from(some, none)), DomainError);
  EXPECT_THROW(auroc(EvalLabeling::from(none, some)), DomainError);
  EXPECT_THROW(auroc(EvalLabeling::from(some, with_nan)), DomainError);
}

TEST(Threshold, ExamplesAndStrictness) {
  const std::vector<double> id = {1, 5, 3};
  EXPECT_EQ(hard_threshold(id), 5.0);
  const std::vector<double> flat = {2, 2, 2};
  const double t = hard_threshold(flat);
  EXPECT_EQ(t, 2.0);
  for (auto c : classify(flat, t)) EXPECT_EQ(c, 0);
  const std::vector<double> probe = {5.0, std::nextafter(5.0, 6.0)};
  EXPECT_EQ(classify(probe, 5.0), (std::vector<std::uint8_t>{0, 1}));
  EXPECT_THROW(hard_threshold(std::vector<double>{}), DomainError);
}

TEST(Threshold, DecisionsInvariantUnderMonotoneMaps) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> id(20), probe(30);
    for (auto& v : id) v = rng.normal();
    for (auto& v : probe) v = rng.normal() * 2.0;
    const double a = 0.1 + rng.uniform(), b = rng.normal();
    auto f = [&](double x) { return std::exp(a * x) + b; };
    std::vector<double> fid = id, fp = probe;
    for (auto& v : fid) v = f(v);
    for (auto& v : fp) v = f(v);
    EXPECT_EQ(classify(probe, hard_threshold(id)), classify(fp, hard_threshold(fid)));
  }
}

TEST(CombinedScore, Branches) {
  ScoreRecord r;
  r.dim = 4;
  r.nll_nats = 4 * std::numbers::ln2;
  r.penalty = 0.5;
  r.lambda = 2.0;
  EXPECT_DOUBLE_EQ(combined_score(r), r.nll_nats + 1.0);
  r.ic_bits = 4;
  EXPECT_DOUBLE_EQ(combined_score(r), 1.0 + 1.0 - 1.0);
  r.ic_bits = 0;
  EXPECT_DOUBLE_EQ(combined_score(r), r.bpd() + 1.0);
}

TEST(OodScore, DecompositionIsBitExact) {
  const auto m = random_model(4, 2, 5);
  Tensor x = random_tensor(300, 4, 6, 0.3);
  for (auto& v : x.values()) v = std::clamp(v + 0.5, 0.0, 1.0);
  const DeflateCodec codec;
  for (bool ic : {false, true}) {
    const auto recs = ood_score(m, x, {}, unit_huber_fit(), {.use_ic = ic, .c_const = 2.0}, codec);
    ASSERT_EQ(recs.size(), 300u);
    for (const auto& r : recs) {
      EXPECT_TRUE(r.valid);
      EXPECT_EQ(r.ic_bits.has_value(), ic);
      EXPECT_EQ(combined_score(r), r.score);
      EXPECT_EQ(r.lambda, 8.0);
    }
  }
}

TEST(OodScore, ZeroLambdaWithoutIcRanksLikeNegativeLogProb) {
  const auto m = random_model(3, 1, 7);
  const Tensor x = random_tensor(200, 3, 8);
  const auto recs = ood_score(m, x, {}, unit_huber_fit(), {.use_ic = false, .c_const = 0.0}, DeflateCodec());
  std::vector<double> scores, neg_lp;
  for (const auto& r : recs) scores.push_back(r.score);
  for (double lp : m.base.log_prob(x)) neg_lp.push_back(-lp);
  EXPECT_EQ(ranking(scores), ranking(neg_lp));
}

TEST(OodScore, FullSplitHasZeroPenalty) {
  const auto m = random_model(3, 3, 9);
  const auto recs = ood_score(m, random_tensor(20, 3, 10), {}, unit_huber_fit(), {.use_ic = false}, DeflateCodec());
  for (const auto& r : recs) EXPECT_EQ(r.penalty, 0.0);
}

TEST(OodScore, FailingRowsAreFlaggedIndividually) {
  ManifoldFlowModel m;
  m.split = {1, 2};
  m.base = FlowModel::build(2, small_flow_config(1, false), 0);
  std::get<ActNorm>(m.base.layers()[0]).log_scale()[0] = 705.0;
  Tensor x({5, 2});
  x(3, 0) = 1e10;
  const auto recs = ood_score(m, x, {}, unit_huber_fit(), {.use_ic = false}, DeflateCodec());
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_EQ(recs[r].valid, r != 3);
    EXPECT_EQ(std::isnan(recs[r].score), r == 3);
  }
}

TEST(OodScore, RejectsWidthMismatch) {
  const auto m = random_model(3, 1, 11);
  EXPECT_THROW(ood_score(m, Tensor({2, 4}), {}, unit_huber_fit(), {}, DeflateCodec()), ConfigError);
}

TEST(ScoreFile, RoundTripAndEmptyIcField) {
  ScoreFile f;
  f.dim = 2;
  f.provenance = {"mfood test", "dim=2"};
  ScoreRecord a{0, 2, 1.25, 0.5, 3.0, std::nullopt, 0.0, true};
  a.score = combined_score(a);
  ScoreRecord b{1, 2, 2.5, 0.125, 3.0, std::uint64_t{40}, 0.0, true};
  b.score = combined_score(b);
  ScoreRecord c{2, 2, 0.0, 0.0, 3.0, std::nullopt, NAN, false};
  f.records = {a, b, c};
  const std::string text = format_score_file(f);
  EXPECT_NE(text.find(std::string("\n") + kScoreCsvHeader + "\n"), std::string::npos);
  EXPECT_NE(text.find("\n0,1.25,"), std::string::npos);
  EXPECT_NE(text.find(",3,,"), std::string::npos);
  EXPECT_NE(text.find(",nan,0\n"), std::string::npos);
  const ScoreFile back = parse_score_file(text);
  EXPECT_EQ(back.dim, 2u);
  ASSERT_EQ(back.records.size(), 3u);
  EXPECT_EQ(back.records[0].score, a.score);
  EXPECT_FALSE(back.records[0].ic_bits.has_value());
  EXPECT_EQ(back.records[1].ic_bits, 40u);
  EXPECT_FALSE(back.records[2].valid);
  EXPECT_EQ(format_score_file(back), text);
  EXPECT_THROW(parse_score_file("# dim=2\nid,score\n"), ConfigError);
  EXPECT_THROW(parse_score_file(std::string(kScoreCsvHeader) + "\n"), ConfigError);
}
