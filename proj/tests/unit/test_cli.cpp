#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mfood/checkpoint.hpp"
#include "mfood/cli.hpp"
#include "mfood/config.hpp"
#include "mfood/data.hpp"
#include "mfood/huber_density.hpp"
#include "mfood/manifold.hpp"
#include "mfood/rng.hpp"
#include "mfood/scoring.hpp"
#include "oracles.hpp"

using namespace mfood;
using namespace mfood::testing;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out, err;
};

CliResult mfood_run(std::vector<std::string> args) {
  args.insert(args.begin(), "mfood");
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// First "key=value" line of a report.
std::string report_value(const std::string& text, const std::string& key) {
  for (const auto& line : lines_of(text)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return {};
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

std::string set_key(const std::string& cfg, const std::string& key, const std::string& value) {
  std::string out;
  for (const auto& line : lines_of(cfg)) {
    out += line.rfind(key + " =", 0) == 0 ? key + " = " + value : line;
    out += "\n";
  }
  return out;
}

struct GridRow {
  double x, y, nll, penalty, score;
};

std::vector<GridRow> read_grid(const fs::path& p) {
  std::vector<GridRow> rows;
  bool header = false;
  for (const auto& line : lines_of(slurp(p))) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto f = fields(line);
    rows.push_back({std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]),
                    std::stod(f[4])});
  }
  return rows;
}

ScoreRecord record(std::size_t id, double score) {
  ScoreRecord r;
  r.id = id;
  r.dim = 2;
  r.nll_nats = score;
  r.penalty = 0.0;
  r.lambda = 1.0;
  r.score = score;
  return r;
}

void write_scores(const fs::path& p, const std::vector<double>& scores) {
  ScoreFile f;
  f.dim = 2;
  f.provenance = {"mfood test", "dim=2"};
  for (std::size_t i = 0; i < scores.size(); ++i) f.records.push_back(record(i, scores[i]));
  write_score_file(p, f);
}

double eval_auroc(const fs::path& id, const fs::path& ood, const fs::path& out) {
  const CliResult r = mfood_run({"eval", "--id", id.string(), "--ood", ood.string(), "--out", out.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  return std::stod(report_value(r.out, "auroc"));
}

// One trained semicircle quickstart model shared by the experiment tests.
class SemicircleCli : public ::testing::Test {
 protected:
  static inline fs::path dir;
  static inline std::string config_text;
  static inline double train_seconds = 0.0;
  static inline CliResult train_run;

  static void SetUpTestSuite() {
    dir = fs::temp_directory_path() / "mfood_test_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string shipped = slurp(fs::path(MFOOD_SOURCE_DIR) / "configs" / "semicircle.cfg");
    config_text = replace_all(shipped, "runs/semicircle", dir.string());
    spit(dir / "semicircle.cfg", config_text);

    const auto start = std::chrono::steady_clock::now();
    const CliResult gen = mfood_run({"gen-data", "--kind", "semicircle", "--n", "2000", "--noise", "0.05",
                               "--seed", "0", "--out", (dir / "train.tns").string()});
    ASSERT_EQ(gen.code, 0) << gen.err;
    train_run = mfood_run({"train", "--config", (dir / "semicircle.cfg").string()});
    train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ASSERT_EQ(train_run.code, 0) << train_run.err;
    const CliResult fit = mfood_run({"fit-scale", "--checkpoint", ckpt(), "--data",
                               (dir / "train.tns").string(), "--out", calib()});
    ASSERT_EQ(fit.code, 0) << fit.err;
  }

  static std::string ckpt() { return (dir / "model.ckpt").string(); }
  static std::string calib() { return (dir / "calibration.txt").string(); }
  static std::string path(const std::string& name) { return (dir / name).string(); }
};

TEST_F(SemicircleCli, QuickstartFinishesWithinFiveMinutes) {
  EXPECT_LT(train_seconds, 300.0);
  EXPECT_EQ(report_value(train_run.out, "checkpoint"), ckpt());
}

TEST_F(SemicircleCli, RunEchoesResolvedConfig) {
  const std::string echo = ExperimentConfig::parse(config_text).echo();
  EXPECT_EQ(train_run.out.substr(0, echo.size()), echo);
}

TEST_F(SemicircleCli, HistoryHeaderCarriesConfigEcho) {
  const auto lines = lines_of(slurp(dir / "history.csv"));
  const auto echo = lines_of(ExperimentConfig::parse(config_text).echo());
  ASSERT_GT(lines.size(), echo.size() + 2);
  EXPECT_EQ(lines[0].rfind("# mfood ", 0), 0u);
  for (std::size_t i = 0; i < echo.size(); ++i) EXPECT_EQ(lines[i + 1], "# " + echo[i]);
  EXPECT_EQ(lines[echo.size() + 1], "epoch,loss,nll_u,nll_v,logdet,penalty");
  EXPECT_EQ(lines.size(), echo.size() + 2 + 150);
}

TEST_F(SemicircleCli, HuberReportHasScaleAndIterations) {
  const std::string text = slurp(calib());
  EXPECT_EQ(report_value(text, "kind"), "huber");
  const double k = std::stod(report_value(text, "k"));
  EXPECT_GT(k, 0.0);
  EXPECT_GE(std::stoul(report_value(text, "iterations")), 1u);
  EXPECT_EQ(report_value(text, "boundary"), "none");
  const CalibrationReport rep = read_calibration_report(calib());
  EXPECT_NEAR(rep.lambda, lambda_coefficient(rep.fit, rep.c_const), 1e-12 * rep.lambda);
  EXPECT_NEAR(rep.lambda, rep.c_const / (k * k), 1e-12 * rep.lambda);
}

TEST_F(SemicircleCli, ScoringTrainingSetIsFiniteAndReproducible) {
  const std::string a = path("train_scores.csv"), b = path("train_scores_again.csv");
  for (const auto& out : {a, b}) {
    const CliResult r = mfood_run({"score", "--checkpoint", ckpt(), "--calibration", calib(), "--data",
                             path("train.tns"), "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(a), slurp(b));
  const ScoreFile f = read_score_file(a);
  ASSERT_EQ(f.records.size(), 2000u);
  std::size_t finite = 0;
  for (const auto& r : f.records) finite += r.valid && std::isfinite(r.score) ? 1 : 0;
  EXPECT_GE(static_cast<double>(finite), 0.999 * 2000.0);
  for (const auto& r : f.records) EXPECT_TRUE(r.ic_bits.has_value());
  EXPECT_EQ(f.dim, 2u);
}

TEST_F(SemicircleCli, NoIcLeavesComplexityFieldEmpty) {
  const std::string out = path("noic.csv");
  const CliResult r = mfood_run({"score", "--checkpoint", ckpt(), "--calibration", calib(), "--data",
                           path("train.tns"), "--out", out, "--no-ic"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t rows = 0;
  bool header = false;
  for (const auto& line : lines_of(slurp(out))) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      EXPECT_EQ(line, kScoreCsvHeader);
      continue;
    }
    const auto f = fields(line);
    ASSERT_EQ(f.size(), 8u);
    EXPECT_EQ(f[5], "");
    ++rows;
  }
  EXPECT_EQ(rows, 2000u);
  EXPECT_NE(slurp(out).find("# codec=none"), std::string::npos);
}

TEST_F(SemicircleCli, ScoreRejectsDimensionMismatch) {
  save_tensor(dir / "wide.tns", random_tensor(5, 3, 1));
  const CliResult r = mfood_run({"score", "--checkpoint", ckpt(), "--calibration", calib(), "--data",
                           path("wide.tns"), "--out", path("wide.csv")});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("\"error\":\"config\""), std::string::npos);
}

TEST_F(SemicircleCli, GridHasExpectedRowsAndRidge) {
  const std::string out = path("grid.csv");
  const CliResult r = mfood_run({"grid", "--checkpoint", ckpt(), "--calibration", calib(), "--lo", "-2",
                           "--hi", "2", "--step", "0.05", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_grid(out);
  ASSERT_EQ(rows.size(), 81u * 81u);

  // The densest arc point (0, 1) is more likely than the typical grid point.
  std::vector<double> nll;
  for (const auto& g : rows) {
    if (std::isfinite(g.nll)) nll.push_back(g.nll);
  }
  std::nth_element(nll.begin(), nll.begin() + nll.size() / 2, nll.end());
  const double median = nll[nll.size() / 2];
  const auto mid = std::min_element(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
    return std::hypot(a.x, a.y - 1.0) < std::hypot(b.x, b.y - 1.0);
  });
  EXPECT_LT(std::hypot(mid->x, mid->y - 1.0), 1e-9);
  EXPECT_LT(mid->nll, median);

  // On-manifold mean penalty at radius exactly 1 over the well-covered part of the arc.
  const Checkpoint c = load_checkpoint(ckpt());
  const std::size_t m = 200;
  Tensor on({m, 2});
  for (std::size_t i = 0; i < m; ++i) {
    const double t = std::numbers::pi / 4 + std::numbers::pi / 2 * (i + 0.5) / m;
    on(i, 0) = std::cos(t);
    on(i, 1) = std::sin(t);
  }
  const auto on_pen = penalty(on, reconstruct(c.model, on), c.penalty);
  double on_mean = 0.0;
  for (double p : on_pen) on_mean += p / static_cast<double>(m);

  // Each angular sector of the grid contains a point whose penalty is close to the ridge value.
  const int sectors = 10;
  std::vector<double> sector_min(sectors, std::numeric_limits<double>::infinity());
  for (const auto& g : rows) {
    const double r = std::hypot(g.x, g.y), t = std::atan2(g.y, g.x);
    if (r < 0.5 || r > 1.5 || t < std::numbers::pi / 4 || t >= 3 * std::numbers::pi / 4) continue;
    const int s = static_cast<int>((t - std::numbers::pi / 4) / (std::numbers::pi / 2) * sectors);
    if (std::isfinite(g.penalty)) sector_min[s] = std::min(sector_min[s], g.penalty);
  }
  for (int s = 0; s < sectors; ++s) EXPECT_LT(sector_min[s], 10.0 * on_mean) << "sector " << s;
}

TEST_F(SemicircleCli, ManifoldSamplesStayNearUnitCircle) {
  const std::string out = path("manifold.tns");
  const CliResult r = mfood_run({"sample", "--checkpoint", ckpt(), "--n", "2000", "--mode", "manifold",
                           "--seed", "5", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const Tensor x = load_tensor(out);
  ASSERT_EQ(x.rows(), 2000u);
  std::size_t near = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    near += std::abs(std::hypot(x(i, 0), x(i, 1)) - 1.0) <= 3.0 * 0.05 ? 1 : 0;
  }
  EXPECT_GE(static_cast<double>(near), 0.95 * 2000.0);
  const auto meta = read_metadata(out);
  EXPECT_EQ(meta.at("mode"), "manifold");
  EXPECT_EQ(meta.at("seed"), "5");
}

TEST_F(SemicircleCli, SamplingIsSeeded) {
  const std::string a = path("s1.tns"), b = path("s2.tns"), c = path("s3.tns");
  for (const auto& [out, seed] : {std::pair{a, "7"}, std::pair{b, "7"}, std::pair{c, "8"}}) {
    const CliResult r = mfood_run({"sample", "--checkpoint", ckpt(), "--n", "50", "--seed", seed, "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a), slurp(c));
}

TEST_F(SemicircleCli, ZeroSamplesGiveEmptyTensor) {
  const std::string out = path("empty.tns");
  const CliResult r = mfood_run({"sample", "--checkpoint", ckpt(), "--n", "0", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const Tensor x = load_tensor(out);
  EXPECT_EQ(x.shape(), (std::vector<std::size_t>{0, 2}));
}

TEST_F(SemicircleCli, InvalidSampleModeIsUsageError) {
  const CliResult r = mfood_run({"sample", "--checkpoint", ckpt(), "--n", "3", "--mode", "diagonal",
                           "--out", path("bad.tns")});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("\"error\":\"usage\""), std::string::npos);
}

TEST(Cli, UnknownConfigKeyIsNamed) {
  const fs::path dir = fs::temp_directory_path() / "mfood_test_cli_badkey";
  spit(dir / "bad.cfg", "dims.D = 2\nflow.colour = blue\n");
  const CliResult r = mfood_run({"train", "--config", (dir / "bad.cfg").string()});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("flow.colour"), std::string::npos);
  EXPECT_NE(r.err.find("\"error\":\"config\""), std::string::npos);
}

class ShortRuns : public ::testing::Test {
 protected:
  static inline fs::path dir;

  static void SetUpTestSuite() {
    dir = fs::temp_directory_path() / "mfood_test_cli_short";
    fs::remove_all(dir);
    const CliResult gen = mfood_run({"gen-data", "--kind", "semicircle", "--n", "300", "--seed", "2",
                               "--out", (dir / "data.tns").string()});
    ASSERT_EQ(gen.code, 0) << gen.err;
  }

  static std::string config(const std::string& name, const std::string& penalty_kind,
                            std::size_t epochs) {
    std::string cfg = ExperimentConfig{}.echo();
    cfg = set_key(cfg, "penalty.kind", penalty_kind);
    cfg = set_key(cfg, "optim.epochs", std::to_string(epochs));
    cfg = set_key(cfg, "optim.batch", "64");
    cfg = set_key(cfg, "data.path", (dir / "data.tns").string());
    cfg = set_key(cfg, "checkpoint.path", (dir / (name + ".ckpt")).string());
    cfg = set_key(cfg, "output.dir", (dir / name).string());
    cfg = set_key(cfg, "score.c_const", "2");
    const fs::path p = dir / (name + ".cfg");
    spit(p, cfg);
    return p.string();
  }
};

TEST_F(ShortRuns, SameSeedGivesIdenticalCheckpoint) {
  const std::string a = config("det_a", "huber", 3), b = config("det_b", "huber", 3);
  ASSERT_EQ(mfood_run({"train", "--config", a}).code, 0);
  ASSERT_EQ(mfood_run({"train", "--config", b}).code, 0);
  const std::string bytes = slurp(dir / "det_a.ckpt");
  EXPECT_FALSE(bytes.empty());
  EXPECT_EQ(bytes, slurp(dir / "det_b.ckpt"));
}

TEST_F(ShortRuns, MseReportHasSigmaAndLambdaOverSigma) {
  const std::string cfg = config("mse", "mse", 2);
  ASSERT_EQ(mfood_run({"train", "--config", cfg}).code, 0);
  const std::string report = (dir / "mse_report.txt").string();
  const CliResult r = mfood_run({"fit-scale", "--checkpoint", (dir / "mse.ckpt").string(), "--data",
                           (dir / "data.tns").string(), "--out", report, "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(report));
  EXPECT_EQ(report_value(r.out, "kind"), "gaussian");
  const double sigma = std::stod(report_value(r.out, "sigma_mse"));
  const double lambda = std::stod(report_value(r.out, "lambda"));
  EXPECT_EQ(std::stod(report_value(r.out, "c_const")), 2.0);
  EXPECT_NEAR(lambda, 2.0 / sigma, 1e-12 * lambda);
  const CalibrationReport rep = read_calibration_report(report);
  EXPECT_EQ(rep.lambda, lambda_coefficient(rep.fit, rep.c_const));
}

TEST_F(ShortRuns, ZeroEpochsStillWritesCheckpoint) {
  const std::string cfg = config("zero", "huber", 0);
  const CliResult r = mfood_run({"train", "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NO_THROW(load_checkpoint(dir / "zero.ckpt"));
  EXPECT_EQ(report_value(r.out, "steps"), "0");
}

TEST_F(ShortRuns, GridNeedsTwoDimensionalCheckpoint) {
  std::string cfg = ExperimentConfig{}.echo();
  cfg = set_key(cfg, "dims.D", "3");
  cfg = set_key(cfg, "dims.d", "2");
  cfg = set_key(cfg, "optim.epochs", "0");
  cfg = set_key(cfg, "checkpoint.path", (dir / "d3.ckpt").string());
  cfg = set_key(cfg, "output.dir", (dir / "d3").string());
  cfg = set_key(cfg, "data.path", (dir / "d3.tns").string());
  spit(dir / "d3.cfg", cfg);
  ASSERT_EQ(mfood_run({"gen-data", "--kind", "embedded", "--n", "50", "--d", "2", "--D", "3",
                       "--out", (dir / "d3.tns").string()})
                .code,
            0);
  const CliResult t = mfood_run({"train", "--config", (dir / "d3.cfg").string()});
  ASSERT_EQ(t.code, 0) << t.err;
  const std::string report = (dir / "d3_report.txt").string();
  ASSERT_EQ(mfood_run({"fit-scale", "--checkpoint", (dir / "d3.ckpt").string(), "--data",
                       (dir / "d3.tns").string(), "--out", report})
                .code,
            0);
  const CliResult g = mfood_run({"grid", "--checkpoint", (dir / "d3.ckpt").string(), "--calibration",
                           report, "--out", (dir / "d3_grid.csv").string()});
  EXPECT_NE(g.code, 0);
  EXPECT_NE(g.err.find("D=3"), std::string::npos);
}

TEST_F(ShortRuns, GridRowCountFollowsBounds) {
  const std::string cfg = config("grid", "huber", 1);
  ASSERT_EQ(mfood_run({"train", "--config", cfg}).code, 0);
  const std::string report = (dir / "grid_report.txt").string();
  ASSERT_EQ(mfood_run({"fit-scale", "--checkpoint", (dir / "grid.ckpt").string(), "--data",
                       (dir / "data.tns").string(), "--out", report})
                .code,
            0);
  const std::vector<std::tuple<std::string, std::string, std::string, std::size_t>> cases = {
      {"-1", "1", "0.25", 9}, {"0", "3", "0.5", 7}, {"-5", "5", "1", 11}, {"2", "2", "0.1", 1}};
  for (const auto& [lo, hi, step, n] : cases) {
    const std::string out = (dir / "rows.csv").string();
    const CliResult r = mfood_run({"grid", "--checkpoint", (dir / "grid.ckpt").string(), "--calibration",
                             report, "--lo", lo, "--hi", hi, "--step", step, "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_grid(out).size(), n * n) << lo << " " << hi << " " << step;
  }
}

class EvalCli : public ::testing::Test {
 protected:
  fs::path dir = fs::temp_directory_path() / "mfood_test_cli_eval";
  void SetUp() override { fs::create_directories(dir); }
};

TEST_F(EvalCli, PerfectSeparationGivesOne) {
  write_scores(dir / "id.csv", {0, 1, 2, 3, 4});
  write_scores(dir / "ood.csv", {5, 6, 7, 8});
  const CliResult r = mfood_run({"eval", "--id", (dir / "id.csv").string(), "--ood",
                           (dir / "ood.csv").string(), "--out", (dir / "m.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(report_value(r.out, "auroc"), "1");
  EXPECT_EQ(report_value(r.out, "auroc_nll"), "1");
  EXPECT_EQ(report_value(r.out, "threshold"), "4");
  EXPECT_EQ(report_value(r.out, "fp"), "0");
  EXPECT_EQ(report_value(r.out, "tp"), "4");
  EXPECT_EQ(report_value(r.out, "auroc_combined_ic"), "na");
  EXPECT_EQ(slurp(dir / "m.txt"), r.out);
}

TEST_F(EvalCli, SwappingSetsComplementsAuroc) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(30), b(25);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal() + 0.5;
    write_scores(dir / "a.csv", a);
    write_scores(dir / "b.csv", b);
    const double ab = eval_auroc(dir / "a.csv", dir / "b.csv", dir / "m.txt");
    const double ba = eval_auroc(dir / "b.csv", dir / "a.csv", dir / "m.txt");
    EXPECT_NEAR(ba, 1.0 - ab, 1e-12);
  }
}

TEST_F(EvalCli, MatchesPairwiseOracleWithTies) {
  Rng rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> a(3 + rng.below(12)), b(3 + rng.below(12));
    for (auto& v : a) v = static_cast<double>(rng.below(5));
    for (auto& v : b) v = static_cast<double>(rng.below(6));
    write_scores(dir / "a.csv", a);
    write_scores(dir / "b.csv", b);
    EXPECT_EQ(eval_auroc(dir / "a.csv", dir / "b.csv", dir / "m.txt"), pairwise_auroc(a, b));
  }
}

TEST_F(EvalCli, SweepRescalesPenaltyWeight) {
  // With the penalty weighted up, the OOD set (large penalty, small NLL) separates.
  ScoreFile id, ood;
  id.dim = ood.dim = 2;
  id.provenance = ood.provenance = {"c_const=1", "dim=2"};
  for (std::size_t i = 0; i < 10; ++i) {
    ScoreRecord r = record(i, 5.0 + 0.1 * i);
    r.penalty = 0.01 * i;
    r.score = r.nll_nats + r.lambda * r.penalty;
    id.records.push_back(r);
    ScoreRecord o = record(i, 1.0 + 0.1 * i);
    o.penalty = 10.0 + i;
    o.score = o.nll_nats + o.lambda * o.penalty;
    ood.records.push_back(o);
  }
  write_score_file(dir / "id.csv", id);
  write_score_file(dir / "ood.csv", ood);
  const CliResult r = mfood_run({"eval", "--id", (dir / "id.csv").string(), "--ood",
                           (dir / "ood.csv").string(), "--out", (dir / "m.txt").string(),
                           "--sweep-c", "0,1,4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(report_value(r.out, "auroc_c_const[0]"), "0");
  EXPECT_EQ(report_value(r.out, "auroc_c_const[1]"), "1");
  EXPECT_EQ(report_value(r.out, "auroc_c_const[4]"), "1");
  EXPECT_EQ(report_value(r.out, "auroc_nll"), "0");
  EXPECT_EQ(report_value(r.out, "auroc_penalty"), "1");
}

TEST_F(EvalCli, OneClassInputFails) {
  write_scores(dir / "id.csv", {0, 1, 2});
  write_scores(dir / "none.csv", {});
  CliResult r = mfood_run({"eval", "--id", (dir / "id.csv").string(), "--ood",
                     (dir / "none.csv").string(), "--out", (dir / "m.txt").string()});
  EXPECT_NE(r.code, 0);
  r = mfood_run({"eval", "--id", (dir / "none.csv").string(), "--ood", (dir / "id.csv").string(),
                 "--out", (dir / "m.txt").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("\"error\""), std::string::npos);
}

TEST_F(EvalCli, InvalidRowsAreCountedAndExcluded) {
  ScoreFile id, ood;
  id.dim = ood.dim = 2;
  id.provenance = ood.provenance = {"dim=2"};
  for (std::size_t i = 0; i < 4; ++i) id.records.push_back(record(i, static_cast<double>(i)));
  for (std::size_t i = 0; i < 3; ++i) ood.records.push_back(record(i, 10.0 + i));
  ScoreRecord bad = record(3, 0.0);
  bad.valid = false;
  bad.nll_nats = bad.score = std::numeric_limits<double>::quiet_NaN();
  ood.records.push_back(bad);
  write_score_file(dir / "id.csv", id);
  write_score_file(dir / "ood.csv", ood);
  const CliResult r = mfood_run({"eval", "--id", (dir / "id.csv").string(), "--ood",
                           (dir / "ood.csv").string(), "--out", (dir / "m.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(report_value(r.out, "auroc"), "1");
  EXPECT_EQ(report_value(r.out, "invalid_ood"), "1");
  EXPECT_EQ(report_value(r.out, "fn"), "0");
}

TEST_F(EvalCli, DimensionMismatchIsRejected) {
  write_scores(dir / "id.csv", {0, 1});
  ScoreFile wide;
  wide.dim = 3;
  wide.provenance = {"dim=3"};
  wide.records.push_back(record(0, 5.0));
  wide.records[0].dim = 3;
  write_score_file(dir / "wide.csv", wide);
  const CliResult r = mfood_run({"eval", "--id", (dir / "id.csv").string(), "--ood",
                           (dir / "wide.csv").string(), "--out", (dir / "m.txt").string()});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("dim=3"), std::string::npos);
}

TEST(Cli, GenDataIsSeededAndRecordsMetadata) {
  const fs::path dir = fs::temp_directory_path() / "mfood_test_cli_gen";
  fs::remove_all(dir);
  for (const char* name : {"a.tns", "b.tns"}) {
    const CliResult r = mfood_run({"gen-data", "--kind", "embedded", "--n", "40", "--d", "2", "--D", "5",
                             "--embedding", "smooth", "--seed", "4", "--out", (dir / name).string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "rows=40 out=" + (dir / name).string() + "\n");
  }
  EXPECT_EQ(slurp(dir / "a.tns"), slurp(dir / "b.tns"));
  EXPECT_EQ(load_tensor(dir / "a.tns").shape(), (std::vector<std::size_t>{40, 5}));
  const auto meta = read_metadata(dir / "a.tns");
  EXPECT_TRUE(meta.count("version"));
  EXPECT_TRUE(meta.count("seed"));
}

TEST(Cli, GenDataIdxNeedsPath) {
  const CliResult r = mfood_run({"gen-data", "--kind", "idx", "--out", "/tmp/mfood_unused.tns"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("--idx-path"), std::string::npos);
}

TEST(Cli, GenDataConvertsIdx) {
  const fs::path dir = fs::temp_directory_path() / "mfood_test_cli_idx";
  fs::remove_all(dir);
  fs::create_directories(dir);
  // Two 2x2 unsigned-byte images.
  const std::vector<unsigned char> bytes = {0, 0, 0x08, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2,
                                            0, 255, 128, 64, 1, 2, 3, 4};
  std::ofstream(dir / "img.idx", std::ios::binary)
      .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  const CliResult r = mfood_run({"gen-data", "--kind", "idx", "--idx-path", (dir / "img.idx").string(),
                           "--out", (dir / "img.tns").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Tensor t = load_tensor(dir / "img.tns");
  ASSERT_EQ(t.shape(), (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(t(0, 1), 1.0);
  EXPECT_EQ(t(1, 3), 4.0 / 255.0);
}

TEST(Cli, MissingSubcommandIsUsageError) {
  const CliResult r = mfood_run({});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_EQ(mfood_run({"--version"}).code, 0);
}

}  // namespace
