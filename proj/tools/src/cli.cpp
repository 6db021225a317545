#include "mfood/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "mfood/checkpoint.hpp"
#include "mfood/complexity.hpp"
#include "mfood/config.hpp"
#include "mfood/data.hpp"
#include "mfood/errors.hpp"
#include "mfood/huber_density.hpp"
#include "mfood/manifold.hpp"
#include "mfood/rng.hpp"
#include "mfood/scoring.hpp"
#include "mfood/train.hpp"

namespace mfood::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = MFOOD_VERSION;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fnv1a_hex(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ensure_parent(const fs::path& path) {
  const auto parent = path.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

Tensor load_matrix(const fs::path& path) {
  Tensor t = load_tensor(path);
  if (t.rank() != 2) {
    throw ConfigError("'" + path.string() + "' must hold a rank-2 [n, D] tensor");
  }
  return t;
}

struct LoadedCheckpoint {
  Checkpoint ckpt;
  std::string hash;
};

LoadedCheckpoint open_checkpoint(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return {deserialize_checkpoint(bytes), fnv1a_hex(bytes)};
}

void require_width(const Tensor& x, const ManifoldFlowModel& model, const std::string& what) {
  if (x.cols() != model.split.ambient_dim) {
    throw ConfigError(what + " has " + std::to_string(x.cols()) +
                      " columns but the checkpoint expects D=" +
                      std::to_string(model.split.ambient_dim));
  }
}

std::string fit_kind(const FittedScale& fit) {
  return fit.kind == FittedScale::Kind::kHuber ? "huber" : "gaussian";
}

// Element-wise reconstruction residuals x - f^-1(proj(f(x))), in chunks.
std::vector<double> residuals(const ManifoldFlowModel& model, const Tensor& x) {
  std::vector<double> out;
  out.reserve(x.size());
  constexpr std::size_t kChunk = 1024;
  for (std::size_t begin = 0; begin < x.rows(); begin += kChunk) {
    const Tensor chunk = slice_rows(x, begin, std::min(kChunk, x.rows() - begin));
    const Tensor rec = reconstruct(model, chunk);
    for (std::size_t i = 0; i < chunk.size(); ++i) out.push_back(chunk.data()[i] - rec.data()[i]);
  }
  return out;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string config;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = ExperimentConfig::load(a.config);
  out << cfg.echo();
  if (cfg.data_path.empty()) throw ConfigError("data.path is required for training");
  const Tensor data = load_matrix(cfg.data_path);
  if (data.cols() != cfg.ambient_dim) {
    throw ConfigError("training data has " + std::to_string(data.cols()) +
                      " columns but dims.D=" + std::to_string(cfg.ambient_dim));
  }

  ManifoldFlowModel model = cfg.build_model();
  TrainConfig tc = cfg.train_config();
  ensure_parent(tc.checkpoint_path.value());

  std::ostringstream history;
  {
    std::istringstream echo(cfg.echo());
    std::string line;
    history << "# mfood " << kVersion << " train\n";
    while (std::getline(echo, line)) history << "# " << line << "\n";
    history << "epoch,loss,nll_u,nll_v,logdet,penalty\n";
  }
  const fs::path history_path = fs::path(cfg.output_dir) / "history.csv";
  auto on_epoch = [&](const EpochStats& s) {
    history << s.epoch << ',' << num(s.loss) << ',' << num(s.nll_u) << ',' << num(s.nll_v) << ','
            << num(s.logdet) << ',' << num(s.penalty) << "\n";
    out << "epoch " << s.epoch << " loss=" << num(s.loss) << " penalty=" << num(s.penalty) << "\n";
  };

  TrainHistory hist;
  try {
    hist = train(model, data, tc, on_epoch);
  } catch (const TrainingError&) {
    write_text(history_path, history.str());
    throw;
  }
  write_text(history_path, history.str());
  if (tc.epochs == 0) save_checkpoint(*tc.checkpoint_path, model, tc.penalty);
  out << "checkpoint=" << tc.checkpoint_path->string() << "\n"
      << "history=" << history_path.string() << "\n"
      << "steps=" << hist.steps << "\n";
  return kOk;
}

// --- fit-scale ---------------------------------------------------------------

struct FitArgs {
  std::string checkpoint, data, out, config;
};

int cmd_fit_scale(const FitArgs& a, std::ostream& out) {
  double c_const = 1.0;
  if (!a.config.empty()) c_const = ExperimentConfig::load(a.config).score_c_const;
  const auto loaded = open_checkpoint(a.checkpoint);
  const auto& ckpt = loaded.ckpt;
  const Tensor x = load_matrix(a.data);
  require_width(x, ckpt.model, "calibration data");

  const auto errors = residuals(ckpt.model, x);
  CalibrationReport report;
  report.c_const = c_const;
  report.fit = ckpt.penalty.kind == PenaltyKind::kHuber
                   ? fitted_from(fit_scale_newton(errors, ckpt.penalty.delta))
                   : fitted_gaussian(errors);
  report.lambda = lambda_coefficient(report.fit, c_const);
  write_calibration_report(a.out, report);
  out << format_calibration_report(report);
  return kOk;
}

// --- score -------------------------------------------------------------------

struct ScoreArgs {
  std::string checkpoint, calibration, data, out;
  bool no_ic = false;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const auto loaded = open_checkpoint(a.checkpoint);
  const auto& ckpt = loaded.ckpt;
  const CalibrationReport report = read_calibration_report(a.calibration);
  const Tensor x = load_matrix(a.data);
  require_width(x, ckpt.model, "scoring data");

  const DeflateCodec codec;
  ScoreOptions opts;
  opts.use_ic = !a.no_ic;
  opts.c_const = report.c_const;

  ScoreFile file;
  file.dim = x.cols();
  auto& p = file.provenance;
  p.push_back(std::string("mfood ") + kVersion + " score");
  p.push_back("checkpoint=" + a.checkpoint);
  p.push_back("checkpoint_hash=" + loaded.hash);
  p.push_back("calibration=" + a.calibration);
  p.push_back("calibration_hash=" + fnv1a_hex(read_bytes(a.calibration)));
  p.push_back("data=" + a.data);
  if (fs::exists(metadata_path(a.data))) {
    p.push_back("data_meta=" + nlohmann::json(read_metadata(a.data)).dump());
  }
  p.push_back("penalty=" + to_string(ckpt.penalty.kind));
  p.push_back("delta=" + num(ckpt.penalty.delta));
  p.push_back("scale_kind=" + fit_kind(report.fit));
  p.push_back("scale=" + num(report.fit.scale));
  p.push_back("c_const=" + num(report.c_const));
  p.push_back("lambda=" + num(lambda_coefficient(report.fit, report.c_const)));
  if (opts.use_ic) {
    p.push_back("codec=" + codec.name());
    p.push_back("codec_level=" + std::to_string(codec.level()));
    p.push_back("units=nll_nats:nats bpd:bits/dim ic_bits:bits score:bits/dim");
    p.push_back("score=bpd+lambda*penalty-ic_bits/dim");
  } else {
    p.push_back("codec=none");
    p.push_back("units=nll_nats:nats bpd:bits/dim score:nats");
    p.push_back("score=nll_nats+lambda*penalty");
  }
  p.push_back("note=penalty density omits the constant -log C(delta,k)");
  p.push_back("dim=" + std::to_string(file.dim));
  p.push_back("n=" + std::to_string(x.rows()));

  file.records = ood_score(ckpt.model, x, ckpt.penalty, report.fit, opts, codec);
  ensure_parent(a.out);
  write_score_file(a.out, file);

  std::size_t invalid = 0;
  for (const auto& r : file.records) invalid += r.valid ? 0 : 1;
  out << "scored=" << file.records.size() << " invalid=" << invalid << " out=" << a.out << "\n";
  return kOk;
}

// --- eval --------------------------------------------------------------------

struct EvalArgs {
  std::string id;
  std::vector<std::string> ood;
  std::string out;
  std::vector<double> sweep_c;
};

std::optional<std::string> provenance_value(const ScoreFile& f, const std::string& key) {
  for (const auto& line : f.provenance) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return std::nullopt;
}

void check_compatible(const ScoreFile& id, const ScoreFile& ood, const std::string& path) {
  if (id.dim != ood.dim) {
    throw ConfigError("score file '" + path + "' has dim=" + std::to_string(ood.dim) +
                      " but the ID file has dim=" + std::to_string(id.dim));
  }
  for (const char* key : {"checkpoint_hash", "calibration_hash", "codec"}) {
    const auto a = provenance_value(id, key), b = provenance_value(ood, key);
    if (a && b && *a != *b) {
      throw ConfigError("score file '" + path + "' differs from the ID file in " + key);
    }
  }
}

using Variant = std::function<double(const ScoreRecord&)>;

std::vector<double> column(const ScoreFile& f, const Variant& v) {
  std::vector<double> out;
  for (const auto& r : f.records) {
    if (r.valid) out.push_back(v(r));
  }
  return out;
}

double variant_auroc(const ScoreFile& id, const ScoreFile& ood, const Variant& v) {
  const auto a = column(id, v), b = column(ood, v);
  return auroc(EvalLabeling::from(a, b));
}

bool all_have_ic(const ScoreFile& f) {
  return std::all_of(f.records.begin(), f.records.end(),
                     [](const ScoreRecord& r) { return !r.valid || r.ic_bits.has_value(); });
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const ScoreFile id = read_score_file(a.id);
  double c_ref = 1.0;
  if (auto c = provenance_value(id, "c_const")) c_ref = std::stod(*c);

  std::ostringstream report;
  report << "# mfood " << kVersion << " eval\n"
         << "# id=" << a.id << "\n";
  if (auto h = provenance_value(id, "checkpoint_hash")) report << "# checkpoint_hash=" << *h << "\n";

  const Variant stored = [](const ScoreRecord& r) { return r.score; };
  const Variant nll = [](const ScoreRecord& r) { return r.nll_nats; };
  const Variant pen = [](const ScoreRecord& r) { return r.penalty; };
  const Variant nll_pen = [](const ScoreRecord& r) { return r.nll_nats + r.lambda * r.penalty; };
  const Variant with_ic = [](const ScoreRecord& r) {
    ScoreRecord copy = r;
    return combined_score(copy);
  };

  std::size_t id_invalid = 0;
  for (const auto& r : id.records) id_invalid += r.valid ? 0 : 1;
  const auto id_scores = column(id, stored);
  if (id_scores.empty()) throw DomainError("ID score file has no valid records");
  const double threshold = hard_threshold(id_scores);

  for (const auto& path : a.ood) {
    const ScoreFile ood = read_score_file(path);
    check_compatible(id, ood, path);
    std::size_t ood_invalid = 0;
    for (const auto& r : ood.records) ood_invalid += r.valid ? 0 : 1;

    report << "\nood=" << path << "\n"
           << "auroc=" << num(variant_auroc(id, ood, stored)) << "\n"
           << "auroc_nll=" << num(variant_auroc(id, ood, nll)) << "\n"
           << "auroc_penalty=" << num(variant_auroc(id, ood, pen)) << "\n"
           << "auroc_combined=" << num(variant_auroc(id, ood, nll_pen)) << "\n";
    if (all_have_ic(id) && all_have_ic(ood)) {
      report << "auroc_combined_ic=" << num(variant_auroc(id, ood, with_ic)) << "\n";
    } else {
      report << "auroc_combined_ic=na\n";
    }
    for (double c : a.sweep_c) {
      const double scale = c / c_ref;
      const Variant swept = [scale](const ScoreRecord& r) {
        ScoreRecord copy = r;
        copy.lambda *= scale;
        return combined_score(copy);
      };
      report << "auroc_c_const[" << num(c) << "]=" << num(variant_auroc(id, ood, swept)) << "\n";
    }

    const auto ood_scores = column(ood, stored);
    const auto id_flags = classify(id_scores, threshold);
    const auto ood_flags = classify(ood_scores, threshold);
    const std::size_t fp = std::count(id_flags.begin(), id_flags.end(), 1);
    const std::size_t tp = std::count(ood_flags.begin(), ood_flags.end(), 1);
    report << "threshold=" << num(threshold) << "\n"
           << "tp=" << tp << "\nfp=" << fp << "\ntn=" << (id_flags.size() - fp)
           << "\nfn=" << (ood_flags.size() - tp) << "\n"
           << "invalid_id=" << id_invalid << "\ninvalid_ood=" << ood_invalid << "\n";
  }
  write_text(a.out, report.str());
  out << report.str();
  return kOk;
}

// --- grid --------------------------------------------------------------------

struct GridArgs {
  std::string checkpoint, calibration, out;
  double lo = -2.0, hi = 2.0, step = 0.05;
};

int cmd_grid(const GridArgs& a, std::ostream& out) {
  const auto loaded = open_checkpoint(a.checkpoint);
  const auto& ckpt = loaded.ckpt;
  if (ckpt.model.split.ambient_dim != 2) {
    throw ConfigError("grid export needs a D=2 checkpoint, got D=" +
                      std::to_string(ckpt.model.split.ambient_dim));
  }
  if (!(a.step > 0.0) || !(a.hi >= a.lo)) throw ConfigError("grid needs step > 0 and hi >= lo");
  const CalibrationReport report = read_calibration_report(a.calibration);

  const auto count = static_cast<std::size_t>(std::floor((a.hi - a.lo) / a.step + 1e-9)) + 1;
  Tensor pts({count * count, 2});
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      pts(i * count + j, 0) = a.lo + a.step * static_cast<double>(i);
      pts(i * count + j, 1) = a.lo + a.step * static_cast<double>(j);
    }
  }
  ScoreOptions opts;
  opts.use_ic = false;
  opts.c_const = report.c_const;
  const DeflateCodec codec;
  const auto recs = ood_score(ckpt.model, pts, ckpt.penalty, report.fit, opts, codec);

  std::ostringstream csv;
  csv << "# mfood " << kVersion << " grid\n"
      << "# checkpoint=" << a.checkpoint << "\n"
      << "# checkpoint_hash=" << loaded.hash << "\n"
      << "# calibration=" << a.calibration << "\n"
      << "# lambda=" << num(lambda_coefficient(report.fit, report.c_const)) << "\n"
      << "# lo=" << num(a.lo) << " hi=" << num(a.hi) << " step=" << num(a.step) << "\n"
      << "# score=nll+lambda*penalty (nats)\n"
      << "x,y,nll,penalty,score\n";
  for (std::size_t r = 0; r < recs.size(); ++r) {
    const auto& rec = recs[r];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    csv << num(pts(r, 0)) << ',' << num(pts(r, 1)) << ',' << num(rec.valid ? rec.nll_nats : nan)
        << ',' << num(rec.valid ? rec.penalty : nan) << ',' << num(rec.valid ? rec.score : nan)
        << "\n";
  }
  write_text(a.out, csv.str());
  out << "points=" << recs.size() << " out=" << a.out << "\n";
  return kOk;
}

// --- sample ------------------------------------------------------------------

struct SampleArgs {
  std::string checkpoint, mode = "full", out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  const auto loaded = open_checkpoint(a.checkpoint);
  const auto& model = loaded.ckpt.model;
  const SampleMode mode = a.mode == "manifold" ? SampleMode::kManifold : SampleMode::kFull;
  const Tensor x = sample(model.base, a.n, mode, model.split.manifold_dim, a.seed,
                          model.manifold_flow ? &*model.manifold_flow : nullptr);
  ensure_parent(a.out);
  save_tensor(a.out, x);
  write_metadata(a.out, {{"generator", "sample"},
                         {"mode", a.mode},
                         {"seed", std::to_string(a.seed)},
                         {"n", std::to_string(a.n)},
                         {"checkpoint", a.checkpoint},
                         {"checkpoint_hash", loaded.hash},
                         {"version", kVersion}});
  out << "samples=" << a.n << " out=" << a.out << "\n";
  return kOk;
}

// --- gen-data ----------------------------------------------------------------

struct GenArgs {
  std::string kind = "semicircle", out, profile = "concentrated", embedding = "linear", idx_path;
  std::size_t n = 1000, d = 1, dim = 2;
  double noise = 0.05;
  std::uint64_t seed = 0, embedding_seed = 1;
  bool dequantize = false;
};

int cmd_gen_data(const GenArgs& a, std::ostream& out) {
  Dataset ds;
  if (a.kind == "semicircle") {
    ds = gen_semicircle(a.n, a.noise, parse_arc_profile(a.profile), a.seed);
  } else if (a.kind == "embedded") {
    ds = gen_embedded_manifold(a.n, a.d, a.dim, parse_embedding(a.embedding), a.noise, a.seed,
                               a.embedding_seed);
  } else {
    if (a.idx_path.empty()) throw ConfigError("--idx-path is required for --kind idx");
    ds = load_idx(a.idx_path);
    if (a.dequantize) {
      Rng rng(a.seed);
      for (auto& v : ds.data.values()) v += rng.uniform() / 256.0;
      ds.metadata["dequantize"] = "uniform/256";
      ds.metadata["seed"] = std::to_string(a.seed);
    }
  }
  ds.metadata["version"] = kVersion;
  ensure_parent(a.out);
  save_tensor(a.out, ds.data);
  write_metadata(a.out, ds.metadata);
  out << "rows=" << ds.data.shape()[0] << " out=" << a.out << "\n";
  return kOk;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << nlohmann::json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Manifold-aware flow density estimation and OOD scoring", "mfood"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a config file");
  train_cmd->add_option("--config", train_args.config, "Experiment config")->required();

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit-scale", "Fit the penalty scale on ID data");
  fit_cmd->add_option("--checkpoint", fit_args.checkpoint)->required();
  fit_cmd->add_option("--data", fit_args.data, "ID calibration tensor")->required();
  fit_cmd->add_option("--out", fit_args.out, "Calibration report path")->required();
  fit_cmd->add_option("--config", fit_args.config, "Config supplying score.c_const");

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Score samples");
  score_cmd->add_option("--checkpoint", score_args.checkpoint)->required();
  score_cmd->add_option("--calibration", score_args.calibration)->required();
  score_cmd->add_option("--data", score_args.data)->required();
  score_cmd->add_option("--out", score_args.out)->required();
  score_cmd->add_flag("--no-ic", score_args.no_ic, "Omit the input-complexity term");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "AUROC and hard-threshold counts from score files");
  eval_cmd->add_option("--id", eval_args.id)->required();
  eval_cmd->add_option("--ood", eval_args.ood)->required();
  eval_cmd->add_option("--out", eval_args.out)->required();
  eval_cmd->add_option("--sweep-c", eval_args.sweep_c, "C_const values to re-evaluate")
      ->delimiter(',');

  GridArgs grid_args;
  auto* grid_cmd = app.add_subcommand("grid", "Export NLL, penalty and score over a 2-D grid");
  grid_cmd->add_option("--checkpoint", grid_args.checkpoint)->required();
  grid_cmd->add_option("--calibration", grid_args.calibration)->required();
  grid_cmd->add_option("--lo", grid_args.lo);
  grid_cmd->add_option("--hi", grid_args.hi);
  grid_cmd->add_option("--step", grid_args.step);
  grid_cmd->add_option("--out", grid_args.out)->required();

  SampleArgs sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "Draw samples from a checkpoint");
  sample_cmd->add_option("--checkpoint", sample_args.checkpoint)->required();
  sample_cmd->add_option("--n", sample_args.n)->required();
  sample_cmd->add_option("--mode", sample_args.mode)->check(CLI::IsMember({"full", "manifold"}));
  sample_cmd->add_option("--seed", sample_args.seed);
  sample_cmd->add_option("--out", sample_args.out)->required();

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate or convert a dataset");
  gen_cmd->add_option("--kind", gen.kind)->check(CLI::IsMember({"semicircle", "embedded", "idx"}));
  gen_cmd->add_option("--n", gen.n);
  gen_cmd->add_option("--noise", gen.noise);
  gen_cmd->add_option("--profile", gen.profile)->check(CLI::IsMember({"uniform", "concentrated"}));
  gen_cmd->add_option("--d", gen.d);
  gen_cmd->add_option("--D", gen.dim);
  gen_cmd->add_option("--embedding", gen.embedding)->check(CLI::IsMember({"linear", "smooth"}));
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--embedding-seed", gen.embedding_seed);
  gen_cmd->add_option("--idx-path", gen.idx_path);
  gen_cmd->add_flag("--dequantize", gen.dequantize, "Add U(0, 1/256) noise to IDX pixels");
  gen_cmd->add_option("--out", gen.out)->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, out);
    if (*fit_cmd) return cmd_fit_scale(fit_args, out);
    if (*score_cmd) return cmd_score(score_args, out);
    if (*eval_cmd) return cmd_eval(eval_args, out);
    if (*grid_cmd) return cmd_grid(grid_args, out);
    if (*sample_cmd) return cmd_sample(sample_args, out);
    if (*gen_cmd) return cmd_gen_data(gen, out);
  } catch (const ConfigError& e) {
    report_error(err, "config", e.what());
    return kUsage;
  } catch (const TrainingError& e) {
    report_error(err, "training", e.what());
    return kRuntime;
  } catch (const NumericError& e) {
    report_error(err, "numeric", e.what());
    return kRuntime;
  } catch (const DomainError& e) {
    report_error(err, "domain", e.what());
    return kRuntime;
  } catch (const FormatError& e) {
    report_error(err, "format", e.what());
    return kRuntime;
  } catch (const std::exception& e) {
    report_error(err, "runtime", e.what());
    return kRuntime;
  }
  return kUsage;
}

}  // namespace mfood::cli
