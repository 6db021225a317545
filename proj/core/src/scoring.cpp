#include "mfood/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "mfood/errors.hpp"
#include "text_util.hpp"

namespace mfood {

double bpd(double nll_nats, std::size_t dim) {
  if (dim == 0) throw DomainError("bits per dimension needs D > 0");
  return nll_nats / (static_cast<double>(dim) * std::numbers::ln2);
}

double combined_score(const ScoreRecord& r) {
  if (r.ic_bits) {
    return r.bpd() + r.lambda * r.penalty - static_cast<double>(*r.ic_bits) / static_cast<double>(r.dim);
  }
  return r.nll_nats + r.lambda * r.penalty;
}

namespace {

void score_rows(const ManifoldFlowModel& model, const Tensor& x, const PenaltySpec& spec,
                double lambda, std::size_t offset, std::vector<ScoreRecord>& out) {
  const NllTerms nll = negative_log_likelihood(model, x);
  const auto pen = penalty(x, reconstruct(model, x), spec);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    ScoreRecord& rec = out[offset + r];
    rec.nll_nats = nll.nll_u[r] + nll.nll_v[r] - nll.logdet[r];
    rec.penalty = pen[r];
    rec.lambda = lambda;
  }
}

}  // namespace

std::vector<ScoreRecord> ood_score(const ManifoldFlowModel& model, const Tensor& x,
                                   const PenaltySpec& spec, const FittedScale& fit,
                                   const ScoreOptions& options, const Codec& codec) {
  model.validate();
  if (x.rank() != 2 || x.cols() != model.split.ambient_dim) {
    throw ConfigError("scoring data width does not match the model dimension D=" +
                      std::to_string(model.split.ambient_dim));
  }
  const double lambda = lambda_coefficient(fit, options.c_const);
  const std::size_t n = x.rows(), dim = x.cols();
  std::vector<ScoreRecord> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    out[r].id = r;
    out[r].dim = dim;
  }
  constexpr std::size_t kChunk = 256;
  for (std::size_t begin = 0; begin < n; begin += kChunk) {
    const std::size_t count = std::min(kChunk, n - begin);
    const Tensor chunk = slice_rows(x, begin, count);
    try {
      score_rows(model, chunk, spec, lambda, begin, out);
    } catch (const NumericError&) {
      // Re-score row by row so only the failing samples are flagged.
      for (std::size_t r = 0; r < count; ++r) {
        try {
          score_rows(model, slice_rows(chunk, r, 1), spec, lambda, begin + r, out);
        } catch (const NumericError&) {
          out[begin + r].valid = false;
        }
      }
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    ScoreRecord& rec = out[r];
    if (options.use_ic) {
      try {
        rec.ic_bits = complexity_bits(quantize(x.row(r)), codec);
      } catch (const NumericError& e) {
        throw NumericError(std::string("complexity codec failed: ") + e.what(), std::nullopt, r);
      }
    }
    if (rec.valid) {
      rec.score = combined_score(rec);
      rec.valid = std::isfinite(rec.score);
    }
    if (!rec.valid) rec.score = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

EvalLabeling EvalLabeling::from(std::span<const double> id, std::span<const double> ood) {
  EvalLabeling out;
  out.scores.assign(id.begin(), id.end());
  out.scores.insert(out.scores.end(), ood.begin(), ood.end());
  out.labels.assign(id.size(), 0);
  out.labels.insert(out.labels.end(), ood.size(), 1);
  return out;
}

double auroc(const EvalLabeling& labeled) {
  const std::size_t n = labeled.scores.size();
  if (labeled.labels.size() != n) throw DomainError("auroc: scores and labels differ in length");
  std::size_t n_ood = 0;
  for (auto l : labeled.labels) {
    if (l > 1) throw DomainError("auroc: labels must be 0 (ID) or 1 (OOD)");
    n_ood += l;
  }
  const std::size_t n_id = n - n_ood;
  if (n_id == 0 || n_ood == 0) throw DomainError("auroc needs both ID and OOD samples");
  for (double s : labeled.scores) {
    if (std::isnan(s)) throw DomainError("auroc: NaN score");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return labeled.scores[a] < labeled.scores[b];
  });
  // Work in doubled ranks so tie averages stay integral.
  std::uint64_t rank_sum_x2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && labeled.scores[order[j]] == labeled.scores[order[i]]) ++j;
    const std::uint64_t avg_rank_x2 = static_cast<std::uint64_t>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labeled.labels[order[k]] == 1) rank_sum_x2 += avg_rank_x2;
    }
    i = j;
  }
  const std::uint64_t min_x2 = static_cast<std::uint64_t>(n_ood) * (n_ood + 1);
  const double u = static_cast<double>(rank_sum_x2 - min_x2) / 2.0;
  return u / (static_cast<double>(n_id) * static_cast<double>(n_ood));
}

double hard_threshold(std::span<const double> id_scores) {
  if (id_scores.empty()) throw DomainError("hard threshold of an empty score set");
  return *std::max_element(id_scores.begin(), id_scores.end());
}

std::vector<std::uint8_t> classify(std::span<const double> scores, double threshold) {
  std::vector<std::uint8_t> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > threshold ? 1 : 0;
  return out;
}

std::string format_score_file(const ScoreFile& file) {
  using detail::format_double;
  std::ostringstream out;
  for (const auto& line : file.provenance) out << "# " << line << "\n";
  out << kScoreCsvHeader << "\n";
  for (const auto& r : file.records) {
    out << r.id << ',' << format_double(r.nll_nats) << ',' << format_double(r.bpd()) << ','
        << format_double(r.penalty) << ',' << format_double(r.lambda) << ',';
    if (r.ic_bits) out << *r.ic_bits;
    out << ',' << (r.valid ? format_double(r.score) : std::string("nan")) << ','
        << (r.valid ? 1 : 0) << "\n";
  }
  return out.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

ScoreFile parse_score_file(const std::string& text) {
  ScoreFile file;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body.front() == ' ') body.erase(0, 1);
      if (body.rfind("dim=", 0) == 0) file.dim = detail::parse_u64(body.substr(4), "dim");
      file.provenance.push_back(std::move(body));
      continue;
    }
    if (!header_seen) {
      if (line != kScoreCsvHeader) throw ConfigError("score file: unexpected CSV header '" + line + "'");
      header_seen = true;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != 8) {
      throw ConfigError("score file line " + std::to_string(line_no) + ": expected 8 fields");
    }
    ScoreRecord r;
    r.id = detail::parse_u64(cells[0], "id");
    r.dim = file.dim;
    r.nll_nats = detail::parse_double(cells[1], "nll_nats");
    r.penalty = detail::parse_double(cells[3], "penalty");
    r.lambda = detail::parse_double(cells[4], "lambda");
    if (!cells[5].empty()) r.ic_bits = detail::parse_u64(cells[5], "ic_bits");
    r.valid = cells[7] == "1";
    r.score = r.valid ? detail::parse_double(cells[6], "score")
                      : std::numeric_limits<double>::quiet_NaN();
    file.records.push_back(r);
  }
  if (!header_seen) throw ConfigError("score file: missing CSV header");
  if (file.dim == 0) throw ConfigError("score file: missing '# dim=' provenance line");
  return file;
}

void write_score_file(const std::filesystem::path& path, const ScoreFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write score file '" + path.string() + "'");
  out << format_score_file(file);
}

ScoreFile read_score_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read score file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_score_file(buf.str());
}

}  // namespace mfood
