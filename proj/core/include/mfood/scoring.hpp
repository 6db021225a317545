#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfood/complexity.hpp"
#include "mfood/huber_density.hpp"
#include "mfood/manifold.hpp"

namespace mfood {

// Bits per dimension: nll / (D ln 2).
double bpd(double nll_nats, std::size_t dim);

struct ScoreRecord {
  std::size_t id = 0;
  std::size_t dim = 0;
  double nll_nats = 0.0;  // nll_u + nll_v - logdet
  double penalty = 0.0;
  double lambda = 0.0;
  std::optional<std::uint64_t> ic_bits;
  double score = 0.0;
  bool valid = true;

  double bpd() const { return mfood::bpd(nll_nats, dim); }
};

// score = nll_term + lambda * penalty - ic_term, where with complexity bits
// present nll_term is in bits per dimension and ic_term = bits / D, and
// without them nll_term is nll_nats and ic_term = 0.
double combined_score(const ScoreRecord& record);

struct ScoreOptions {
  bool use_ic = true;
  double c_const = 1.0;
};

// One record per row of x. Rows whose evaluation fails numerically are
// returned with valid = false and NaN score.
std::vector<ScoreRecord> ood_score(const ManifoldFlowModel& model, const Tensor& x,
                                   const PenaltySpec& spec, const FittedScale& fit,
                                   const ScoreOptions& options, const Codec& codec);

// Scores of a two-class evaluation set: ID label 0, OOD label 1.
struct EvalLabeling {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;

  static EvalLabeling from(std::span<const double> id, std::span<const double> ood);
};

// Mann-Whitney estimate of P(score_OOD > score_ID) + P(equal)/2 via
// tie-averaged ranks. Throws DomainError if either class is empty.
double auroc(const EvalLabeling& labeled);

// max(id_scores). Throws DomainError on empty input.
double hard_threshold(std::span<const double> id_scores);

// 1 (OOD) iff score > threshold.
std::vector<std::uint8_t> classify(std::span<const double> scores, double threshold);

// Score file: '#'-prefixed provenance lines then a CSV with header
// id,nll_nats,bpd,penalty,lambda,ic_bits,score,valid
struct ScoreFile {
  std::vector<std::string> provenance;  // header lines without the leading "# "
  std::size_t dim = 0;
  std::vector<ScoreRecord> records;
};

inline constexpr const char* kScoreCsvHeader = "id,nll_nats,bpd,penalty,lambda,ic_bits,score,valid";

std::string format_score_file(const ScoreFile& file);
ScoreFile parse_score_file(const std::string& text);
void write_score_file(const std::filesystem::path& path, const ScoreFile& file);
ScoreFile read_score_file(const std::filesystem::path& path);

}  // namespace mfood
