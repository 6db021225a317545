#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace mfood {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-facing configuration: bad keys, shapes, dimensions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a mathematical function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Broken internal contract (for example a backward call with a foreign cache).
class InternalError : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced during numeric evaluation.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what,
                        std::optional<std::size_t> layer = std::nullopt,
                        std::optional<std::size_t> sample = std::nullopt)
      : Error(what + (layer ? " [layer " + std::to_string(*layer) + "]" : "") +
              (sample ? " [sample " + std::to_string(*sample) + "]" : "")),
        layer_(layer),
        sample_(sample) {}

  std::optional<std::size_t> layer() const noexcept { return layer_; }
  std::optional<std::size_t> sample() const noexcept { return sample_; }

 private:
  std::optional<std::size_t> layer_;
  std::optional<std::size_t> sample_;
};

// Malformed binary or text container; offset is the byte position of the fault.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

// Training aborted: non-finite loss or gradient.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t epoch, std::size_t batch)
      : Error(what + " (epoch " + std::to_string(epoch) + ", batch " +
              std::to_string(batch) + ")"),
        epoch_(epoch),
        batch_(batch) {}

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

}  // namespace mfood
