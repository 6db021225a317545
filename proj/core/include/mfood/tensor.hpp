#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfood {

// Dense row-major float64 tensor. Batches of vectors are rank-2 [batch, dim].
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<std::size_t> shape);

  // Throws ConfigError on a length mismatch and NumericError on a non-finite entry.
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }

  std::size_t rank() const noexcept { return shape_.size(); }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  // Rank-2 accessors; rows()/cols() require rank 2.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> row(std::size_t r) {
    return {values_.data() + r * shape_[1], shape_[1]};
  }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * shape_[1], shape_[1]};
  }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * shape_[1] + c]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

// Rows [begin, begin + count) of a rank-2 tensor.
Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t count);

// Rows in the given order.
Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows);

// Horizontal concatenation of two rank-2 tensors with equal row counts.
Tensor concat_cols(const Tensor& left, const Tensor& right);

// Vertical concatenation; column counts must agree.
Tensor concat_rows(const Tensor& top, const Tensor& bottom);

// A trainable parameter array paired with its gradient accumulator.
struct ParamRef {
  std::span<double> value;
  std::span<double> grad;
};

}  // namespace mfood
