#include "mfood/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "mfood/errors.hpp"

namespace mfood {
namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), values_(product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != product(shape_)) {
    throw ConfigError("tensor value count " + std::to_string(values_.size()) +
                      " does not match shape product " + std::to_string(product(shape_)));
  }
  if (!all_finite()) throw NumericError("tensor constructed with non-finite entries");
}

std::size_t Tensor::rows() const {
  if (shape_.size() != 2) throw ConfigError("expected a rank-2 tensor");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() != 2) throw ConfigError("expected a rank-2 tensor");
  return shape_[1];
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t count) {
  if (begin + count > t.rows()) throw ConfigError("row slice out of range");
  Tensor out({count, t.cols()});
  std::copy_n(t.data() + begin * t.cols(), count * t.cols(), out.data());
  return out;
}

Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows) {
  Tensor out({rows.size(), t.cols()});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= t.rows()) throw ConfigError("row index out of range");
    auto src = t.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Tensor concat_cols(const Tensor& left, const Tensor& right) {
  if (left.rows() != right.rows()) throw ConfigError("concat_cols: row counts differ");
  const std::size_t n = left.rows(), a = left.cols(), b = right.cols();
  Tensor out({n, a + b});
  for (std::size_t r = 0; r < n; ++r) {
    auto dst = out.row(r);
    std::copy(left.row(r).begin(), left.row(r).end(), dst.begin());
    std::copy(right.row(r).begin(), right.row(r).end(), dst.begin() + a);
  }
  return out;
}

Tensor concat_rows(const Tensor& top, const Tensor& bottom) {
  if (top.cols() != bottom.cols()) throw ConfigError("concat_rows: column counts differ");
  Tensor out({top.rows() + bottom.rows(), top.cols()});
  std::copy_n(top.data(), top.size(), out.data());
  std::copy_n(bottom.data(), bottom.size(), out.data() + top.size());
  return out;
}

}  // namespace mfood
