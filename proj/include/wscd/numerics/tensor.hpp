#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "wscd/real.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace numerics {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array. Scalars are shape {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<real> data);
  Tensor(Shape shape, std::initializer_list<real> data)
      : Tensor(std::move(shape), std::vector<real>(data)) {}

  static Tensor scalar(real value) { return Tensor({1}, {value}); }
  static Tensor filled(Shape shape, real value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rows/cols view a tensor as a matrix: rank-1 is a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<real> data() { return data_; }
  std::span<const real> data() const { return data_; }
  std::vector<real>& storage() { return data_; }

  real& operator[](std::size_t i) { return data_[i]; }
  real operator[](std::size_t i) const { return data_[i]; }
  real& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  real at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  std::span<real> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const real> row(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }

  real item() const;
  void fill(real value);
  Tensor reshaped(Shape shape) const;
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<real> data_;
};

// Throws NumericError naming `where` if any element is NaN/Inf.
void require_finite(const Tensor& t, const char* where);

}  // namespace numerics
WSCD_MODEL_NAMESPACE_END
