#include "aesop/tensor.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "aesop/errors.hpp"

namespace aesop {

std::string to_string(const Shape& shape) {
  return fmt::format("[{}]", fmt::join(shape, ","));
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw DimensionError("negative dimension in shape " + to_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  if (values_.size() != element_count(shape_)) {
    throw DimensionError(fmt::format("tensor of shape {} needs {} values, got {}",
                                     to_string(shape_), element_count(shape_), values_.size()));
  }
}

int Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw DimensionError(fmt::format("axis {} out of range for shape {}", axis, to_string(shape_)));
  }
  return shape_[static_cast<std::size_t>(axis)];
}

double& Tensor::at(int c, int h, int w) {
  return values_[(static_cast<std::size_t>(c) * shape_[1] + h) * shape_[2] + w];
}

double Tensor::at(int c, int h, int w) const {
  return values_[(static_cast<std::size_t>(c) * shape_[1] + h) * shape_[2] + w];
}

double& Tensor::at(int n, int c, int h, int w) {
  return values_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
}

double Tensor::at(int n, int c, int h, int w) const {
  return values_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (element_count(shape) != size()) {
    throw DimensionError(fmt::format("cannot reshape {} to {}", to_string(shape_), to_string(shape)));
  }
  Tensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

void Tensor::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(
        fmt::format("{}: shape mismatch {} vs {}", what, to_string(a.shape()), to_string(b.shape())));
  }
}

}  // namespace aesop
