#ifndef MMIRL_PARAM_BLOCK_HPP_
#define MMIRL_PARAM_BLOCK_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mmirl {

struct MatShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool operator==(const MatShape&) const = default;
};

/// Flat parameter vector with a matching gradient buffer and a shape table
/// describing how the flat storage is carved into matrices/vectors. One
/// block backs one network.
class ParamBlock {
 public:
  // Appends a rows x cols entry to the shape table, returns its offset.
  std::size_t allocate(std::size_t rows, std::size_t cols) {
    const std::size_t offset = values_.size();
    values_.resize(offset + rows * cols, 0.0);
    grads_.resize(values_.size(), 0.0);
    shapes_.push_back({rows, cols});
    return offset;
  }

  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> grads() { return grads_; }
  std::span<const double> grads() const { return grads_; }

  std::span<double> values(std::size_t offset, std::size_t count) {
    check_range(offset, count);
    return {values_.data() + offset, count};
  }
  std::span<const double> values(std::size_t offset, std::size_t count) const {
    check_range(offset, count);
    return {values_.data() + offset, count};
  }
  std::span<double> grads(std::size_t offset, std::size_t count) {
    check_range(offset, count);
    return {grads_.data() + offset, count};
  }

  const std::vector<MatShape>& shape_table() const { return shapes_; }

  void zero_grads() {
    for (double& g : grads_) g = 0.0;
  }

  void set_values(std::span<const double> v) {
    if (v.size() != values_.size()) throw std::invalid_argument("ParamBlock::set_values: size mismatch");
    std::copy(v.begin(), v.end(), values_.begin());
  }

  double grad_norm() const {
    double s = 0.0;
    for (double g : grads_) s += g * g;
    return std::sqrt(s);
  }

  // Scales gradients so their global L2 norm is at most max_norm.
  void clip_grad_norm(double max_norm) {
    const double n = grad_norm();
    if (n > max_norm && n > 0.0) {
      const double scale = max_norm / n;
      for (double& g : grads_) g *= scale;
    }
  }

 private:
  void check_range(std::size_t offset, std::size_t count) const {
    if (offset + count > values_.size()) throw std::out_of_range("ParamBlock: span out of range");
  }

  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<MatShape> shapes_;
};

}  // namespace mmirl

#endif  // MMIRL_PARAM_BLOCK_HPP_
