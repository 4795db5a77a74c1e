#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace stlsmooth {

/// Row t holds the vector at timestep t.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Finite discrete-time signal y_0 ... y_T of p-dimensional vectors.
class Signal {
 public:
  explicit Signal(RowMatrix values);
  static Signal from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t length() const { return static_cast<std::size_t>(values_.rows()); }
  /// T, the index of the last sample.
  std::size_t last_step() const { return length() - 1; }
  std::size_t dim() const { return static_cast<std::size_t>(values_.cols()); }

  std::span<const double> at(std::size_t t) const {
    return {values_.data() + t * dim(), dim()};
  }
  double operator()(std::size_t t, std::size_t j) const { return values_(t, j); }
  const RowMatrix& values() const { return values_; }

  bool operator==(const Signal& other) const { return values_ == other.values_; }

 private:
  RowMatrix values_;
};

/// CSV with header `t,<prefix>0,...,<prefix>{p-1}` and one row per timestep.
void write_matrix_csv(std::ostream& out, const RowMatrix& m, const std::string& prefix);
void write_matrix_csv(const std::string& path, const RowMatrix& m, const std::string& prefix);
/// Reads a matrix written by write_matrix_csv; the header must use `prefix`
/// and the t column must count 0, 1, 2, ...
RowMatrix read_matrix_csv(std::istream& in, const std::string& prefix);
RowMatrix read_matrix_csv(const std::string& path, const std::string& prefix);

void write_signal_csv(const std::string& path, const Signal& y);
Signal read_signal_csv(const std::string& path);

}  // namespace stlsmooth
