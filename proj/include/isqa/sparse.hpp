#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "isqa/linalg.hpp"

namespace isqa {

/// Compressed row-sparse design matrix; rows are training examples.
struct SparseDesignMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_offsets;  // length n_rows + 1
  std::vector<std::uint32_t> col_indices;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }

  /// out = A v  (out has length n_rows)
  void mul(const Vector& v, Vector& out) const;
  /// out = A' v  (out has length n_cols)
  void mul_transpose(const Vector& v, Vector& out) const;
  /// out += alpha * row(i)
  void add_row(std::size_t i, double alpha, Vector& out) const;
  double row_dot(std::size_t i, const Vector& v) const;

  /// Row-sparse representation of the transpose (column access).
  SparseDesignMatrix transposed() const;

  double frobenius_sq() const;

  /// Checks the structural invariants; throws std::invalid_argument on failure.
  void validate() const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct LibsvmData {
  SparseDesignMatrix matrix;
  std::vector<std::int8_t> labels;  // entries in {-1, +1}
};

/// Parses LIBSVM text: one "label idx:val idx:val ..." record per nonempty
/// line, 1-based strictly increasing indices, labels in {+1, 1, -1}.
/// Stored zeros are dropped after validation; indices become 0-based.
/// `n_cols_override` > 0 fixes the feature dimension instead of inferring
/// it from the largest index seen.
LibsvmData parse_libsvm(std::string_view text, std::size_t n_cols_override = 0);

/// Inverse of parse_libsvm on the in-memory representation.
std::string serialize_libsvm(const SparseDesignMatrix& matrix,
                             const std::vector<std::int8_t>& labels);

}  // namespace isqa
