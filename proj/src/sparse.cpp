#include "isqa/sparse.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace isqa {

void SparseDesignMatrix::mul(const Vector& v, Vector& out) const {
  if (v.size() != n_cols) throw std::invalid_argument("SparseDesignMatrix::mul: size mismatch");
  out.assign(n_rows, 0.0);
  for (std::size_t i = 0; i < n_rows; ++i) {
    double s = 0.0;
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
      s += values[k] * v[col_indices[k]];
    out[i] = s;
  }
}

void SparseDesignMatrix::mul_transpose(const Vector& v, Vector& out) const {
  if (v.size() != n_rows)
    throw std::invalid_argument("SparseDesignMatrix::mul_transpose: size mismatch");
  out.assign(n_cols, 0.0);
  for (std::size_t i = 0; i < n_rows; ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
      out[col_indices[k]] += vi * values[k];
  }
}

void SparseDesignMatrix::add_row(std::size_t i, double alpha, Vector& out) const {
  for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
    out[col_indices[k]] += alpha * values[k];
}

double SparseDesignMatrix::row_dot(std::size_t i, const Vector& v) const {
  double s = 0.0;
  for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
    s += values[k] * v[col_indices[k]];
  return s;
}

SparseDesignMatrix SparseDesignMatrix::transposed() const {
  SparseDesignMatrix t;
  t.n_rows = n_cols;
  t.n_cols = n_rows;
  t.row_offsets.assign(n_cols + 1, 0);
  for (std::uint32_t c : col_indices) t.row_offsets[c + 1]++;
  for (std::size_t i = 0; i < n_cols; ++i) t.row_offsets[i + 1] += t.row_offsets[i];
  t.col_indices.resize(nnz());
  t.values.resize(nnz());
  std::vector<std::size_t> cursor(t.row_offsets.begin(), t.row_offsets.end() - 1);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      const std::size_t pos = cursor[col_indices[k]]++;
      t.col_indices[pos] = static_cast<std::uint32_t>(i);
      t.values[pos] = values[k];
    }
  }
  return t;
}

double SparseDesignMatrix::frobenius_sq() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

void SparseDesignMatrix::validate() const {
  if (row_offsets.size() != n_rows + 1)
    throw std::invalid_argument("row_offsets length mismatch");
  if (row_offsets.front() != 0 || row_offsets.back() != nnz())
    throw std::invalid_argument("row_offsets endpoints invalid");
  if (col_indices.size() != values.size())
    throw std::invalid_argument("col_indices/values length mismatch");
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (row_offsets[i] > row_offsets[i + 1])
      throw std::invalid_argument("row_offsets not nondecreasing");
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      if (col_indices[k] >= n_cols) throw std::invalid_argument("column index out of range");
      if (k > row_offsets[i] && col_indices[k] <= col_indices[k - 1])
        throw std::invalid_argument("column indices not strictly increasing within a row");
    }
  }
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::int8_t parse_label(std::string_view tok, std::size_t line) {
  if (tok == "+1" || tok == "1") return 1;
  if (tok == "-1") return -1;
  throw ParseError(line, "label '" + std::string(tok) + "' not in {-1,+1}");
}

}  // namespace

LibsvmData parse_libsvm(std::string_view text, std::size_t n_cols_override) {
  LibsvmData data;
  SparseDesignMatrix& m = data.matrix;
  m.row_offsets.push_back(0);
  std::size_t max_col = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::size_t end = (eol == std::string_view::npos) ? text.size() : eol;
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;

    std::size_t cur = 0;
    while (cur < line.size() && is_space(line[cur])) ++cur;
    if (cur == line.size()) {
      if (eol == std::string_view::npos) break;
      continue;  // blank line
    }

    std::size_t tok_end = cur;
    while (tok_end < line.size() && !is_space(line[tok_end])) ++tok_end;
    data.labels.push_back(parse_label(line.substr(cur, tok_end - cur), line_no));
    cur = tok_end;

    long long prev_idx = 0;
    while (true) {
      while (cur < line.size() && is_space(line[cur])) ++cur;
      if (cur == line.size()) break;
      tok_end = cur;
      while (tok_end < line.size() && !is_space(line[tok_end])) ++tok_end;
      const std::string tok(line.substr(cur, tok_end - cur));
      cur = tok_end;

      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError(line_no, "malformed token '" + tok + "'");
      errno = 0;
      char* idx_end = nullptr;
      const long long idx = std::strtoll(tok.c_str(), &idx_end, 10);
      if (errno != 0 || idx_end != tok.c_str() + colon || idx < 1)
        throw ParseError(line_no, "bad feature index in '" + tok + "'");
      char* val_end = nullptr;
      const double val = std::strtod(tok.c_str() + colon + 1, &val_end);
      if (val_end != tok.c_str() + tok.size() || !std::isfinite(val))
        throw ParseError(line_no, "bad feature value in '" + tok + "'");
      if (idx <= prev_idx)
        throw ParseError(line_no, "feature indices not strictly increasing");
      prev_idx = idx;
      if (val != 0.0) {  // stored zeros dropped
        m.col_indices.push_back(static_cast<std::uint32_t>(idx - 1));
        m.values.push_back(val);
      }
      max_col = std::max(max_col, static_cast<std::size_t>(idx));
    }
    m.row_offsets.push_back(m.values.size());
    if (eol == std::string_view::npos) break;
  }

  m.n_rows = m.row_offsets.size() - 1;
  m.n_cols = n_cols_override > 0 ? n_cols_override : max_col;
  if (n_cols_override > 0 && max_col > n_cols_override)
    throw ParseError(line_no, "feature index exceeds --features override");
  m.validate();
  return data;
}

std::string serialize_libsvm(const SparseDesignMatrix& matrix,
                             const std::vector<std::int8_t>& labels) {
  if (labels.size() != matrix.n_rows)
    throw std::invalid_argument("serialize_libsvm: label count mismatch");
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < matrix.n_rows; ++i) {
    out += (labels[i] > 0) ? "+1" : "-1";
    for (std::size_t k = matrix.row_offsets[i]; k < matrix.row_offsets[i + 1]; ++k) {
      std::snprintf(buf, sizeof(buf), " %u:%.17g", matrix.col_indices[k] + 1,
                    matrix.values[k]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace isqa
