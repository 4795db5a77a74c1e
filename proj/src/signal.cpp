#include "stlsmooth/signal.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stlsmooth/text.hpp"

namespace stlsmooth {

Signal::Signal(RowMatrix values) : values_(std::move(values)) {
  if (values_.rows() == 0) throw std::invalid_argument("signal must have at least one sample");
  if (values_.cols() == 0) throw std::invalid_argument("signal dimension must be positive");
  if (!values_.allFinite()) throw std::invalid_argument("signal has non-finite entries");
}

Signal Signal::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("signal must have at least one sample");
  RowMatrix m(rows.size(), rows.front().size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != rows.front().size()) {
      throw std::invalid_argument("signal row " + std::to_string(t) + " has the wrong length");
    }
    for (std::size_t j = 0; j < rows[t].size(); ++j) m(t, j) = rows[t][j];
  }
  return Signal(std::move(m));
}

void write_matrix_csv(std::ostream& out, const RowMatrix& m, const std::string& prefix) {
  out << "t";
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << prefix << j;
  out << '\n';
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    out << t;
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(t, j));
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const RowMatrix& m, const std::string& prefix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_matrix_csv(out, m, prefix);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

}  // namespace

RowMatrix read_matrix_csv(std::istream& in, const std::string& prefix) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV is empty");
  auto header = split(trim(line));
  if (header.size() < 2 || trim(header[0]) != "t") {
    throw std::runtime_error("CSV header must start with 't' followed by " + prefix + "0..");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (trim(header[j]) != prefix + std::to_string(j - 1)) {
      throw std::runtime_error("CSV header column " + std::to_string(j) + " should be '" + prefix +
                               std::to_string(j - 1) + "', got '" + header[j] + "'");
    }
  }
  std::size_t cols = header.size() - 1;
  std::vector<double> data;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != cols + 1) {
      throw std::runtime_error("CSV row " + std::to_string(rows) + " has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(cols + 1));
    }
    auto t = parse_double(cells[0]);
    if (!t || *t != static_cast<double>(rows)) {
      throw std::runtime_error("CSV row " + std::to_string(rows) + " has t='" + cells[0] + "'");
    }
    for (std::size_t j = 1; j <= cols; ++j) {
      auto v = parse_double(cells[j]);
      if (!v) throw std::runtime_error("CSV row " + std::to_string(rows) + ": bad number '" + cells[j] + "'");
      data.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) throw std::runtime_error("CSV has a header but no data rows");
  RowMatrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

RowMatrix read_matrix_csv(const std::string& path, const std::string& prefix) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_matrix_csv(in, prefix);
}

void write_signal_csv(const std::string& path, const Signal& y) { write_matrix_csv(path, y.values(), "y"); }

Signal read_signal_csv(const std::string& path) { return Signal(read_matrix_csv(path, "y")); }

}  // namespace stlsmooth
