#include "ssvrg/data_io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "ssvrg/error.hpp"

namespace ssvrg {

namespace {

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

std::string strip_comment(std::string line) {
  if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
  return line;
}

}  // namespace

std::vector<Observation> read_mc_triples(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<Observation> obs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_comment(line);
    std::istringstream ss(line);
    long long i = 0;
    long long j = 0;
    double v = 0.0;
    if (!(ss >> i)) continue;
    if (!(ss >> j >> v) || i < 1 || j < 1) {
      throw Error(ErrorCode::Io, fmt::format("{}:{}: expected 'i j value'", path.string(), lineno));
    }
    obs.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
  }
  return obs;
}

void write_mc_triples(const std::filesystem::path& path, const std::vector<Observation>& obs) {
  std::ofstream out = open_out(path);
  for (const Observation& o : obs) out << fmt::format("{} {} {:.17g}\n", o.row + 1, o.col + 1, o.value);
}

McInstance load_mc_instance(const std::filesystem::path& path, Index r, Index d, Index n) {
  std::vector<Observation> obs = read_mc_triples(path);
  Index max_row = 0;
  Index max_col = 0;
  for (const Observation& o : obs) {
    max_row = std::max(max_row, o.row + 1);
    max_col = std::max(max_col, o.col + 1);
  }
  return mc_from_observations(d > 0 ? d : max_row, n > 0 ? n : max_col, r, std::move(obs));
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_comment(line);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::Io, "bad number '" + cell + "' in " + path.string());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::Io, "ragged CSV " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::Io, "empty matrix file " + path.string());
  Matrix A(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) A(i, j) = rows[i][j];
  return A;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& A) {
  std::ofstream out = open_out(path);
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) out << (j ? "," : "") << fmt::format("{:.17g}", A(i, j));
    out << '\n';
  }
}

Matrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows < 0 || cols < 0) throw Error(ErrorCode::Io, "bad header in " + path.string());
  Matrix A(rows, cols);
  in.read(reinterpret_cast<char*>(A.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rows * cols)));
  if (!in) throw Error(ErrorCode::Io, "truncated matrix file " + path.string());
  return A;
}

void write_matrix_binary(const std::filesystem::path& path, const Matrix& A) {
  std::ofstream out = open_out(path, std::ios::binary);
  const std::int64_t rows = A.rows();
  const std::int64_t cols = A.cols();
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  out.write(reinterpret_cast<const char*>(A.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(A.size())));
}

Matrix read_matrix(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? read_matrix_csv(path) : read_matrix_binary(path);
}

}  // namespace ssvrg
