#include "tlqr/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <vector>

#include "tlqr/errors.hpp"

namespace tlqr {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& field, const std::string& path,
                    std::size_t line_no, std::size_t col) {
  const std::string t = trim(field);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw ParseError(path + ":" + std::to_string(line_no) +
                     ": cannot parse numeric value '" + field +
                     "' in column " + std::to_string(col + 1));
  return v;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line))
    throw ParseError(path + ": empty file, expected header y,x1,...,xp");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto header = split_fields(line);
  if (header.empty() || trim(header[0]) != "y")
    throw ParseError(path + ":1: first header column must be 'y', got '" +
                     (header.empty() ? "" : header[0]) + "'");
  const std::size_t p = header.size() - 1;
  if (p == 0) throw ParseError(path + ":1: no feature columns in header");
  for (std::size_t j = 1; j < header.size(); ++j) {
    const std::string expect = "x" + std::to_string(j);
    if (trim(header[j]) != expect)
      throw ParseError(path + ":1: header column " + std::to_string(j + 1) +
                       " must be '" + expect + "', got '" + header[j] + "'");
  }

  std::vector<double> ys;
  std::vector<double> xs;  // row-major
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != p + 1)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(p + 1) + " fields, got " +
                       std::to_string(fields.size()));
    ys.push_back(parse_double(fields[0], path, line_no, 0));
    for (std::size_t j = 1; j <= p; ++j)
      xs.push_back(parse_double(fields[j], path, line_no, j));
  }
  if (ys.empty()) throw ParseError(path + ": no data rows");

  const Eigen::Index n = static_cast<Eigen::Index>(ys.size());
  Dataset d;
  d.y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
  d.X = Eigen::Map<
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xs.data(), n, static_cast<Eigen::Index>(p));
  validate_dataset(d);
  return d;
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << "y";
  for (Eigen::Index j = 0; j < d.p(); ++j) out << ",x" << (j + 1);
  out << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", d.y[i]);
    out << buf;
    for (Eigen::Index j = 0; j < d.p(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", d.X(i, j));
      out << ',' << buf;
    }
    out << "\n";
  }
}

}  // namespace tlqr
