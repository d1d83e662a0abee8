#include "cpelt/cli/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cpelt/errors.hpp"

namespace cpelt::cli {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::ifstream open_or_fail(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::parse, "cannot open '" + path + "'");
  return in;
}

}  // namespace

int csv_covariates(const std::string& path) {
  std::ifstream in = open_or_fail(path);
  std::string header;
  if (!std::getline(in, header)) fail(Errc::schema, path + ": empty file, expected a header row");
  return static_cast<int>(split_commas(trim(header)).size()) - 1;
}

DataSet ingest_csv(const std::string& path, int p) {
  require(p >= 1, "covariate count must be >= 1");
  std::ifstream in = open_or_fail(path);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::schema, path + ": empty file, expected a header row");

  const auto header = split_commas(trim(line));
  bool header_ok = static_cast<int>(header.size()) == p + 1 && trim(header.back()) == "y";
  for (int j = 0; header_ok && j < p; ++j) header_ok = trim(header[j]) == "x" + std::to_string(j + 1);
  if (!header_ok) {
    std::string want;
    for (int j = 1; j <= p; ++j) want += "x" + std::to_string(j) + ",";
    fail(Errc::schema, path + ": header must be '" + want + "y', got '" + std::string(trim(line)) + "'");
  }

  std::vector<double> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto fields = split_commas(row);
    if (static_cast<int>(fields.size()) != p + 1) {
      fail(Errc::schema, path + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                             " columns, expected " + std::to_string(p + 1));
    }
    for (std::string_view f : fields) {
      f = trim(f);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) {
        fail(Errc::parse, path + ": line " + std::to_string(line_no) + ": cell '" + std::string(f) +
                              "' is not a finite number");
      }
      cells.push_back(v);
    }
  }

  const auto n = static_cast<Eigen::Index>(cells.size() / static_cast<std::size_t>(p + 1));
  DataSet data{RowMatrix(n, p), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) data.x(i, j) = cells[static_cast<std::size_t>(i * (p + 1) + j)];
    data.y[i] = cells[static_cast<std::size_t>(i * (p + 1) + p)];
  }
  return data;
}

void write_csv(const std::string& path, const DataSet& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::parse, "cannot write '" + path + "'");
  for (Eigen::Index j = 0; j < data.p(); ++j) out << 'x' << j + 1 << ',';
  out << "y\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.p(); ++j) out << data.x(i, j) << ',';
    out << data.y[i] << '\n';
  }
}

void Fnv1a::update(std::string_view bytes) noexcept {
  for (unsigned char c : bytes) {
    h_ ^= c;
    h_ *= 0x100000001b3ULL;
  }
}

void Fnv1a::update_file(const std::string& path) { update(read_file(path)); }

std::string Fnv1a::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in = open_or_fail(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cpelt::cli
