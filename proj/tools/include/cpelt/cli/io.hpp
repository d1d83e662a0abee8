#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cpelt/estimation.hpp"

namespace cpelt::cli {

/// Reads a CSV with header "x1,...,xp,y". Cells must be finite numbers.
/// A wrong header or column count is a schema error; a bad cell is a parse
/// error whose message names the line.
DataSet ingest_csv(const std::string& path, int p);

/// Number of covariate columns declared by the header (columns minus one).
int csv_covariates(const std::string& path);

/// Writes `data` in the format read back by ingest_csv, at full precision.
void write_csv(const std::string& path, const DataSet& data);

/// 64-bit FNV-1a.
class Fnv1a {
 public:
  void update(std::string_view bytes) noexcept;
  void update_file(const std::string& path);
  std::uint64_t value() const noexcept { return h_; }
  std::string hex() const;

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string read_file(const std::string& path);

}  // namespace cpelt::cli
