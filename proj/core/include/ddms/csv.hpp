#pragma once

#include <string>
#include <vector>

namespace ddms {

/// Minimal CSV support for the tool's own file formats: one header row,
/// comma separators, no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const; // -1 when absent
};

CsvTable read_csv(const std::string& path);

/// Numeric column by name; throws std::runtime_error when missing or
/// non-numeric.
std::vector<double> csv_numeric_column(const CsvTable& table,
                                       const std::string& name);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// FNV-1a over a string; used for config hashes in run manifests.
std::uint64_t fnv1a64(const std::string& text);

} // namespace ddms
