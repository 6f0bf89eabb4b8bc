#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "pace/common.hpp"

namespace pace {

/// Tidy CSV writer: a fixed header, one observation per row. Numbers are
/// written with enough digits to round-trip.
class CsvWriter {
public:
  CsvWriter(const std::string& path, std::vector<std::string> columns);
  ~CsvWriter();

  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void write_row(const std::vector<std::string>& cells);
  void close();

  static std::string num(double v);
  static std::string num(Index v);
  static std::string num(std::uint64_t v);

  const std::string& path() const { return path_; }

private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_ = 0;
};

/// 64-bit FNV-1a content digest, hex encoded (manifest bookkeeping).
std::string fnv1a_hex(const std::string& bytes);

/// Digest of a file's bytes.
std::string file_digest(const std::string& path);

} // namespace pace
