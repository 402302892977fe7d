#pragma once

// Small RFC-4180 CSV helpers shared by the pipeline outputs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oorarch {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Shortest text that parses back to exactly the same double.
std::string format_double(double v);

/// Quotes a field if it contains a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);

/// Splits one CSV record (no embedded newlines) honouring quoted fields.
std::vector<std::string> csv_split(std::string_view line);

/// Metadata that every pipeline output file carries.
struct Provenance {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string tool_version;
};

std::string tool_version();

class CsvWriter {
 public:
  /// Writes "# key=value" provenance lines followed by the header row.
  CsvWriter(const std::filesystem::path& path, const Provenance& prov,
            const std::vector<std::string>& header);

  CsvWriter& field(std::string_view s);
  CsvWriter& field(double v);
  CsvWriter& field(long long v);
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(std::size_t v) { return field(static_cast<long long>(v)); }
  void end_row();

 private:
  std::ofstream out_;
  bool first_in_row_ = true;
};

/// A parsed CSV table: provenance comments skipped, header split off.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> meta;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace oorarch
