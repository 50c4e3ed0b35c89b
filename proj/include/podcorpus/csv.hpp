#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace podcorpus::csv {

using Row = std::vector<std::string>;

// RFC 4180 style: fields containing separators, quotes or newlines are quoted.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

struct Table {
  Row header;
  std::vector<Row> rows;

  // Column index by name; throws SchemaError when absent.
  std::size_t column(std::string_view name) const;
};

// Parses a CSV document with a header row. Throws ParseError with the
// 1-based line number on unterminated quotes or ragged rows.
Table parse(std::string_view content);
Table read_file(const std::filesystem::path& path);

}  // namespace podcorpus::csv
