#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tracestrat::csv {

/// Shortest round-trip decimal rendering (std::to_chars). Locale-free, so
/// artifacts are byte-identical across machines.
std::string format_double(double v);

/// Fixed 2-decimal rendering, used for graph edge labels.
std::string format_fixed2(double v);

/// RFC-4180 style quoting: fields containing comma, quote, CR or LF are
/// quoted, embedded quotes doubled.
std::string escape_field(const std::string& field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Splits one CSV record. Handles quoted fields; does not handle records
/// spanning physical lines (the toolkit never writes embedded newlines).
std::vector<std::string> split_row(const std::string& line);

}  // namespace tracestrat::csv
