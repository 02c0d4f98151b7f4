#pragma once

#include <iosfwd>
#include <string>

#include "incmart/sample_path.hpp"

namespace incmart {

/// Shortest round-tripping text form used across CSV output: 17 significant
/// digits, so parsing it back yields the identical double.
std::string format_double(double x);

/// CSV with header `time,value,jump`; jump column is 0 where no jump is
/// recorded.
void write_csv(std::ostream& out, const SamplePath& path);
std::string to_csv(const SamplePath& path);

/// Parses the CSV written by write_csv. The grid is rebuilt from the time
/// column; a path with any nonzero jump is read back as cadlag, otherwise as
/// continuous.
SamplePath read_csv(std::istream& in);
SamplePath path_from_csv(const std::string& text);

}  // namespace incmart
