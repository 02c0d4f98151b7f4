#include "incmart/path_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace incmart {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& out, const SamplePath& path) {
  out << "time,value,jump\n";
  const auto& grid = path.grid();
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << format_double(grid[i]) << ',' << format_double(path[i]) << ','
        << format_double(path.jump_at(i)) << '\n';
  }
}

std::string to_csv(const SamplePath& path) {
  std::ostringstream out;
  write_csv(out, path);
  return out.str();
}

namespace {

double parse_field(const std::string& field, std::size_t line) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ArgumentError("bad number '" + field + "' on CSV line " + std::to_string(line));
  }
  return value;
}

}  // namespace

SamplePath read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "time,value,jump") {
    throw ArgumentError("expected CSV header 'time,value,jump'");
  }
  std::vector<double> times, values;
  std::vector<Jump<double>> jumps;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw ArgumentError("CSV line " + std::to_string(line_no) + " needs three fields");
    }
    times.push_back(parse_field(a, line_no));
    values.push_back(parse_field(b, line_no));
    const double jump = parse_field(c, line_no);
    if (jump != 0.0) jumps.push_back({times.size() - 1, jump});
  }
  const auto interpolation =
      jumps.empty() ? Interpolation::linear_continuous : Interpolation::cadlag_constant;
  return SamplePath(make_grid(TimeGrid(std::move(times))), std::move(values),
                    std::move(jumps), interpolation);
}

SamplePath path_from_csv(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

}  // namespace incmart
