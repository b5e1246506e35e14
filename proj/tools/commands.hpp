#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace nlst::cli {

enum Exit { kOk = 0, kDomainError = 1, kUsageError = 2 };

using Cell = std::variant<double, long long, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// %#.{precision}g; nan and inf spelled out
std::string format_number(double v, int precision);
// csv: header row, comma separated, LF endings. json: array of objects.
std::string render(const Table& t, const std::string& format, int precision);

// "a,b,c" or "lo:hi:step" (inclusive, step > 0)
std::vector<double> parse_list(const std::string& text);

// Full command line including the program name at args[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nlst::cli
