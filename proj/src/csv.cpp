#include "rbsgm/csv.hpp"

#include <cmath>
#include <cstdio>

namespace rbsgm::csv {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  // %g honours LC_NUMERIC; the library never calls setlocale, so '.' is guaranteed.
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_row(std::ostream& os, std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (std::string_view field : fields) {
    if (!first) os << ',';
    os << field;
    first = false;
  }
  os << '\n';
}

}  // namespace rbsgm::csv
