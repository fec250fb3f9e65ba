#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace rbsgm::csv {

/// %.17g text (round-trips any double) with a '.' separator.
std::string format_double(double value);

/// Writes one comma-separated row followed by '\n'.
void write_row(std::ostream& os, std::initializer_list<std::string_view> fields);

}  // namespace rbsgm::csv
