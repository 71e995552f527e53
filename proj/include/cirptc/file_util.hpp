#pragma once

#include <string>
#include <string_view>

namespace cirptc::io {

// Writes to a temporary sibling file, then renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);

std::string read_file(const std::string& path);

// Fixed, locale-independent formatting that round-trips doubles.
std::string format_double(double v);

}  // namespace cirptc::io
