#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace twl::io {

// Shortest decimal form that round-trips to the same double.
std::string format_double(double x);

// Strict decimal parse of a whole token; throws ParseError.
double parse_double(std::string_view token);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace twl::io
