#pragma once

// Helpers for the line-oriented key=value configuration text.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace ragc::text {

std::string format_double(double v);
std::string join(const std::vector<std::size_t>& values);
std::string join(const std::vector<double>& values);
inline std::string on_off(bool v) { return v ? "on" : "off"; }

std::size_t parse_size(const std::string& key, const std::string& value);
double parse_double(const std::string& key, const std::string& value);
bool parse_on_off(const std::string& key, const std::string& value);
/// Comma-separated; "" or "none" is the empty list.
std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value);
std::vector<double> parse_double_list(const std::string& key, const std::string& value);

/// Parses `key=value` lines; blank lines and lines starting with '#' are
/// skipped, whitespace around keys and values is trimmed.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& content);
std::vector<std::pair<std::string, std::string>> read_key_value_file(const std::string& path);

}  // namespace ragc::text
