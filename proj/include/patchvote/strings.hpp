#pragma once

#include <string>
#include <vector>

namespace patchvote {

// Strict numeric parsing; throws std::invalid_argument naming `what` when the
// whole string is not a valid number.
int parse_int(const std::string& text, const std::string& what);
uint64_t parse_u64(const std::string& text, const std::string& what);
double parse_double(const std::string& text, const std::string& what);

std::vector<std::string> split(const std::string& text, char sep);
std::string strip(const std::string& text);

}  // namespace patchvote
