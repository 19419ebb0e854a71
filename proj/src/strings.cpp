#include "patchvote/strings.hpp"

#include <cctype>
#include <cstdint>
#include <stdexcept>

namespace patchvote {

namespace {

[[noreturn]] void bad(const std::string& what, const std::string& text) {
  throw std::invalid_argument("bad " + what + ": '" + text + "'");
}

// The sto* family skips leading whitespace and counts it as consumed, so the
// whole-string check below would let " 5" through without this guard.
void reject_empty_or_padded(const std::string& text, const std::string& what) {
  if (text.empty() || std::isspace(static_cast<unsigned char>(text.front())))
    bad(what, text);
}

}  // namespace

int parse_int(const std::string& text, const std::string& what) {
  reject_empty_or_padded(text, what);
  try {
    size_t used = 0;
    int v = std::stoi(text, &used);
    if (used != text.size()) bad(what, text);
    return v;
  } catch (const std::invalid_argument&) {
    bad(what, text);
  } catch (const std::out_of_range&) {
    bad(what, text);
  }
}

uint64_t parse_u64(const std::string& text, const std::string& what) {
  reject_empty_or_padded(text, what);
  try {
    size_t used = 0;
    if (text[0] == '-') bad(what, text);
    uint64_t v = std::stoull(text, &used);
    if (used != text.size()) bad(what, text);
    return v;
  } catch (const std::invalid_argument&) {
    bad(what, text);
  } catch (const std::out_of_range&) {
    bad(what, text);
  }
}

double parse_double(const std::string& text, const std::string& what) {
  reject_empty_or_padded(text, what);
  try {
    size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) bad(what, text);
    return v;
  } catch (const std::invalid_argument&) {
    bad(what, text);
  } catch (const std::out_of_range&) {
    bad(what, text);
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string strip(const std::string& text) {
  size_t a = text.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = text.find_last_not_of(" \t\r\n");
  return text.substr(a, b - a + 1);
}

}  // namespace patchvote
