#include "bbvp/text.hpp"

#include <cstdlib>
#include <iomanip>
#include <sstream>

#include "bbvp/error.hpp"

namespace bbvp {

namespace {

std::vector<std::string> tokens(const std::string& text) {
  std::string cleaned = text;
  for (char& ch : cleaned) {
    if (ch == ',' || ch == '(' || ch == ')' || ch == '[' || ch == ']') ch = ' ';
  }
  std::istringstream is(cleaned);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

double parse_double(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0')) {
    throw Error(ErrorKind::BadInput, "not a number: '" + text + "'");
  }
  return value;
}

Vec parse_vector(const std::string& text) {
  const auto toks = tokens(text);
  if (toks.empty()) {
    throw Error(ErrorKind::BadInput, "empty vector: '" + text + "'");
  }
  Vec v(static_cast<Eigen::Index>(toks.size()));
  for (std::size_t i = 0; i < toks.size(); ++i) v[i] = parse_double(toks[i]);
  return v;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  for (const auto& tok : tokens(text)) {
    if (tok == "+") {
      out.push_back(1);
    } else if (tok == "-") {
      out.push_back(-1);
    } else {
      const double v = parse_double(tok);
      if (v != static_cast<int>(v)) {
        throw Error(ErrorKind::BadInput, "not an integer: '" + tok + "'");
      }
      out.push_back(static_cast<int>(v));
    }
  }
  return out;
}

std::string format_double(double value) {
  std::ostringstream os;
  os << std::setprecision(17) << value;
  return os.str();
}

}  // namespace bbvp
