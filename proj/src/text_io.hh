// Apache License, Version 2.0, refer to LICENSE.txt

// Whitespace-token reader and writers for the text snapshot formats.

#pragma once

#include <charconv>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "hpyp/pyp_graph.hh"

namespace hpyp::detail {

template <typename T>
void write_array(std::ostream& out, const char* tag, const std::vector<T>& xs) {
  out << tag << ' ' << xs.size();
  for (const T& x : xs) {
    if constexpr (std::is_floating_point_v<T>)
      out << ' ' << format_double(x);
    else
      out << ' ' << x;
  }
  out << '\n';
}

class TokenReader {
 public:
  TokenReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  std::string word() {
    std::string s;
    if (!(in_ >> s)) fail("truncated input");
    return s;
  }
  void expect(const std::string& tag) {
    std::string s = word();
    if (s != tag) fail("expected '" + tag + "', got '" + s + "'");
  }
  std::size_t size() { return static_cast<std::size_t>(integer()); }
  long long integer() {
    std::string s = word();
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("bad integer '" + s + "'");
    return v;
  }
  double real() {
    std::string s = word();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("bad real '" + s + "'");
    return v;
  }
  template <typename T>
  std::vector<T> array(const std::string& tag) {
    expect(tag);
    std::vector<T> xs(size());
    for (T& x : xs) {
      if constexpr (std::is_floating_point_v<T>)
        x = real();
      else if constexpr (std::is_same_v<T, std::string>)
        x = word();
      else
        x = static_cast<T>(integer());
    }
    return xs;
  }
  [[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(what_ + ": " + msg); }

 private:
  std::istream& in_;
  std::string what_;
};

}  // namespace hpyp::detail
