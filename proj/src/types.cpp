#include "buildimpact/types.hpp"

#include <cctype>
#include <cstdio>

#include "buildimpact/error.hpp"

namespace buildimpact {

std::string to_string(const DependencyEdge& edge) {
  return edge.dependency + " -> " + edge.dependent;
}

DependencyChain DependencyChain::slice(std::size_t first,
                                       std::size_t last) const {
  if (first > last || last > targets.size()) {
    throw PreconditionError("chain slice out of range");
  }
  return DependencyChain{{targets.begin() + static_cast<std::ptrdiff_t>(first),
                          targets.begin() + static_cast<std::ptrdiff_t>(last)}};
}

std::size_t DependencyChain::position(std::string_view target) const {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] == target) return i;
  }
  return targets.size();
}

DependencyChain concat(const DependencyChain& a, const DependencyChain& b) {
  DependencyChain out = a;
  out.targets.insert(out.targets.end(), b.targets.begin(), b.targets.end());
  return out;
}

std::string to_string(const DependencyChain& chain) {
  std::string out = "(";
  for (std::size_t i = 0; i < chain.targets.size(); ++i) {
    if (i) out += ',';
    out += chain.targets[i];
  }
  out += ')';
  return out;
}

TimeWindow trailing_window(Timestamp end, std::chrono::milliseconds span) {
  return TimeWindow{end - span, end};
}

namespace {

bool read_digits(std::string_view text, std::size_t& pos, std::size_t count,
                 int& value) {
  if (pos + count > text.size()) return false;
  value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    value = value * 10 + (c - '0');
  }
  pos += count;
  return true;
}

bool expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c) return false;
  ++pos;
  return true;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const auto fail = [&] {
    return ParseError("invalid RFC 3339 timestamp '" + std::string(text) + "'");
  };
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!read_digits(text, pos, 4, y) || !expect(text, pos, '-') ||
      !read_digits(text, pos, 2, mo) || !expect(text, pos, '-') ||
      !read_digits(text, pos, 2, d)) {
    throw fail();
  }
  if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't')) {
    throw fail();
  }
  ++pos;
  if (!read_digits(text, pos, 2, h) || !expect(text, pos, ':') ||
      !read_digits(text, pos, 2, mi) || !expect(text, pos, ':') ||
      !read_digits(text, pos, 2, s)) {
    throw fail();
  }
  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int scale = 100;
    std::size_t digits = 0;
    while (pos < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[pos]))) {
      millis += (text[pos] - '0') * scale;
      scale /= 10;
      ++pos;
      ++digits;
    }
    if (digits == 0) throw fail();
  }
  minutes offset{0};
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    const int sign = text[pos] == '+' ? 1 : -1;
    ++pos;
    int oh = 0, om = 0;
    if (!read_digits(text, pos, 2, oh) || !expect(text, pos, ':') ||
        !read_digits(text, pos, 2, om)) {
      throw fail();
    }
    offset = minutes{sign * (oh * 60 + om)};
  } else {
    throw fail();
  }
  if (pos != text.size()) throw fail();

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) throw fail();
  return time_point_cast<milliseconds>(sys_days{ymd}) + hours{h} +
         minutes{mi} + seconds{s} + milliseconds{millis} - offset;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  auto rest = t - day_point;
  const auto h = duration_cast<hours>(rest);
  rest -= h;
  const auto mi = duration_cast<minutes>(rest);
  rest -= mi;
  const auto s = duration_cast<seconds>(rest);
  rest -= s;
  const auto ms = rest.count();

  char buf[40];
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                  static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                  static_cast<int>(mi.count()), static_cast<int>(s.count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ",
                  static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                  static_cast<int>(mi.count()), static_cast<int>(s.count()),
                  static_cast<int>(ms));
  }
  return buf;
}

}  // namespace buildimpact
