#include "nufocus/units.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace nufocus::units {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

struct Suffix {
  std::string_view name;
  double scale;
};

// Multipliers from the written unit to internal units.
std::vector<Suffix> suffixes(Quantity kind) {
  switch (kind) {
    case Quantity::energy:
      return {{"eV", 1e3}, {"meV", 1.0}, {"ueV", 1e-3}, {"µeV", 1e-3}, {"μeV", 1e-3}};
    case Quantity::time:
      return {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"µs", 1e-6}, {"μs", 1e-6},
              {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15}};
    case Quantity::field:
      return {{"T", 1.0}, {"mT", 1e-3}};
    case Quantity::rate:
      return {{"Hz", 1.0}, {"1/s", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
    case Quantity::frequency:
      return {{"Hz", two_pi}, {"kHz", two_pi * 1e3}, {"MHz", two_pi * 1e6},
              {"GHz", two_pi * 1e9}, {"rad/s", 1.0}};
    case Quantity::angle:
      return {{"rad", 1.0}, {"pi", pi}, {"deg", pi / 180.0}};
    case Quantity::dimensionless:
    case Quantity::count:
      return {};
  }
  return {};
}

double default_scale(Quantity kind) { return kind == Quantity::frequency ? two_pi : 1.0; }

}  // namespace

double parse_quantity(std::string_view text, Quantity kind) {
  const std::string_view t = trim(text);
  if (t.empty()) throw std::invalid_argument("empty value");

  const std::string buf(t);
  char* end = nullptr;
  const double number = std::strtod(buf.c_str(), &end);
  if (end == buf.c_str()) throw std::invalid_argument("expected a number in '" + buf + "'");
  const std::string_view unit = trim(std::string_view(end));

  if (kind == Quantity::count) {
    if (!unit.empty()) throw std::invalid_argument("count takes no unit: '" + buf + "'");
    if (number != std::floor(number)) throw std::invalid_argument("expected an integer: '" + buf + "'");
    return number;
  }
  if (unit.empty()) return number * default_scale(kind);
  for (const auto& s : suffixes(kind)) {
    if (s.name == unit) return number * s.scale;
  }
  throw std::invalid_argument("unknown unit '" + std::string(unit) + "' in '" + buf + "'");
}

std::string_view canonical_unit(Quantity kind) {
  switch (kind) {
    case Quantity::energy: return "meV";
    case Quantity::time: return "s";
    case Quantity::field: return "T";
    case Quantity::rate: return "Hz";
    case Quantity::frequency: return "rad/s";
    case Quantity::angle: return "rad";
    case Quantity::dimensionless:
    case Quantity::count: return "";
  }
  return "";
}

std::string format_quantity(double value, Quantity kind) {
  char buf[64];
  if (kind == Quantity::count) {
    std::snprintf(buf, sizeof buf, "%.0f", value);
    return buf;
  }
  std::string out(buf, std::to_chars(buf, buf + sizeof buf, value).ptr);
  const auto unit = canonical_unit(kind);
  if (!unit.empty()) {
    out += ' ';
    out += unit;
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view t, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto at = t.find(sep, pos);
    parts.push_back(trim(t.substr(pos, at - pos)));
    if (at == std::string_view::npos) break;
    pos = at + 1;
  }
  return parts;
}

// Text after the leading number, e.g. "pi" in "0.5pi".
std::string_view unit_suffix(std::string_view part) {
  const std::string buf(part);
  char* end = nullptr;
  std::strtod(buf.c_str(), &end);
  return trim(part.substr(static_cast<std::size_t>(end - buf.c_str())));
}

// A unit on the last element applies to every element written without one.
std::vector<double> parse_parts(const std::vector<std::string_view>& parts, Quantity kind) {
  const std::string_view shared = unit_suffix(parts.back());
  std::vector<double> out;
  for (auto part : parts) {
    if (unit_suffix(part).empty() && !shared.empty()) {
      out.push_back(parse_quantity(std::string(part) + " " + std::string(shared), kind));
    } else {
      out.push_back(parse_quantity(part, kind));
    }
  }
  return out;
}

}  // namespace

std::vector<double> parse_value_list(std::string_view text, Quantity kind) {
  const std::string_view t = trim(text);
  std::vector<double> out;
  if (t.empty()) return out;

  if (t.find(':') != std::string_view::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:step");
    const auto v3 = parse_parts(parts, kind);
    const double start = v3[0], stop = v3[1], step = v3[2];
    if (!(step > 0.0)) throw std::invalid_argument("range step must be positive");
    if (stop < start) throw std::invalid_argument("range stop must not precede start");
    // Inclusive endpoint with a relative slack for decimal steps like 0.1meV.
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    out.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
      double v = start + static_cast<double>(i) * step;
      if (std::abs(v) < 1e-9 * step) v = 0.0;
      // Drop accumulated rounding so -1.5 + 1*0.1 reads back as -1.4.
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.15g", v);
      out.push_back(std::strtod(buf, nullptr));
    }
    return out;
  }
  return parse_parts(split(t, ','), kind);
}

}  // namespace nufocus::units
