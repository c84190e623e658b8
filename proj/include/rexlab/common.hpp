#pragma once

#include <charconv>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace rexlab {

// Error categories; the CLI maps these onto exit codes.
enum class errc {
  input,       // bad arguments / out-of-range parameters
  parse,       // malformed file content
  validation,  // structurally valid input violating an invariant
  routing,     // unreachable node touched
  config,      // inconsistent component wiring (model widths, missing files)
  value,       // undefined quantity (zero denominator)
  version,     // unsupported file version
  io           // filesystem failures
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

struct input_error : error {
  explicit input_error(const std::string& w) : error(errc::input, w) {}
};
struct parse_error : error {
  explicit parse_error(const std::string& w) : error(errc::parse, w) {}
};
struct validation_error : error {
  explicit validation_error(const std::string& w) : error(errc::validation, w) {}
};
struct routing_error : error {
  explicit routing_error(const std::string& w) : error(errc::routing, w) {}
};
struct config_error : error {
  explicit config_error(const std::string& w) : error(errc::config, w) {}
};
struct value_error : error {
  explicit value_error(const std::string& w) : error(errc::value, w) {}
};
struct version_error : error {
  explicit version_error(const std::string& w) : error(errc::version, w) {}
};
struct io_error : error {
  explicit io_error(const std::string& w) : error(errc::io, w) {}
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::input: return "input";
    case errc::parse: return "parse";
    case errc::validation: return "validation";
    case errc::routing: return "routing";
    case errc::config: return "config";
    case errc::value: return "value";
    case errc::version: return "version";
    case errc::io: return "io";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Seeded randomness. All sampling goes through these helpers so that a given
// seed reproduces the same stream on every platform; distribution adapters
// from <random> are implementation-defined and are not used.

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Derives an independent deterministic stream, e.g. per scenario or batch.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

// Unbiased integer in [0, n) via rejection sampling.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) throw input_error("uniform_below: empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

// Uniform real in [0, 1) with 53-bit resolution.
inline double uniform_real01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_real01(rng);
}

template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_below(rng, i)]);
  }
}

// ---------------------------------------------------------------------------
// Numbers <-> text. Shortest round-trip form keeps serialized artifacts both
// exact and byte-stable between runs.

inline std::string double_to_string(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw io_error("double_to_string: conversion failed");
  return std::string(buf, end);
}

inline double parse_double(std::string_view text, const std::string& where) {
  double v{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw parse_error(where + ": expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

inline long long parse_int(std::string_view text, const std::string& where) {
  long long v{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw parse_error(where + ": expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Minimal CSV support. Input files in this project are plain numeric tables;
// only the report writer needs quoting.

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Reads a CSV stream, checks the exact header, and hands each data row
// (split into fields) to `row_fn(line_number, fields)`.
template <typename RowFn>
void read_csv(std::istream& in, const std::string& expected_header, const std::string& name,
              RowFn&& row_fn) {
  std::string line;
  if (!std::getline(in, line)) throw parse_error(name + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw parse_error(name + " line 1: expected header '" + expected_header + "', got '" + line +
                      "'");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    row_fn(line_no, split_csv_line(line));
  }
}

}  // namespace rexlab
