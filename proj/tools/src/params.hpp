#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lyap/cocycle.hpp"
#include "lyap/dynamics.hpp"
#include "lyap/ldt.hpp"

namespace lyap::cli {

using nlohmann::json;

/// Typed access to the merged parameter object. Errors name the key.
class Params {
 public:
  explicit Params(const json& j) : j_(j) {}

  bool has(const char* key) const { return j_.contains(key) && !j_[key].is_null(); }

  double number(const char* key) const;
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
  std::size_t integer(const char* key) const;
  std::size_t integer(const char* key, std::size_t fallback) const { return has(key) ? integer(key) : fallback; }
  std::uint64_t u64(const char* key) const;
  bool flag(const char* key, bool fallback) const;
  std::string string(const char* key, std::string fallback) const;
  std::vector<double> numbers(const char* key) const;
  std::vector<std::size_t> integers(const char* key) const;

  /// `key` if present, else the single-element list from `single`.
  std::vector<std::size_t> scale_grid(const char* key, const char* single) const;

  ErgodicSystem system() const;
  Cocycle cocycle(const char* key) const;
  DeviationProfile profile() const;
  const json& raw(const char* key) const;

 private:
  const json& j_;
};

/// Comma-separated rows with round-trip doubles.
class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header);

  Csv& operator<<(double v);
  Csv& operator<<(std::size_t v);
  Csv& operator<<(bool v);
  Csv& operator<<(std::string_view v);
  Csv& operator<<(const char* v) { return *this << std::string_view(v); }
  /// Empty cell.
  Csv& blank();
  void end_row();

  std::string str() const { return out_.str(); }

 private:
  void sep();
  std::ostringstream out_;
  std::size_t width_;
  std::size_t col_ = 0;
};

/// {"type": "reference"} for the shorthand string "reference".
json expand_shorthand(const json& j);

}  // namespace lyap::cli
