#include "params.hpp"

#include <cmath>
#include <limits>

#include "lyap/errors.hpp"
#include "lyap/io.hpp"

namespace lyap::cli {

namespace {

InvalidInput bad(const char* key, const std::string& what) { return InvalidInput(std::string(key) + ": " + what); }

bool non_negative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

const json kDefaultProfile = {
    {"devf", {{"type", "constant"}, {"eps", 0.1}}},
    {"mesf", {{"type", "exponential"}, {"c", 1.0}}},
    {"t_min", kDefaultTMin},
};

}  // namespace

const json& Params::raw(const char* key) const {
  if (!has(key)) throw bad(key, "missing");
  return j_[key];
}

double Params::number(const char* key) const {
  const auto& v = raw(key);
  if (!v.is_number()) throw bad(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw bad(key, "expected a finite number");
  return d;
}

std::size_t Params::integer(const char* key) const {
  const auto& v = raw(key);
  if (!non_negative_integer(v)) throw bad(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::uint64_t Params::u64(const char* key) const {
  const auto& v = raw(key);
  if (!non_negative_integer(v)) throw bad(key, "expected a non-negative 64-bit integer");
  return v.get<std::uint64_t>();
}

bool Params::flag(const char* key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = raw(key);
  if (!v.is_boolean()) throw bad(key, "expected true or false");
  return v.get<bool>();
}

std::string Params::string(const char* key, std::string fallback) const {
  if (!has(key)) return fallback;
  const auto& v = raw(key);
  if (!v.is_string()) throw bad(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> Params::numbers(const char* key) const {
  const auto& v = raw(key);
  if (!v.is_array() || v.empty()) throw bad(key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw bad(key, "entry " + std::to_string(i) + " is not a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<std::size_t> Params::integers(const char* key) const {
  const auto& v = raw(key);
  if (!v.is_array() || v.empty()) throw bad(key, "expected a non-empty array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!non_negative_integer(v[i])) throw bad(key, "entry " + std::to_string(i) + " is not a non-negative integer");
    out.push_back(v[i].get<std::size_t>());
  }
  return out;
}

std::vector<std::size_t> Params::scale_grid(const char* key, const char* single) const {
  if (has(key)) return integers(key);
  if (has(single)) return {integer(single)};
  throw InvalidInput(std::string(key) + ": missing (or give " + single + ")");
}

ErgodicSystem Params::system() const {
  if (!has("system")) return reference_system();
  try {
    return parse_system(expand_shorthand(raw("system")).dump());
  } catch (const InvalidInput& e) {
    throw bad("system", e.what());
  }
}

Cocycle Params::cocycle(const char* key) const {
  try {
    return parse_cocycle(expand_shorthand(raw(key)).dump());
  } catch (const InvalidInput& e) {
    throw bad(key, e.what());
  }
}

DeviationProfile Params::profile() const {
  try {
    return parse_profile((has("profile") ? raw("profile") : kDefaultProfile).dump());
  } catch (const InvalidInput& e) {
    throw bad("profile", e.what());
  }
}

json expand_shorthand(const json& j) {
  if (j.is_string() && j.get<std::string>() == "reference") return {{"type", "reference"}};
  return j;
}

Csv::Csv(const std::vector<std::string>& header) : width_(header.size()) {
  for (const auto& h : header) *this << std::string_view(h);
  end_row();
}

void Csv::sep() {
  if (col_++ > 0) out_ << ',';
}

Csv& Csv::operator<<(double v) {
  sep();
  out_ << format_double(v);
  return *this;
}

Csv& Csv::operator<<(std::size_t v) {
  sep();
  out_ << v;
  return *this;
}

Csv& Csv::operator<<(bool v) {
  sep();
  out_ << (v ? "true" : "false");
  return *this;
}

Csv& Csv::operator<<(std::string_view v) {
  sep();
  out_ << v;
  return *this;
}

Csv& Csv::blank() {
  sep();
  return *this;
}

void Csv::end_row() {
  if (col_ != width_) throw std::logic_error("csv row has the wrong number of cells");
  out_ << '\n';
  col_ = 0;
}

}  // namespace lyap::cli
