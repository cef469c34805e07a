#include "lyap/io.hpp"

#include <cstdio>

#include "json.hpp"
#include "lyap/errors.hpp"

namespace lyap {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw InvalidInput("JSON syntax error at line " + std::to_string(line) + ": " + e.what());
  }
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InvalidInput(where + ": missing field \"" + key + "\"");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InvalidInput(where + ": expected a number");
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidInput(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix matrix(const json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidInput(where + ": expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(numbers(j[i], where + "[" + std::to_string(i) + "]"));
  try {
    return Matrix::from_rows(rows);
  } catch (const InvalidInput& e) {
    throw InvalidInput(where + ": " + e.what());
  }
}

std::string type_of(const json& j, const std::string& where) {
  const auto& t = field(j, "type", where);
  if (!t.is_string()) throw InvalidInput(where + ".type: expected a string");
  return t.get<std::string>();
}

template <class F>
auto wrap(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    throw InvalidInput(where + ": " + msg);
  }
}

ErgodicSystem system_from(const json& j, const std::string& where) {
  const auto type = type_of(j, where);
  return wrap(where, [&] {
    if (type == "bernoulli") return ErgodicSystem::bernoulli(numbers(field(j, "p", where), where + ".p"));
    if (type == "markov") {
      const auto& P = field(j, "P", where);
      if (!P.is_array()) throw InvalidInput(where + ".P: expected an array of rows");
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < P.size(); ++i)
        rows.push_back(numbers(P[i], where + ".P[" + std::to_string(i) + "]"));
      return ErgodicSystem::markov(rows);
    }
    if (type == "torus") return ErgodicSystem::torus(numbers(field(j, "alpha", where), where + ".alpha"));
    if (type == "reference") return reference_system();
    throw InvalidInput(where + ".type: unknown system type \"" + type + "\"");
  });
}

Cocycle rotation_diagonal(const std::vector<double>& angles, const std::vector<double>& diag) {
  if (diag.size() != 2) throw InvalidInput("rotation_diagonal needs a diagonal of length 2");
  if (angles.empty()) throw InvalidInput("rotation_diagonal needs at least one angle");
  const Matrix d = Matrix::diagonal(std::span<const double>(diag));
  std::vector<Matrix> ms;
  for (double a : angles) ms.push_back(Matrix::rotation(a) * d);
  if (ms.size() == 1) return Cocycle::constant(ms.front());
  return Cocycle::locally_constant(std::move(ms));
}

Cocycle cocycle_from(const json& j, const std::string& where) {
  const auto type = type_of(j, where);
  return wrap(where, [&]() -> Cocycle {
    if (type == "constant") return Cocycle::constant(matrix(field(j, "matrix", where), where + ".matrix"));
    if (type == "locally_constant") {
      const auto& ms = field(j, "matrices", where);
      if (!ms.is_array()) throw InvalidInput(where + ".matrices: expected an array of matrices");
      std::vector<Matrix> out;
      for (std::size_t i = 0; i < ms.size(); ++i)
        out.push_back(matrix(ms[i], where + ".matrices[" + std::to_string(i) + "]"));
      return Cocycle::locally_constant(std::move(out));
    }
    if (type == "rotation_diagonal") {
      return rotation_diagonal(numbers(field(j, "angles", where), where + ".angles"),
                               numbers(field(j, "diagonal", where), where + ".diagonal"));
    }
    if (type == "torus_function") {
      const auto& dj = field(j, "dim", where);
      if (!dj.is_number_unsigned()) throw InvalidInput(where + ".dim: expected a positive integer");
      const auto dim = dj.get<std::size_t>();
      const auto& entries = field(j, "entries", where);
      if (!entries.is_array()) throw InvalidInput(where + ".entries: expected an array");
      std::vector<TrigPolynomial> polys;
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const std::string ew = where + ".entries[" + std::to_string(e) + "]";
        if (!entries[e].is_array()) throw InvalidInput(ew + ": expected an array of terms");
        TrigPolynomial poly;
        for (std::size_t t = 0; t < entries[e].size(); ++t) {
          const std::string tw = ew + "[" + std::to_string(t) + "]";
          const auto& term = entries[e][t];
          TrigTerm tt;
          const auto& f = field(term, "freq", tw);
          if (!f.is_array()) throw InvalidInput(tw + ".freq: expected an array of integers");
          for (const auto& k : f) {
            if (!k.is_number_integer()) throw InvalidInput(tw + ".freq: expected integers");
            tt.freq.push_back(k.get<int>());
          }
          if (term.contains("cos")) tt.cos_coef = number(term["cos"], tw + ".cos");
          if (term.contains("sin")) tt.sin_coef = number(term["sin"], tw + ".sin");
          poly.push_back(std::move(tt));
        }
        polys.push_back(std::move(poly));
      }
      return Cocycle::torus_function(dim, std::move(polys));
    }
    if (type == "perturbed") {
      return Cocycle::perturbed(cocycle_from(field(j, "base", where), where + ".base"),
                                cocycle_from(field(j, "direction", where), where + ".direction"),
                                number(field(j, "h", where), where + ".h"));
    }
    if (type == "reference") return reference_cocycle();
    throw InvalidInput(where + ".type: unknown cocycle type \"" + type + "\"");
  });
}

}  // namespace

ErgodicSystem parse_system(std::string_view text) { return system_from(parse_text(text), "system"); }

Cocycle parse_cocycle(std::string_view text) { return cocycle_from(parse_text(text), "cocycle"); }

DeviationProfile parse_profile(std::string_view text) {
  const json j = parse_text(text);
  const std::string where = "profile";
  return wrap(where, [&] {
    const auto& dj = field(j, "devf", where);
    const auto dtype = type_of(dj, where + ".devf");
    DeviationSize devf;
    if (dtype == "constant")
      devf = DevConstant{number(field(dj, "eps", where + ".devf"), where + ".devf.eps")};
    else if (dtype == "power")
      devf = DevPower{number(field(dj, "a", where + ".devf"), where + ".devf.a")};
    else
      throw InvalidInput(where + ".devf.type: unknown deviation size \"" + dtype + "\"");

    const auto& mj = field(j, "mesf", where);
    const std::string mw = where + ".mesf";
    const auto mtype = type_of(mj, mw);
    DeviationMeasure mesf;
    if (mtype == "exponential")
      mesf = MesExponential{number(field(mj, "c", mw), mw + ".c")};
    else if (mtype == "subexp_power")
      mesf = MesSubExpPower{number(field(mj, "c", mw), mw + ".c"), number(field(mj, "b", mw), mw + ".b")};
    else if (mtype == "subexp_log")
      mesf = MesSubExpLog{number(field(mj, "c", mw), mw + ".c"), number(field(mj, "b", mw), mw + ".b")};
    else
      throw InvalidInput(mw + ".type: unknown deviation measure \"" + mtype + "\"");

    const double t_min = j.contains("t_min") ? number(j["t_min"], where + ".t_min") : kDefaultTMin;
    return DeviationProfile(devf, mesf, t_min);
  });
}

ErgodicSystem reference_system() { return ErgodicSystem::bernoulli({0.5, 0.5}); }

Cocycle reference_cocycle() { return rotation_diagonal({0.25, -0.25}, {2.0, 0.5}); }

}  // namespace lyap
