// lyapctl: seeded Monte Carlo experiments on linear cocycles.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lyap/cli/run.hpp"
#include "lyap/errors.hpp"

namespace {

using nlohmann::json;

enum class Kind { U64, Int, Real, IntList, RealList, Json, Text, Flag };

struct FlagSpec {
  const char* name;  // without dashes; the JSON key replaces '-' by '_'
  Kind kind;
  const char* help;
};

const std::vector<FlagSpec> kCommon{
    {"seed", Kind::U64, "master seed (required here or in the config)"},
    {"samples", Kind::Int, "Monte Carlo samples per estimate (default 10000)"},
    {"workers", Kind::Int, "worker threads; never changes results (default 1)"},
    {"out", Kind::Text, "CSV output path (default: stdout)"},
    {"summary", Kind::Text, "JSON summary path (default: --out with a .json extension)"},
    {"plot", Kind::Text, "two-column data file for plotting"},
    {"system", Kind::Json, "base system: inline JSON, a file path, or 'reference' (default)"},
    {"profile", Kind::Json, "deviation profile: inline JSON or a file path"},
};

const std::map<std::string, std::vector<FlagSpec>> kPerCommand{
    {"estimate-le",
     {{"cocycle", Kind::Json, "cocycle: inline JSON, a file path, or 'reference'"},
      {"n", Kind::Int, "scale"},
      {"n-grid", Kind::IntList, "comma-separated scales"},
      {"k", Kind::Int, "exponent index (default 1)"},
      {"exact", Kind::Flag, "exact enumeration for locally constant cocycles over shifts"}}},
    {"spectrum", {{"cocycle", Kind::Json, "cocycle"}, {"n", Kind::Int, "scale"}}},
    {"verify-ap",
     {{"chain", Kind::Json, "chain of matrices: inline JSON array or a file path"},
      {"n", Kind::Int, "chain length of generated chains"},
      {"n-grid", Kind::IntList, "chain lengths, cycled over trials"},
      {"epsilon", Kind::Real, "angle threshold (default 0.5)"},
      {"kappa", Kind::Real, "inverse gap threshold (default 1e-4)"},
      {"trials", Kind::Int, "number of generated chains (default 1)"},
      {"c-ap", Kind::Real, "AP constant (default: calibrated)"},
      {"c-gate", Kind::Real, "gate constant c in kappa <= c eps^2 (default 0.01)"}}},
    {"ldt-probe",
     {{"cocycle", Kind::Json, "fiber mode cocycle; omit for Birkhoff averages"},
      {"observable", Kind::Json, "{\"cylinder\": [...]} or {\"box\": {...}} (default: first-symbol indicator)"},
      {"epsilon", Kind::Real, "deviation size"},
      {"n-grid", Kind::IntList, "comma-separated scales"}}},
    {"multiscale",
     {{"cocycle", Kind::Json, "cocycle B"},
      {"reference", Kind::Json, "reference cocycle A (default: B)"},
      {"n0", Kind::Int, "initial scale"},
      {"growth", Kind::Real, "growth exponent a, n_{k+1} = max(ceil(n_k^{1+a}), 2 n_k + 1) (default 1)"},
      {"steps", Kind::Int, "number of inductive steps (default 1)"},
      {"epsilon", Kind::Real, "epsilon of the run"},
      {"kappa", Kind::Real, "gap of the reference cocycle (default: estimated)"},
      {"C", Kind::Real, "step constant (default: estimated)"},
      {"eta0", Kind::Real, "initial eta (default: measured drop + 3 sigma + 0.01)"},
      {"theta0", Kind::Real, "initial theta (default 0.01)"}}},
    {"continuity-scan",
     {{"cocycle", Kind::Json, "cocycle A = B1"},
      {"direction", Kind::Json, "perturbation direction E, B2 = A + h E (default E_00)"},
      {"n-grid", Kind::IntList, "comma-separated scales"},
      {"C1", Kind::Real, "distance rate (default: 2 C0 + kappa/10 + 0.05)"},
      {"kappa", Kind::Real, "gap used for C1 (default: estimated)"},
      {"delta0", Kind::Real, "neighborhood radius (default 0.1)"},
      {"p", Kind::Real, "distance exponent (default 2)"}}},
    {"usc-probe",
     {{"cocycle", Kind::Json, "cocycle A"},
      {"cocycle-b", Kind::Json, "cocycle B (default: A + h E)"},
      {"direction", Kind::Json, "perturbation direction E"},
      {"h", Kind::Real, "perturbation size (default 1e-3)"},
      {"mode", Kind::Text, "finite | minus_infinity (default finite)"},
      {"value", Kind::Real, "eps (finite) or t (minus_infinity)"},
      {"l1", Kind::Real, "L1(A) (default: Lambda at proxy-n)"},
      {"proxy-n", Kind::Int, "proxy scale for L1(A) (default 100 max n)"},
      {"delta", Kind::Real, "neighborhood radius (default 0.1)"},
      {"n-grid", Kind::IntList, "comma-separated scales"},
      {"p", Kind::Real, "distance exponent (default 2)"}}},
    {"speed-probe",
     {{"cocycle", Kind::Json, "cocycle"},
      {"n-grid", Kind::IntList, "comma-separated scales, each >= psi(t_min)"},
      {"C", Kind::Real, "step constant (default: estimated)"}}},
    {"modulus-scan",
     {{"cocycle", Kind::Json, "cocycle A"},
      {"direction", Kind::Json, "perturbation direction E (default E_00)"},
      {"h-grid", Kind::RealList, "comma-separated h values (default 1e-1, ..., 1e-6)"},
      {"c", Kind::Real, "modulus constant (default 1 / (2 C1))"},
      {"C1", Kind::Real, "distance rate used for the default c"},
      {"kappa", Kind::Real, "gap used for C1 (default: estimated)"},
      {"p", Kind::Real, "exponent p (default 2)"},
      {"proxy-n", Kind::Int, "scale proxying L1 for sampled cocycles (default 1000)"}}},
};

std::string key_of(const char* name) {
  std::string k = name;
  for (auto& ch : k)
    if (ch == '-') ch = '_';
  return k;
}

json json_arg(const std::string& flag, const std::string& v) {
  if (v == "reference") return v;
  const auto first = v.find_first_not_of(" \t\r\n");
  std::string text = v;
  if (first == std::string::npos || (v[first] != '{' && v[first] != '[')) {
    std::ifstream f(v, std::ios::binary);
    if (!f) throw lyap::InvalidInput("--" + flag + ": not JSON and not a readable file: " + v);
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw lyap::InvalidInput("--" + flag + ": " + e.what());
  }
}

template <class T>
T parse_number(const std::string& flag, const std::string& s) {
  std::istringstream in(s);
  T v{};
  in >> v;
  if (!in || !in.eof()) throw lyap::InvalidInput("--" + flag + ": cannot parse \"" + s + "\"");
  return v;
}

json convert(const FlagSpec& f, const std::string& v) {
  switch (f.kind) {
    case Kind::U64: return parse_number<std::uint64_t>(f.name, v);
    case Kind::Int: {
      if (!v.empty() && v[0] == '-') throw lyap::InvalidInput(std::string("--") + f.name + ": must be >= 0");
      return parse_number<std::size_t>(f.name, v);
    }
    case Kind::Real: return parse_number<double>(f.name, v);
    case Kind::IntList:
    case Kind::RealList: {
      json arr = json::array();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (f.kind == Kind::IntList)
          arr.push_back(parse_number<std::size_t>(f.name, item));
        else
          arr.push_back(parse_number<double>(f.name, item));
      }
      return arr;
    }
    case Kind::Json: return json_arg(f.name, v);
    case Kind::Text: return v;
    case Kind::Flag: return true;
  }
  return nullptr;
}

struct Bound {
  FlagSpec spec;
  CLI::Option* opt = nullptr;
  std::string value;
  bool flag = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lyapctl: seeded Monte Carlo experiments on linear cocycles"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  std::map<std::string, std::pair<CLI::App*, std::vector<Bound>>> subs;
  std::map<std::string, std::string> config_paths;
  for (const auto& name : lyap::cli::subcommands()) {
    auto* sub = app.add_subcommand(name, lyap::cli::columns_help(name));
    sub->set_help_flag("--help", "print this help and exit");
    auto& [ptr, bound] = subs[name];
    ptr = sub;
    sub->add_option("--config", config_paths[name], "JSON config with \"schema\": \"lyap.config/1\"");
    std::vector<FlagSpec> specs = kCommon;
    const auto& extra = kPerCommand.at(name);
    specs.insert(specs.end(), extra.begin(), extra.end());
    bound.reserve(specs.size());
    for (const auto& s : specs) {
      auto& b = bound.emplace_back();
      b.spec = s;
      const std::string flag = std::string("--") + s.name;
      if (s.kind == Kind::Flag)
        b.opt = sub->add_flag(flag, b.flag, s.help);
      else
        b.opt = sub->add_option(flag, b.value, s.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  for (auto& [name, entry] : subs) {
    auto& [sub, bound] = entry;
    if (!sub->parsed()) continue;
    lyap::cli::ExperimentConfig cfg;
    try {
      json params = config_paths[name].empty() ? json::object() : lyap::cli::load_config(config_paths[name]);
      for (const auto& b : bound)
        if (b.opt->count() > 0) params[key_of(b.spec.name)] = convert(b.spec, b.value);
      cfg = lyap::cli::ExperimentConfig::from_params(name, std::move(params));
    } catch (const std::exception& e) {
      std::cerr << "lyapctl " << name << ": error: " << e.what() << '\n';
      return 1;
    }
    return lyap::cli::run(cfg, std::cout, std::cerr);
  }
  return 1;
}
