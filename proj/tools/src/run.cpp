#include "lyap/cli/run.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "lyap/errors.hpp"
#include "lyap/io.hpp"

namespace lyap::cli {

namespace {

const CommandSpec& find_command(std::string_view name) {
  for (const auto& c : command_table())
    if (c.name == name) return c;
  throw InvalidInput("unknown subcommand \"" + std::string(name) + "\"");
}

// Keys that never reach the summary: they must not change results.
bool is_runtime_key(const std::string& k) { return k == "workers" || k == "out" || k == "summary" || k == "plot"; }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open " + path + " for writing");
  f << text;
  if (!f) throw InvalidInput("failed writing " + path);
}

std::string plot_text(const std::vector<std::pair<double, double>>& pts) {
  std::string s;
  for (const auto& [x, y] : pts) s += format_double(x) + ' ' + format_double(y) + '\n';
  return s;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : command_table()) out.push_back(c.name);
    return out;
  }();
  return names;
}

std::string columns_help(std::string_view command) {
  const auto& c = find_command(command);
  return c.description + "\nCSV columns: " + c.columns;
}

ExperimentConfig ExperimentConfig::from_params(std::string command, nlohmann::json params) {
  find_command(command);
  if (!params.is_object()) throw InvalidInput("parameters must form a JSON object");
  ExperimentConfig cfg;
  cfg.command = std::move(command);
  const Params p(params);
  if (!p.has("seed")) throw InvalidInput("seed: missing (give --seed or \"seed\" in the config)");
  cfg.seed = p.u64("seed");
  cfg.samples = p.integer("samples", cfg.samples);
  if (cfg.samples == 0) throw InvalidInput("samples: must be >= 1");
  const auto workers = p.integer("workers", 1);
  if (workers == 0 || workers > 1024) throw InvalidInput("workers: must be in [1, 1024]");
  cfg.workers = static_cast<unsigned>(workers);
  cfg.out = p.string("out", "");
  cfg.summary = p.string("summary", "");
  cfg.plot = p.string("plot", "");
  if (cfg.summary.empty() && !cfg.out.empty())
    cfg.summary = std::filesystem::path(cfg.out).replace_extension(".json").string();
  if (!cfg.summary.empty() && cfg.summary == cfg.out) throw InvalidInput("summary: must differ from out");
  cfg.params = std::move(params);
  return cfg;
}

nlohmann::json load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("config: cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw InvalidInput("config " + path + ": JSON syntax error at line " + std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object()) throw InvalidInput("config " + path + ": expected an object");
  const auto it = j.find("schema");
  if (it == j.end() || !it->is_string() || it->get<std::string>() != kConfigSchema)
    throw InvalidInput("config " + path + ": schema: expected \"" + std::string(kConfigSchema) + "\"");
  j.erase("schema");
  return j;
}

RunOutput execute(const ExperimentConfig& config) {
  const auto& c = find_command(config.command);
  const Params p(config.params);
  RunOutput out = c.fn(config, p);
  nlohmann::json echoed = nlohmann::json::object();
  for (auto it = config.params.begin(); it != config.params.end(); ++it)
    if (!is_runtime_key(it.key())) echoed[it.key()] = it.value();
  nlohmann::json result = out.summary;
  out.summary = {{"schema", kResultSchema},
                 {"command", config.command},
                 {"seed", config.seed},
                 {"samples", config.samples},
                 {"params", echoed},
                 {"result", result}};
  if (out.rejection) out.summary["rejection"] = *out.rejection;
  return out;
}

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const auto r = execute(config);
    if (config.out.empty())
      out << r.csv;
    else
      write_file(config.out, r.csv);
    if (!config.summary.empty()) write_file(config.summary, r.summary.dump(2) + "\n");
    if (!config.plot.empty()) write_file(config.plot, plot_text(r.plot));
    if (r.rejection) {
      err << r.rejection->dump() << '\n';
      return 2;
    }
    return 0;
  } catch (const GateError& e) {
    const nlohmann::json j{
        {"schema", kRejectionSchema}, {"command", config.command}, {"gate", e.reason()}, {"detail", e.what()}};
    err << j.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "lyapctl " << config.command << ": error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace lyap::cli
