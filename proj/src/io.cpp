#include "glfuse/io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

#include "glfuse/csv.hpp"
#include "glfuse/errors.hpp"

namespace glfuse {

using nlohmann::json;

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
    } else {
      table.rows.push_back(std::move(fields));
      table.line_numbers.push_back(line_no);
    }
  }
  if (table.header.empty()) throw FormatError(fmt::format("{}: missing header", path.string()));
  return table;
}

SourcePanel load_panel(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const std::string where = path.string();
  const std::vector<std::string> base = {"area", "source", "estimate", "se"};
  auto header = table.header;
  const bool with_variance = header.size() == 5 && header[4] == "variance";
  if (with_variance) header.pop_back();
  if (header != base) {
    throw FormatError(fmt::format("{}: header must be 'area,source,estimate,se' (optionally ',variance')", where));
  }

  std::vector<std::string> areas, sources;
  std::map<std::string, std::size_t> area_index, source_index;
  struct Cell {
    double y, v;
    std::size_t line;
  };
  std::map<std::pair<std::size_t, std::size_t>, Cell> cells;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (f.size() != table.header.size()) {
      throw FormatError(fmt::format("{}:{}: expected {} fields, got {}", where, line, table.header.size(), f.size()));
    }
    if (f[0].empty() || f[1].empty()) throw FormatError(fmt::format("{}:{}: empty area or source", where, line));
    double y = 0.0, se = 0.0, v = 0.0;
    if (!parse_double(f[2], y) || !std::isfinite(y)) {
      throw FormatError(fmt::format("{}:{}: malformed estimate '{}'", where, line, f[2]));
    }
    if (!parse_double(f[3], se) || !std::isfinite(se)) {
      throw FormatError(fmt::format("{}:{}: malformed se '{}'", where, line, f[3]));
    }
    if (!(se > 0.0)) throw FormatError(fmt::format("{}:{}: se must be > 0, got {}", where, line, f[3]));
    v = se * se;
    if (with_variance && !f[4].empty()) {
      if (!parse_double(f[4], v) || !(v > 0.0) || !std::isfinite(v)) {
        throw FormatError(fmt::format("{}:{}: malformed variance '{}'", where, line, f[4]));
      }
    }
    auto [ai, a_new] = area_index.try_emplace(f[0], areas.size());
    if (a_new) areas.push_back(f[0]);
    auto [si, s_new] = source_index.try_emplace(f[1], sources.size());
    if (s_new) sources.push_back(f[1]);
    const auto key = std::make_pair(ai->second, si->second);
    if (auto it = cells.find(key); it != cells.end()) {
      throw FormatError(fmt::format("{}:{}: duplicate (area {}, source {}), first seen on line {}", where, line, f[0],
                                    f[1], it->second.line));
    }
    cells.emplace(key, Cell{y, v, line});
  }
  if (cells.empty()) throw FormatError(fmt::format("{}: no data rows", where));

  SourcePanel panel;
  panel.areas = areas;
  panel.sources = sources;
  panel.y = Matrix(areas.size(), sources.size());
  panel.v = Matrix(areas.size(), sources.size());
  for (std::size_t i = 0; i < areas.size(); ++i) {
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const auto it = cells.find({i, j});
      if (it == cells.end()) {
        throw FormatError(fmt::format("{}: panel is not rectangular, missing (area {}, source {})", where, areas[i],
                                      sources[j]));
      }
      panel.y(i, j) = it->second.y;
      panel.v(i, j) = it->second.v;
    }
  }
  const auto report = validate_panel(panel);
  if (!report.ok()) throw FormatError(fmt::format("{}: {}", where, report.describe()));
  return panel;
}

void save_panel(const std::filesystem::path& path, const SourcePanel& panel) {
  const auto report = validate_panel(panel);
  if (!report.ok()) throw ParameterError("save_panel: " + report.describe());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  out << "area,source,estimate,se,variance\n";
  for (std::size_t i = 0; i < panel.n_areas(); ++i) {
    for (std::size_t j = 0; j < panel.n_sources(); ++j) {
      const std::string area = i < panel.areas.size() ? panel.areas[i] : fmt::format("{}", i + 1);
      const std::string source = j < panel.sources.size() ? panel.sources[j] : fmt::format("{}", j + 1);
      out << csv_field(area) << ',' << csv_field(source) << ',' << format_double(panel.y(i, j)) << ','
          << format_double(std::sqrt(panel.v(i, j))) << ',' << format_double(panel.v(i, j)) << '\n';
    }
  }
}

// ---- configuration ----------------------------------------------------------

namespace {

json settings_json(const SamplerSettings& s) {
  return {{"n_iter", s.n_iter},
          {"n_burnin", s.n_burnin},
          {"n_chains", s.n_chains},
          {"thin", s.thin},
          {"init_overdispersion", s.init_overdispersion}};
}

// Fields that determine outputs, in a fixed order.
json output_fields(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  if (c.command == "fit") {
    j["panel"] = c.panel_path;
    j["models"] = c.models;
    j["source"] = c.source;
    j["settings"] = settings_json(c.settings);
    j["level"] = c.level;
    j["save_draws"] = c.save_draws;
  } else if (c.command == "simulate") {
    j["case"] = c.case_id;
    j["specs"] = c.specs;
    j["rows"] = c.rows;
    j["models"] = c.models;
    j["preset"] = c.preset;
    j["replicates"] = c.replicates;
    j["compare"] = c.compare;
    j["n_sources"] = c.n_sources;
    j["v_pool"] = c.v_pool_path;
    j["delta_scope"] = c.delta_scope;
    j["settings"] = settings_json(c.settings);
  } else if (c.command == "evaluate") {
    j["estimates"] = c.estimates_path;
    j["truths"] = c.truths_path;
  } else if (c.command == "diagnose") {
    j["draws"] = c.draws_dir;
  }
  return j;
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string config_to_json(const RunConfig& c) {
  json j = output_fields(c);
  j["out"] = c.out_dir;
  j["resume"] = c.resume;
  return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  // a manifest.json carries the config under "config"
  if (j.contains("config") && j.at("config").is_object()) j = j.at("config");
  RunConfig c;
  try {
    read_if(j, "command", c.command);
    if (j.contains("seed")) {
      c.seed = j.at("seed").get<std::uint64_t>();
      c.seed_set = true;
    }
    read_if(j, "out", c.out_dir);
    read_if(j, "panel", c.panel_path);
    read_if(j, "models", c.models);
    read_if(j, "source", c.source);
    read_if(j, "level", c.level);
    read_if(j, "save_draws", c.save_draws);
    read_if(j, "case", c.case_id);
    read_if(j, "specs", c.specs);
    read_if(j, "rows", c.rows);
    read_if(j, "preset", c.preset);
    read_if(j, "replicates", c.replicates);
    read_if(j, "compare", c.compare);
    read_if(j, "n_sources", c.n_sources);
    read_if(j, "v_pool", c.v_pool_path);
    read_if(j, "delta_scope", c.delta_scope);
    read_if(j, "resume", c.resume);
    read_if(j, "estimates", c.estimates_path);
    read_if(j, "truths", c.truths_path);
    read_if(j, "draws", c.draws_dir);
    if (j.contains("settings")) {
      const auto& s = j.at("settings");
      read_if(s, "n_iter", c.settings.n_iter);
      read_if(s, "n_burnin", c.settings.n_burnin);
      read_if(s, "n_chains", c.settings.n_chains);
      read_if(s, "thin", c.settings.thin);
      read_if(s, "init_overdispersion", c.settings.init_overdispersion);
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config field has the wrong type: {}", e.what()));
  }
  c.settings.seed = c.seed;
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string manifest_hash(const RunConfig& config) {
  const std::string text = output_fields(config).dump() + "|" + GLFUSE_VERSION;
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

void write_manifest(const std::filesystem::path& dir, const RunConfig& config) {
  json j;
  j["config"] = json::parse(config_to_json(config));
  j["config"].erase("out");
  j["config"].erase("resume");
  j["version"] = GLFUSE_VERSION;
  j["hash"] = manifest_hash(config);
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write {}", (dir / "manifest.json").string()));
  out << j.dump(2) << '\n';
}

std::string manifest_line(const std::string& hash) { return fmt::format("# glfuse manifest={}\n", hash); }

}  // namespace glfuse
