#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "glfuse/model.hpp"

namespace glfuse {

// Panel file: header `area,source,estimate,se`, one row per (area, source),
// V = se^2. An optional fifth column `variance` overrides se^2 exactly (it is
// what save_panel writes so that a save/load round trip is lossless).
// Areas and sources keep their order of first appearance.
SourcePanel load_panel(const std::filesystem::path& path);
void save_panel(const std::filesystem::path& path, const SourcePanel& panel);

// Everything a command needs; serialized into manifest.json.
struct RunConfig {
  std::string command;  // fit | simulate | evaluate | diagnose
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;

  // fit
  std::string panel_path;
  std::vector<std::string> models;  // m11a ... m12, one-source; simulate also takes mbr, msa
  std::string source;               // one-source fit: source name or 1-based index
  SamplerSettings settings = SamplerSettings::point_estimation();
  double level = 0.95;
  bool save_draws = false;

  // simulate
  int case_id = 0;
  std::string specs = "all";  // "all" or a spec file
  std::vector<int> rows;      // empty = every row
  std::string preset = "desk";
  std::size_t replicates = 0;  // 0 = preset default
  std::string compare;         // two-source | one-vs-two ("" = by case)
  std::size_t n_sources = 2;   // 4 switches V to bootstrap mode
  std::string v_pool_path;     // panel file whose variances form the pool
  std::string delta_scope = "unit";
  bool resume = false;

  // evaluate / diagnose
  std::string estimates_path;
  std::string truths_path;
  std::string draws_dir;
};

std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// FNV-1a of the canonical JSON of the fields that determine the outputs
// (command, seed, inputs and settings; not the output directory or resume).
std::string manifest_hash(const RunConfig& config);

// Writes manifest.json (config, version, hash) into the output directory.
void write_manifest(const std::filesystem::path& dir, const RunConfig& config);

// First line of every CSV output.
std::string manifest_line(const std::string& hash);

// Reads a CSV with a header, skipping '#' lines; returns header and rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace glfuse
