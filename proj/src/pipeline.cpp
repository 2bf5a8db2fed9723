#include "glfuse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "glfuse/csv.hpp"
#include "glfuse/errors.hpp"
#include "glfuse/gibbs.hpp"
#include "glfuse/parallel.hpp"
#include "glfuse/stats.hpp"
#include "glfuse/summary.hpp"

namespace fs = std::filesystem;

namespace glfuse {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  return out;
}

std::string num(double x) { return std::isfinite(x) ? format_double(x) : std::string("NA"); }

bool two_source_default(int case_id) { return case_id <= 4; }

std::string base_model(const std::string& compare) { return compare == "one-vs-two" ? "m1a" : "m12"; }

struct Preset {
  std::size_t replicates, n_iter, n_burnin;
};

Preset preset_for(const std::string& name) {
  if (name == "desk") return {30, 6000, 1000};
  if (name == "paper") return {100, 18000, 3000};
  throw ConfigError(fmt::format("unknown preset '{}' (desk or paper)", name));
}

// one-source fits take the source by name or by 1-based index
std::size_t resolve_source(const SourcePanel& panel, const std::string& source) {
  for (std::size_t j = 0; j < panel.sources.size(); ++j) {
    if (panel.sources[j] == source) return j;
  }
  std::size_t k = 0;
  if (parse_size(source, k) && k >= 1 && k <= panel.n_sources()) return k - 1;
  throw ConfigError(fmt::format("unknown source '{}'", source));
}

std::string area_name(const SourcePanel& panel, std::size_t i) {
  return i < panel.areas.size() ? panel.areas[i] : fmt::format("{}", i + 1);
}

void check_manifest_for_resume(const fs::path& dir, const std::string& hash) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) return;
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  if (ss.str().find(fmt::format("\"hash\": \"{}\"", hash)) == std::string::npos) {
    throw ConfigError(fmt::format("{} was written by a different configuration; refusing to resume", dir.string()));
  }
}

Matrix load_pool(const RunConfig& c) {
  if (c.v_pool_path.empty()) return synthetic_v_pool(62, 2, kPoolSeed);
  return load_panel(c.v_pool_path).v;
}

std::vector<SimSpec> study_specs(const RunConfig& c, const Matrix& pool) {
  std::vector<SimSpec> all = c.specs == "all" ? spec_table(c.case_id) : load_spec_file(c.specs);
  std::vector<SimSpec> out;
  for (auto& s : all) {
    if (s.case_id != c.case_id) continue;
    if (!c.rows.empty() && std::find(c.rows.begin(), c.rows.end(), s.row) == c.rows.end()) continue;
    s.n_replicates = c.replicates;
    s.delta_scope = c.delta_scope == "panel" ? DeltaScope::Panel : DeltaScope::Unit;
    if (c.n_sources != pool.cols()) {
      s.n_sources = c.n_sources;
      s.v_mode = VMode::Bootstrap;
    } else {
      s.n_areas = pool.rows();
      s.n_sources = pool.cols();
      s.v_mode = VMode::Fixed;
    }
    s.validate();
    out.push_back(s);
  }
  for (int r : c.rows) {
    if (std::none_of(out.begin(), out.end(), [&](const SimSpec& s) { return s.row == r; })) {
      throw ConfigError(fmt::format("case {} has no spec row {}", c.case_id, r));
    }
  }
  if (out.empty()) throw ConfigError(fmt::format("no spec rows selected for case {}", c.case_id));
  return out;
}

SamplerSettings study_settings(const RunConfig& c) {
  SamplerSettings s = c.settings;
  s.seed = c.seed;
  s.n_chains = std::max<std::size_t>(s.n_chains, 1);
  s.monitor = Monitor{};
  return s;
}

// ---- journal ------------------------------------------------------------------

const char* kScoreHeader = "case,row,replicate,model,arb,asrb,aad,asd,negative_truths,status";

std::string score_line(const SimSpec& spec, std::size_t rep, const std::string& model, const ReplicateResult& r) {
  const FitScore f = r.score.value_or(FitScore{kNaN, kNaN, kNaN, kNaN});
  return fmt::format("{},{},{},{},{},{},{},{},{},{}", spec.case_id, spec.row, rep + 1, model, num(f.arb),
                     num(f.asrb), num(f.aad), num(f.asd), r.negative_truths,
                     r.score ? std::string("ok") : csv_field("failed: " + r.error));
}

struct JournalEntry {
  int row;
  std::size_t replicate;  // 1-based
  std::string model;
  ReplicateResult result;
};

std::vector<JournalEntry> read_journal(const fs::path& path) {
  std::vector<JournalEntry> out;
  if (!fs::exists(path)) return out;
  const auto table = read_csv(path);
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& f = table.rows[k];
    const auto bad = [&] {
      return FormatError(fmt::format("{}:{}: malformed journal line", path.string(), table.line_numbers[k]));
    };
    if (f.size() != 10) throw bad();
    JournalEntry e;
    std::size_t row = 0;
    if (!parse_size(f[1], row) || !parse_size(f[2], e.replicate)) throw bad();
    e.row = static_cast<int>(row);
    e.model = f[3];
    if (!parse_size(f[8], e.result.negative_truths)) throw bad();
    if (f[9] == "ok") {
      FitScore s;
      if (!parse_double(f[4], s.arb) || !parse_double(f[5], s.asrb) || !parse_double(f[6], s.aad) ||
          !parse_double(f[7], s.asd)) {
        throw bad();
      }
      e.result.score = s;
    } else {
      e.result.error = f[9].rfind("failed: ", 0) == 0 ? f[9].substr(8) : f[9];
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

// ---- models and config ----------------------------------------------------------

SimModel parse_sim_model(const std::string& name) {
  if (name == "mbr") return {name, ModelTag::OneSource, 0};
  if (name == "msa") return {name, ModelTag::OneSource, 1};
  const ModelTag tag = parse_model_tag(name);
  if (tag == ModelTag::OneSource) {
    throw ConfigError("the simulation names one-source fits mbr (source 1) or msa (source 2)");
  }
  return {std::string(to_string(tag)), tag, std::nullopt};
}

RunConfig resolve_config(RunConfig c) {
  // diagnose and evaluate draw nothing random
  const bool random = c.command == "fit" || c.command == "simulate";
  if (random && !c.seed_set) throw ConfigError("a seed is required (--seed)");
  c.settings.seed = c.seed;
  if (c.command == "fit") {
    if (c.panel_path.empty()) throw ConfigError("fit needs --panel");
    if (c.models.empty()) throw ConfigError("fit needs at least one --model");
    std::set<std::string> seen;
    for (auto& m : c.models) {
      m = std::string(to_string(parse_model_tag(m)));
      if (!seen.insert(m).second) throw ConfigError(fmt::format("model {} listed twice", m));
      if (m == "one-source" && c.source.empty()) throw ConfigError("one-source fits need --source");
    }
    if (!(c.level > 0.0 && c.level < 1.0)) throw ConfigError("--level must lie in (0, 1)");
    try {
      c.settings.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  } else if (c.command == "simulate") {
    if (c.case_id < 1 || c.case_id > 6) throw ConfigError("--case must be 1..6");
    const Preset p = preset_for(c.preset);
    if (c.replicates == 0) c.replicates = p.replicates;
    c.settings.n_iter = p.n_iter;
    c.settings.n_burnin = p.n_burnin;
    c.settings.n_chains = 1;
    c.settings.thin = 1;
    if (c.compare.empty()) c.compare = two_source_default(c.case_id) ? "two-source" : "one-vs-two";
    if (c.compare != "two-source" && c.compare != "one-vs-two") {
      throw ConfigError(fmt::format("unknown comparison '{}' (two-source or one-vs-two)", c.compare));
    }
    if (c.models.empty()) {
      c.models = c.compare == "two-source" ? std::vector<std::string>{"m12", "m11a", "m11b", "m1a", "m1b"}
                                           : std::vector<std::string>{"m1a", "m12", "msa", "mbr"};
    }
    std::set<std::string> seen;
    for (auto& m : c.models) {
      m = parse_sim_model(m).name;
      if (!seen.insert(m).second) throw ConfigError(fmt::format("model {} listed twice", m));
    }
    if (!seen.count(base_model(c.compare))) {
      throw ConfigError(fmt::format("the {} comparison needs the base model {}", c.compare, base_model(c.compare)));
    }
    if (c.delta_scope != "unit" && c.delta_scope != "panel") throw ConfigError("--delta-scope must be unit or panel");
    if (c.n_sources < 1) throw ConfigError("--sources must be positive");
    if (c.replicates >= (1u << 20)) throw ConfigError("too many replicates");
  } else if (c.command == "diagnose") {
    if (c.draws_dir.empty()) throw ConfigError("diagnose needs --draws");
  } else if (c.command == "evaluate") {
    if (c.estimates_path.empty() || c.truths_path.empty()) throw ConfigError("evaluate needs --estimates and --truths");
  } else {
    throw ConfigError(fmt::format("unknown command '{}'", c.command));
  }
  return c;
}

// ---- simulation ---------------------------------------------------------------

std::vector<double> fit_posterior_means(const SourcePanel& panel, const SimModel& model,
                                        const SamplerSettings& settings, std::uint32_t case_id, std::uint32_t row,
                                        std::uint32_t replicate) {
  const ModelVariant variant = ModelVariant::from_tag(model.tag);
  StreamBase streams{kDomainSimFit, case_id, row, replicate};
  SourcePanel one;
  const SourcePanel* used = &panel;
  if (model.source) {
    one = select_source(panel, *model.source);
    used = &one;
    streams.salt = static_cast<std::uint32_t>(*model.source) + 1;
  }
  const DrawStore store = run_chains(*used, variant, settings, streams, 1);
  std::vector<double> out(store.n_areas);
  for (std::size_t i = 0; i < store.n_areas; ++i) out[i] = mean(store.pooled_mu(i));
  return out;
}

bool StudyResult::complete(std::size_t s) const {
  for (const auto& rep : cells[s]) {
    for (const auto& r : rep) {
      if (!r.score) return false;
    }
  }
  return true;
}

std::size_t StudyResult::model_index(const std::string& name) const {
  const auto it = std::find(models.begin(), models.end(), name);
  if (it == models.end()) throw ConfigError(fmt::format("model {} is not part of this study", name));
  return static_cast<std::size_t>(it - models.begin());
}

std::vector<double> StudyResult::ratios(const std::string& model, Measure m) const {
  const std::size_t a = model_index(model), b = model_index(base);
  std::vector<double> out;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto& num_m = medians[s][a];
    const auto& den_m = medians[s][b];
    if (!num_m || !den_m || den_m->get(m) == 0.0) {
      out.push_back(kNaN);
    } else {
      out.push_back(num_m->get(m) / den_m->get(m));
    }
  }
  return out;
}

StudyResult run_study(const RunConfig& config, unsigned workers, const std::string& journal) {
  const RunConfig c = resolve_config(config);
  const Matrix pool = load_pool(c);
  StudyResult result;
  result.specs = study_specs(c, pool);
  result.models = c.models;
  result.base = base_model(c.compare);
  result.n_replicates = c.replicates;
  const std::size_t S = result.specs.size(), R = c.replicates, M = c.models.size();
  result.cells.assign(S, std::vector<std::vector<ReplicateResult>>(R, std::vector<ReplicateResult>(M)));

  std::vector<SimModel> models;
  for (const auto& m : c.models) models.push_back(parse_sim_model(m));
  const SamplerSettings settings = study_settings(c);

  // items already in the journal
  std::vector<std::vector<std::uint8_t>> done(S, std::vector<std::uint8_t>(R, 0));
  if (!journal.empty()) {
    std::map<std::pair<int, std::size_t>, std::map<std::string, ReplicateResult>> seen;
    for (auto& e : read_journal(journal)) seen[{e.row, e.replicate}][e.model] = std::move(e.result);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t r = 0; r < R; ++r) {
        const auto it = seen.find({result.specs[s].row, r + 1});
        if (it == seen.end()) continue;
        bool all = true;
        for (std::size_t m = 0; m < M; ++m) all = all && it->second.count(c.models[m]);
        if (!all) continue;
        for (std::size_t m = 0; m < M; ++m) result.cells[s][r][m] = it->second.at(c.models[m]);
        done[s][r] = 1;
      }
    }
  }

  std::ofstream journal_out;
  std::mutex journal_mutex;
  if (!journal.empty()) {
    const bool fresh = !fs::exists(journal);
    journal_out.open(journal, std::ios::app | std::ios::binary);
    if (!journal_out) throw ConfigError(fmt::format("cannot write {}", journal));
    if (fresh) journal_out << manifest_line(manifest_hash(c)) << kScoreHeader << '\n' << std::flush;
  }

  std::vector<std::pair<std::size_t, std::size_t>> items;
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t r = 0; r < R; ++r) {
      if (!done[s][r]) items.emplace_back(s, r);
    }
  }

  parallel_for(items.size(), workers == 0 ? default_workers() : workers, [&](std::size_t k) {
    const auto [s, r] = items[k];
    const SimSpec& spec = result.specs[s];
    const auto rep = static_cast<std::uint32_t>(r + 1);
    auto& row = result.cells[s][r];
    SimPanel sim;
    std::string gen_error;
    try {
      sim = generate(spec, pool, c.seed, rep);
    } catch (const std::exception& e) {
      gen_error = fmt::format("generate: {}", e.what());
    }
    for (std::size_t m = 0; m < M; ++m) {
      if (!gen_error.empty()) {
        row[m].error = gen_error;
        continue;
      }
      row[m].negative_truths = count_negative(sim.truth_mu);
      try {
        const auto est = fit_posterior_means(sim.panel, models[m], settings, static_cast<std::uint32_t>(spec.case_id),
                                             static_cast<std::uint32_t>(spec.row), rep);
        row[m].score = score(est, sim.truth_mu);
      } catch (const std::exception& e) {
        row[m].error = e.what();
      }
    }
    if (journal_out.is_open()) {
      std::string lines;
      for (std::size_t m = 0; m < M; ++m) lines += score_line(spec, r, c.models[m], row[m]) + "\n";
      std::lock_guard lock(journal_mutex);
      journal_out << lines << std::flush;
    }
  });

  result.medians.assign(S, std::vector<std::optional<FitScore>>(M));
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t m = 0; m < M; ++m) {
      std::vector<FitScore> ok;
      for (std::size_t r = 0; r < R; ++r) {
        if (result.cells[s][r][m].score) ok.push_back(*result.cells[s][r][m].score);
      }
      if (!ok.empty()) result.medians[s][m] = aggregate(ok);
    }
  }
  return result;
}

StudyResult run_simulation(const RunConfig& config, unsigned workers) {
  const RunConfig c = resolve_config(config);
  if (c.out_dir.empty()) throw ConfigError("simulate needs --out");
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);
  const std::string hash = manifest_hash(c);
  const fs::path journal = dir / "journal.csv";
  if (c.resume) {
    check_manifest_for_resume(dir, hash);
  } else {
    fs::remove(journal);
  }
  write_manifest(dir, c);
  const StudyResult res = run_study(c, workers, journal.string());
  const std::string head = manifest_line(hash);
  const std::size_t S = res.specs.size(), M = res.models.size();

  {
    // rewritten in canonical order; completion order must not leak into outputs
    auto out = open_out(journal);
    out << head << kScoreHeader << '\n';
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t r = 0; r < res.n_replicates; ++r) {
        for (std::size_t m = 0; m < M; ++m) out << score_line(res.specs[s], r, res.models[m], res.cells[s][r][m]) << '\n';
      }
    }
  }
  fs::copy_file(journal, dir / "scores.csv", fs::copy_options::overwrite_existing);

  {
    auto out = open_out(dir / "medians.csv");
    out << head << "case,row,model,arb,asrb,aad,asd,replicates_ok,failed,complete\n";
    for (std::size_t s = 0; s < S; ++s) {
      const bool complete = res.complete(s);
      for (std::size_t m = 0; m < M; ++m) {
        std::size_t ok = 0;
        for (std::size_t r = 0; r < res.n_replicates; ++r) ok += res.cells[s][r][m].score ? 1 : 0;
        const FitScore f = res.medians[s][m].value_or(FitScore{kNaN, kNaN, kNaN, kNaN});
        out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", res.specs[s].case_id, res.specs[s].row, res.models[m],
                           num(f.arb), num(f.asrb), num(f.aad), num(f.asd), ok, res.n_replicates - ok,
                           complete ? "yes" : "no");
      }
    }
  }

  std::vector<std::string> others;
  for (const auto& m : res.models) {
    if (m != res.base) others.push_back(m);
  }
  const auto columns = spec_column_names(c.case_id);

  auto best = open_out(dir / "best_counts.csv");
  best << head << "measure";
  for (const auto& m : others) best << ',' << m;
  best << ",tied_specs\n";

  for (Measure measure : kAllMeasures) {
    const std::string mname(to_string(measure));
    std::vector<std::vector<double>> ratios;
    for (const auto& m : others) ratios.push_back(res.ratios(m, measure));

    auto table = open_out(dir / fmt::format("ratios_{}.csv", mname));
    table << head << "row";
    for (const auto& col : columns) table << ',' << col;
    for (const auto& m : others) table << ',' << mname << '(' << m << ")/" << mname << '(' << res.base << ')';
    table << '\n';
    for (std::size_t s = 0; s < S; ++s) {
      table << res.specs[s].row;
      for (double v : spec_column_values(res.specs[s])) table << ',' << format_double(v);
      for (const auto& r : ratios) table << ',' << num(r[s]);
      table << '\n';
    }

    // spread over the specs where every ratio is defined
    std::vector<std::size_t> usable;
    for (std::size_t s = 0; s < S; ++s) {
      if (std::all_of(ratios.begin(), ratios.end(), [&](const auto& r) { return std::isfinite(r[s]); })) {
        usable.push_back(s);
      }
    }
    auto summary = open_out(dir / fmt::format("summary_{}.csv", mname));
    summary << head << "ratio,min,q1,median,mean,q3,max,specs\n";
    for (std::size_t k = 0; k < others.size(); ++k) {
      const std::string label = fmt::format("{}({})/{}({})", mname, others[k], mname, res.base);
      if (usable.empty()) {
        summary << label << ",NA,NA,NA,NA,NA,NA,0\n";
        continue;
      }
      std::vector<double> a, b;
      const std::size_t mk = res.model_index(others[k]), mb = res.model_index(res.base);
      for (std::size_t s : usable) {
        a.push_back(res.medians[s][mk]->get(measure));
        b.push_back(res.medians[s][mb]->get(measure));
      }
      const RatioSummary rs = discrepancy_ratio(a, b, others[k], res.base);
      summary << fmt::format("{},{},{},{},{},{},{},{}\n", label, num(rs.min), num(rs.q1), num(rs.median),
                             num(rs.mean), num(rs.q3), num(rs.max), usable.size());
    }

    best << mname;
    if (others.size() >= 2 && !usable.empty()) {
      std::vector<std::vector<double>> kept(others.size());
      for (std::size_t k = 0; k < others.size(); ++k) {
        for (std::size_t s : usable) kept[k].push_back(ratios[k][s]);
      }
      const auto counts = best_model_counts(others, kept);
      for (auto n : counts.counts) best << ',' << n;
      std::string tied;
      for (std::size_t t : counts.tied_specs) tied += (tied.empty() ? "" : " ") + std::to_string(res.specs[usable[t]].row);
      best << ',' << tied << '\n';
    } else {
      for (std::size_t k = 0; k < others.size(); ++k) best << ",NA";
      best << ",\n";
    }
  }
  return res;
}

// ---- fit --------------------------------------------------------------------------

void run_fit(const RunConfig& config, unsigned workers) {
  const RunConfig c = resolve_config(config);
  if (c.out_dir.empty()) throw ConfigError("fit needs --out");
  const SourcePanel panel = load_panel(c.panel_path);
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);
  write_manifest(dir, c);
  const std::string head = manifest_line(manifest_hash(c));

  for (const auto& name : c.models) {
    const ModelTag tag = parse_model_tag(name);
    const ModelVariant variant = ModelVariant::from_tag(tag);
    SourcePanel used = panel;
    StreamBase streams{kDomainFit};
    if (tag == ModelTag::OneSource) {
      const std::size_t j = resolve_source(panel, c.source);
      used = select_source(panel, j);
      streams.salt = static_cast<std::uint32_t>(j) + 1;
    }
    SamplerSettings settings = c.settings;
    settings.monitor.mu = true;
    settings.monitor.phi = true;
    settings.monitor.eta = true;
    settings.monitor.variances = variant.theta_form == ThetaForm::SourceOnly;

    DrawStore store;
    try {
      store = run_chains(used, variant, settings, streams, workers);
    } catch (const SamplerError& e) {
      throw SamplerError(fmt::format("model {}: {}", name, e.what()));
    }

    {
      auto out = open_out(dir / fmt::format("summary_{}.csv", name));
      out << head << "area,mean,sd,lower,upper\n";
      const auto rows = summarize(store, c.level);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out << csv_field(area_name(used, i)) << ',' << format_double(rows[i].mean) << ','
            << format_double(rows[i].sd) << ',' << format_double(rows[i].lower) << ','
            << format_double(rows[i].upper) << '\n';
      }
    }
    {
      auto out = open_out(dir / fmt::format("phi_{}.csv", name));
      out << head << "area,min,q1,median,q3,max\n";
      const auto rows = phi_distribution(store);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out << csv_field(area_name(used, i)) << ',' << format_double(rows[i].min) << ','
            << format_double(rows[i].q1) << ',' << format_double(rows[i].median) << ','
            << format_double(rows[i].q3) << ',' << format_double(rows[i].max) << '\n';
      }
    }
    if (variant.theta_form == ThetaForm::SourceOnly) {
      auto out = open_out(dir / fmt::format("kappa_{}.csv", name));
      const Matrix k = kappa_posterior_mean(store, used);
      out << head << "area";
      for (std::size_t j = 0; j < used.n_sources(); ++j) {
        out << ',' << csv_field("kappa_" + (j < used.sources.size() ? used.sources[j] : std::to_string(j + 1)));
      }
      out << '\n';
      for (std::size_t i = 0; i < k.rows(); ++i) {
        out << csv_field(area_name(used, i));
        for (std::size_t j = 0; j < k.cols(); ++j) out << ',' << format_double(k(i, j));
        out << '\n';
      }
    }
    if (settings.n_chains > 1) {
      const RhatReport report = rhat_report(store);
      auto out = open_out(dir / fmt::format("rhat_{}.csv", name));
      out << head << "parameter,rhat,below_threshold\n";
      for (std::size_t k = 0; k < report.values.size(); ++k) {
        out << report.parameters[k] << ',' << num(report.values[k]) << ','
            << (report.values[k] < report.threshold ? "yes" : "no") << '\n';
      }
    }
    if (c.save_draws) {
      const fs::path ddir = dir / fmt::format("draws_{}", name);
      fs::create_directories(ddir);
      const std::size_t I = store.n_areas;
      for (std::size_t ch = 0; ch < store.chains.size(); ++ch) {
        const ChainDraws& d = store.chains[ch];
        auto out = open_out(ddir / fmt::format("chain_{}.csv", ch + 1));
        out << head;
        for (std::size_t i = 0; i < I; ++i) out << (i ? "," : "") << "mu[" << i + 1 << ']';
        out << ",eta\n";
        for (std::size_t t = 0; t < d.kept; ++t) {
          for (std::size_t i = 0; i < I; ++i) out << (i ? "," : "") << format_double(d.mu[t * I + i]);
          out << ',' << format_double(d.eta[t]) << '\n';
        }
      }
    }
  }
}

// ---- diagnose -------------------------------------------------------------------

RhatReport run_diagnose(const RunConfig& config) {
  const RunConfig c = resolve_config(config);
  const fs::path dir = c.draws_dir;
  if (!fs::is_directory(dir)) throw ConfigError(fmt::format("{} is not a directory", dir.string()));
  std::map<std::size_t, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    std::size_t k = 0;
    if (name.rfind("chain_", 0) == 0 && entry.path().extension() == ".csv" &&
        parse_size(name.substr(6, name.size() - 10), k)) {
      files[k] = entry.path();
    }
  }
  if (files.size() < 2) throw ConfigError(fmt::format("{}: need at least two chain_<k>.csv files", dir.string()));

  std::vector<std::string> header;
  std::vector<std::vector<std::vector<double>>> series;  // [param][chain][draw]
  for (const auto& [k, path] : files) {
    const auto table = read_csv(path);
    if (header.empty()) {
      header = table.header;
      series.assign(header.size(), {});
    } else if (table.header != header) {
      throw FormatError(fmt::format("{}: columns differ from the first chain", path.string()));
    }
    for (auto& p : series) p.emplace_back();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& f = table.rows[r];
      if (f.size() != header.size()) {
        throw FormatError(fmt::format("{}:{}: expected {} fields", path.string(), table.line_numbers[r], header.size()));
      }
      for (std::size_t p = 0; p < f.size(); ++p) {
        double x = 0.0;
        if (!parse_double(f[p], x)) {
          throw FormatError(fmt::format("{}:{}: malformed value '{}'", path.string(), table.line_numbers[r], f[p]));
        }
        series[p].back().push_back(x);
      }
    }
  }
  RhatReport report;
  for (std::size_t p = 0; p < header.size(); ++p) {
    report.parameters.push_back(header[p]);
    try {
      report.values.push_back(split_rhat(series[p]));
    } catch (const ParameterError& e) {
      throw FormatError(fmt::format("{}: {}", header[p], e.what()));
    }
  }
  if (!c.out_dir.empty()) {
    fs::create_directories(c.out_dir);
    write_manifest(c.out_dir, c);
    auto out = open_out(fs::path(c.out_dir) / "rhat.csv");
    out << manifest_line(manifest_hash(c)) << "parameter,rhat,below_threshold\n";
    for (std::size_t k = 0; k < report.values.size(); ++k) {
      out << csv_field(report.parameters[k]) << ',' << num(report.values[k]) << ','
          << (report.values[k] < report.threshold ? "yes" : "no") << '\n';
    }
  }
  return report;
}

// ---- evaluate ---------------------------------------------------------------------

namespace {

// area -> value; takes the column named in `preferred` if present, else the second column
std::map<std::string, double> read_area_values(const fs::path& path, const std::vector<std::string>& preferred) {
  const auto table = read_csv(path);
  if (table.header.size() < 2 || table.header[0] != "area") {
    throw FormatError(fmt::format("{}: expected a header starting with 'area'", path.string()));
  }
  std::size_t col = 1;
  for (const auto& name : preferred) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it != table.header.end()) {
      col = static_cast<std::size_t>(it - table.header.begin());
      break;
    }
  }
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    double x = 0.0;
    if (f.size() != table.header.size() || !parse_double(f[col], x)) {
      throw FormatError(fmt::format("{}:{}: malformed row", path.string(), table.line_numbers[r]));
    }
    if (!out.emplace(f[0], x).second) {
      throw FormatError(fmt::format("{}:{}: duplicate area {}", path.string(), table.line_numbers[r], f[0]));
    }
  }
  return out;
}

}  // namespace

FitScore run_evaluate(const RunConfig& config) {
  const RunConfig c = resolve_config(config);
  const auto est = read_area_values(c.estimates_path, {"estimate", "mean", "value"});
  const auto truth = read_area_values(c.truths_path, {"truth", "value", "mu"});
  if (est.size() != truth.size()) throw FormatError("estimates and truths cover different areas");
  std::vector<double> e, t;
  for (const auto& [area, value] : truth) {
    const auto it = est.find(area);
    if (it == est.end()) throw FormatError(fmt::format("no estimate for area {}", area));
    e.push_back(it->second);
    t.push_back(value);
  }
  const FitScore s = score(e, t);
  if (!c.out_dir.empty()) {
    fs::create_directories(c.out_dir);
    write_manifest(c.out_dir, c);
    auto out = open_out(fs::path(c.out_dir) / "evaluation.csv");
    out << manifest_line(manifest_hash(c)) << "arb,asrb,aad,asd,negative_truths\n"
        << fmt::format("{},{},{},{},{}\n", format_double(s.arb), format_double(s.asrb), format_double(s.aad),
                       format_double(s.asd), count_negative(t));
  }
  return s;
}

}  // namespace glfuse
