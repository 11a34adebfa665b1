#include "cyclofrag/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

#include "cyclofrag/csv.hpp"
#include "cyclofrag/errors.hpp"
#include "cyclofrag/log.hpp"
#include "cyclofrag/parallel.hpp"
#include "cyclofrag/rng.hpp"
#include "cyclofrag/stats.hpp"

namespace cyclofrag::pipeline {

namespace {

using nlohmann::json;

std::string format_percentile(double p) { return csv::format_double(p); }

ingest::TowersFormat format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == "geojson" || ext == "json") return ingest::TowersFormat::GeoJson;
  }
  return ingest::TowersFormat::Csv;
}

uncertainty::ReplicateMode mode_from_name(const std::string& name) {
  if (name == "IM") return uncertainty::ReplicateMode::Im;
  if (name == "FS") return uncertainty::ReplicateMode::Fs;
  if (name == "Combined") return uncertainty::ReplicateMode::Combined;
  throw ConfigError("unknown uncertainty mode '" + name + "' (expected IM|FS|Combined)");
}

// Removes everything the aborted run managed to write.
struct OutputJanitor {
  std::vector<std::filesystem::path> written;
  bool keep{false};

  ~OutputJanitor() {
    if (keep) return;
    for (const auto& path : written) {
      std::error_code ec;
      std::filesystem::remove(path, ec);
    }
  }
};

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return config_from_json(doc);
}

RunConfig config_from_json(const json& doc) {
  RunConfig config;
  try {
    if (!doc.contains("towers_path") || !doc.contains("track_path"))
      throw ConfigError("config: towers_path and track_path are required");
    config.towers_path = doc["towers_path"].get<std::string>();
    config.track_path = doc["track_path"].get<std::string>();
    config.towers_format = format_from_path(config.towers_path);
    if (doc.contains("towers_format")) {
      const auto name = doc["towers_format"].get<std::string>();
      if (name == "csv")
        config.towers_format = ingest::TowersFormat::Csv;
      else if (name == "geojson")
        config.towers_format = ingest::TowersFormat::GeoJson;
      else
        throw ConfigError("config: towers_format must be csv or geojson");
    }
    config.seed = doc.value("seed", config.seed);
    config.n_lhs = doc.value("n_lhs", config.n_lhs);
    config.n_replicates = doc.value("n_replicates", config.n_replicates);
    config.n_bins = doc.value("n_bins", config.n_bins);
    config.step_minutes = doc.value("step_minutes", config.step_minutes);
    if (doc.contains("percentiles"))
      config.percentiles = doc["percentiles"].get<std::vector<double>>();
    if (doc.contains("modes")) {
      config.modes.clear();
      for (const auto& m : doc["modes"]) config.modes.push_back(mode_from_name(m.get<std::string>()));
    }
    if (doc.contains("fs_config")) {
      const auto& fs = doc["fs_config"];
      if (fs.contains("model")) {
        const auto model = windfield::rwpm_from_name(fs["model"].get<std::string>());
        if (!model) throw ConfigError("config: fs_config.model must be WSE|WDE|HOL");
        config.fs_config.model = *model;
      }
      config.fs_config.cf = fs.value("cf", config.fs_config.cf);
      config.fs_config.gf = fs.value("gf", config.fs_config.gf);
    }
    if (doc.contains("holland")) {
      const auto& h = doc["holland"];
      config.holland.default_b = h.value("default_b", config.holland.default_b);
      config.holland.rho_kg_m3 = h.value("rho_kg_m3", config.holland.rho_kg_m3);
      config.holland.ambient_pressure_hpa =
          h.value("ambient_pressure_hpa", config.holland.ambient_pressure_hpa);
    }
    if (doc.contains("im_grid")) {
      const auto& g = doc["im_grid"];
      config.im_grid.min_kmh = g.value("min_kmh", config.im_grid.min_kmh);
      config.im_grid.max_kmh = g.value("max_kmh", config.im_grid.max_kmh);
      config.im_grid.step_kmh = g.value("step_kmh", config.im_grid.step_kmh);
    }
    if (doc.contains("convergence_bins"))
      config.convergence_bins = doc["convergence_bins"].get<std::vector<std::size_t>>();
    config.selection_datasets = doc.value("selection_datasets", config.selection_datasets);
    config.output_dir = doc.value("output_dir", config.output_dir);
    config.jobs = doc.value("jobs", config.jobs);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (config.n_lhs < 1) throw ConfigError("config: n_lhs must be positive");
  if (config.n_replicates < 1) throw ConfigError("config: n_replicates must be positive");
  if (config.n_bins < 2) throw ConfigError("config: n_bins must be at least 2");
  if (config.step_minutes < 1) throw ConfigError("config: step_minutes must be positive");
  if (config.modes.empty()) throw ConfigError("config: at least one uncertainty mode required");
  if (config.percentiles.empty()) throw ConfigError("config: percentiles must not be empty");
  for (std::size_t i = 0; i < config.percentiles.size(); ++i) {
    const double p = config.percentiles[i];
    if (!(p > 0.0 && p < 100.0))
      throw ConfigError("config: percentiles must lie strictly inside (0,100)");
    if (i > 0 && !(p > config.percentiles[i - 1]))
      throw ConfigError("config: percentiles must be strictly increasing");
  }
  if (!(config.fs_config.cf > 0.0 && config.fs_config.cf <= 1.0))
    throw ConfigError("config: fs_config.cf must be in (0,1]");
  if (!(config.fs_config.gf > 0.0)) throw ConfigError("config: fs_config.gf must be positive");
  if (!(config.im_grid.step_kmh > 0.0) || !(config.im_grid.max_kmh > config.im_grid.min_kmh))
    throw ConfigError("config: im_grid needs max > min and positive step");
  for (const std::size_t n : config.convergence_bins)
    if (n < 2) throw ConfigError("config: convergence_bins entries must be at least 2");
  return config;
}

json canonical_config_json(const RunConfig& config) {
  json doc;
  doc["towers_path"] = config.towers_path;
  doc["track_path"] = config.track_path;
  doc["towers_format"] =
      config.towers_format == ingest::TowersFormat::Csv ? "csv" : "geojson";
  doc["seed"] = config.seed;
  doc["n_lhs"] = config.n_lhs;
  doc["n_replicates"] = config.n_replicates;
  doc["n_bins"] = config.n_bins;
  doc["step_minutes"] = config.step_minutes;
  doc["percentiles"] = config.percentiles;
  json modes = json::array();
  for (const auto mode : config.modes) modes.push_back(uncertainty::replicate_mode_name(mode));
  doc["modes"] = modes;
  doc["fs_config"] = {{"model", windfield::rwpm_name(config.fs_config.model)},
                      {"cf", config.fs_config.cf},
                      {"gf", config.fs_config.gf}};
  doc["holland"] = {{"default_b", config.holland.default_b},
                    {"rho_kg_m3", config.holland.rho_kg_m3},
                    {"ambient_pressure_hpa", config.holland.ambient_pressure_hpa}};
  doc["im_grid"] = {{"min_kmh", config.im_grid.min_kmh},
                    {"max_kmh", config.im_grid.max_kmh},
                    {"step_kmh", config.im_grid.step_kmh}};
  doc["convergence_bins"] = config.convergence_bins;
  doc["selection_datasets"] = config.selection_datasets;
  return doc;
}

std::string hash_of_json(const json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& config) {
  return hash_of_json(canonical_config_json(config));
}

void write_csv(const std::filesystem::path& path, const std::string& config_hash,
               const std::string& header, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file: " + path.string());
  out << "# config_hash=" << config_hash << '\n' << header << '\n';
  for (const auto& line : lines) out << line << '\n';
}

fragility::BinTable bin_replicate(const uncertainty::Replicate& replicate,
                                  std::span<const std::uint8_t> failed, std::size_t n_bins) {
  const std::size_t n = replicate.tower_indices.size();
  std::vector<double> gusts(n);
  std::vector<std::uint8_t> flags(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = replicate.tower_indices[i];
    gusts[i] = replicate.wind_kmh[idx];
    flags[i] = failed[idx];
  }
  return fragility::bin_towers(gusts, flags, n_bins);
}

fragility::FragilityFit fit_replicate(const uncertainty::Replicate& replicate,
                                      std::span<const std::uint8_t> failed, std::size_t n_bins,
                                      fragility::Family family) {
  return fragility::fit_cdf(bin_replicate(replicate, failed, n_bins), family);
}

namespace {

struct ModeFits {
  uncertainty::ReplicateMode mode{};
  std::vector<fragility::FragilityFit> collapse;
  std::vector<fragility::FragilityFit> disruption;
};

std::string fit_row_line(const FitRow& row) {
  return row.damage_state + ',' + row.uncertainty_mode + ',' + row.percentile + ',' +
         csv::format_double(row.x_m_kmh) + ',' + csv::format_double(row.beta) + ',' +
         csv::format_double(row.sse) + ',' + (row.converged ? "true" : "false");
}

}  // namespace

RunResult run_pipeline(const RunConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  const std::string hash = config_hash(config);
  const unsigned jobs = config.jobs == 0 ? default_jobs() : config.jobs;
  const std::filesystem::path out_dir(config.output_dir);

  log::info("run " + hash + ": seed " + std::to_string(config.seed) + ", " +
            std::to_string(jobs) + " worker(s)");

  // --- ingest ---
  const auto towers = ingest::parse_towers(config.towers_path, config.towers_format);
  if (towers.empty()) throw IngestError(config.towers_path + ": no towers");
  const auto raw_track = ingest::parse_track(config.track_path);
  const auto track = ingest::interpolate_track(raw_track, config.step_minutes);
  log::info("track: " + std::to_string(raw_track.points.size()) + " advisories -> " +
            std::to_string(track.points.size()) + " steps of " +
            std::to_string(config.step_minutes) + " min");

  const auto co_flags = ingest::state_flags(towers, ingest::DamageState::Collapse);
  const auto fd_flags = ingest::state_flags(towers, ingest::DamageState::FunctionalityDisruption);

  // --- wind ensembles ---
  const auto design = uncertainty::lhs_design(config.n_lhs, derive_seed(config.seed, seed_stream::kLhs));
  log::info("building " + std::to_string(config.n_lhs) + "-sample ensembles at " +
            std::to_string(towers.size()) + " towers");
  const auto ensembles = uncertainty::build_ensembles(design, track, towers, config.holland, jobs);

  // Deterministic field for the finite-sample mode and the bin-convergence table.
  const auto fs_wind = windfield::gust_field(track, config.fs_config, towers, config.holland, jobs);

  // --- replicates and fits ---
  const std::size_t n_rep = config.n_replicates;
  std::vector<ModeFits> mode_fits;
  std::vector<fragility::BinTable> selection_bins;

  for (const auto mode : config.modes) {
    ModeFits fits;
    fits.mode = mode;
    fits.collapse.resize(n_rep);
    fits.disruption.resize(n_rep);
    const bool want_selection = mode == uncertainty::ReplicateMode::Combined;
    const std::size_t n_selection = want_selection ? std::min(config.selection_datasets, n_rep) : 0;
    if (want_selection) selection_bins.resize(n_selection);

    log::info(std::string("mode ") + uncertainty::replicate_mode_name(mode) + ": " +
              std::to_string(n_rep) + " replicates");
    parallel_for(n_rep, jobs, [&](std::size_t i) {
      uncertainty::Replicate rep;
      switch (mode) {
        case uncertainty::ReplicateMode::Im: {
          Rng rng(derive_seed(config.seed, seed_stream::kImPercentile, i));
          rep = uncertainty::im_replicate(ensembles, rng.uniform01());
          break;
        }
        case uncertainty::ReplicateMode::Fs:
          rep = uncertainty::fs_replicate(fs_wind,
                                          derive_seed(config.seed, seed_stream::kFsBootstrap, i));
          break;
        case uncertainty::ReplicateMode::Combined: {
          Rng rng(derive_seed(config.seed, seed_stream::kCombinedPercentile, i));
          rep = uncertainty::combined_replicate(
              ensembles, rng.uniform01(),
              derive_seed(config.seed, seed_stream::kCombinedBootstrap, i));
          break;
        }
      }
      const auto bins_fd = bin_replicate(rep, fd_flags, config.n_bins);
      const auto bins_co = bin_replicate(rep, co_flags, config.n_bins);
      fits.disruption[i] = fragility::fit_cdf(bins_fd, fragility::Family::Lognormal);
      fits.collapse[i] = fragility::fit_cdf(bins_co, fragility::Family::Lognormal);
      if (want_selection && i < n_selection) selection_bins[i] = bins_fd;
    });
    mode_fits.push_back(std::move(fits));
  }

  // --- percentile extraction ---
  RunResult result;
  result.config_hash = hash;
  struct CurveRow {
    std::string state;
    double percentile;
    double x_m;
    double beta;
  };
  std::vector<CurveRow> curve_rows;
  // curves.csv has no mode column; emit the highest-priority mode present.
  uncertainty::ReplicateMode curve_mode = config.modes.front();
  for (const auto preferred :
       {uncertainty::ReplicateMode::Combined, uncertainty::ReplicateMode::Im}) {
    if (std::find(config.modes.begin(), config.modes.end(), preferred) != config.modes.end()) {
      curve_mode = preferred;
      break;
    }
  }

  for (const auto& fits : mode_fits) {
    for (const bool collapse_state : {true, false}) {
      const auto& members = collapse_state ? fits.collapse : fits.disruption;
      const auto curves =
          fragility::percentile_curves(members, config.percentiles, config.im_grid);
      for (const auto& curve : curves) {
        FitRow row;
        row.damage_state = collapse_state ? "CO" : "FD";
        row.uncertainty_mode = uncertainty::replicate_mode_name(fits.mode);
        row.percentile = format_percentile(curve.percentile);
        row.x_m_kmh = curve.x_m_kmh;
        row.beta = curve.beta;
        row.sse = curve.sse;
        row.converged = curve.converged;
        result.fits.push_back(row);
        if (fits.mode == curve_mode)
          curve_rows.push_back({row.damage_state, curve.percentile, curve.x_m_kmh, curve.beta});
      }
    }
  }

  // --- convergence table (deterministic field, disruption state) ---
  const auto convergence =
      fragility::bin_convergence(fs_wind, fd_flags, config.convergence_bins);

  // --- distribution selection (Appendix-B style report) ---
  std::optional<fragility::SelectionReport> selection;
  if (!selection_bins.empty()) {
    selection = fragility::select_distribution(selection_bins);
  } else {
    log::info("selection report skipped: Combined mode not requested");
  }

  // --- outputs ---
  std::filesystem::create_directories(out_dir);
  OutputJanitor janitor;
  auto target = [&](const char* name) {
    const auto path = out_dir / name;
    janitor.written.push_back(path);
    return path;
  };

  {
    std::vector<std::string> lines;
    lines.reserve(result.fits.size());
    for (const auto& row : result.fits) lines.push_back(fit_row_line(row));
    write_csv(target("fits.csv"), hash, "damage_state,uncertainty_mode,percentile,xm_kmh,beta,sse,converged",
              lines);
  }
  {
    const auto ims = config.im_grid.values();
    std::vector<std::string> lines;
    lines.reserve(curve_rows.size() * ims.size());
    for (const auto& row : curve_rows) {
      for (const double im : ims) {
        lines.push_back(csv::format_double(im) + ',' + row.state + ',' +
                        format_percentile(row.percentile) + ',' +
                        csv::format_double(fragility::lognormal_cdf(im, row.x_m, row.beta)));
      }
    }
    write_csv(target("curves.csv"), hash, "im_kmh,damage_state,percentile,probability", lines);
  }
  {
    std::vector<std::string> lines;
    lines.reserve(ensembles.size());
    for (const auto& e : ensembles) {
      lines.push_back(e.tower_id + ',' +
                      csv::format_double(stats::quantile_type7(e.ecdf_kmh, 0.5)) + ',' +
                      csv::format_double(stats::quantile_type7(e.ecdf_kmh, 0.16)) + ',' +
                      csv::format_double(stats::quantile_type7(e.ecdf_kmh, 0.84)));
    }
    write_csv(target("ensembles_summary.csv"), hash, "tower_id,median_kmh,p16_kmh,p84_kmh", lines);
  }
  {
    std::vector<std::string> lines;
    for (const auto& row : convergence)
      lines.push_back(std::to_string(row.n_bins) + ',' + csv::format_double(row.x_m_kmh) + ',' +
                      csv::format_double(row.beta));
    write_csv(target("convergence.csv"), hash, "n_bins,xm_kmh,beta", lines);
  }
  if (selection) {
    std::vector<std::string> lines;
    for (const auto& family : selection->families) {
      lines.push_back(std::string(fragility::family_name(family.family)) + ',' +
                      std::to_string(family.wins) + ',' + csv::format_double(family.sse_mean) +
                      ',' + csv::format_double(family.sse_p16) + ',' +
                      csv::format_double(family.sse_p84));
    }
    write_csv(target("selection.csv"), hash, "family,wins,sse_mean,sse_p16,sse_p84", lines);
  }
  {
    const auto t_end = std::chrono::steady_clock::now();
    json meta;
    meta["tool"] = "cyclofrag";
    meta["version"] = kVersion;
    meta["seed"] = config.seed;
    meta["config_hash"] = hash;
    meta["config"] = canonical_config_json(config);
    meta["wall_time_s"] = std::chrono::duration<double>(t_end - t_start).count();
    meta["inputs"] = {{"towers", config.towers_path},
                      {"track", config.track_path},
                      {"n_towers", towers.size()},
                      {"n_track_advisories", raw_track.points.size()},
                      {"n_track_steps", track.points.size()}};
    const auto path = target("run_meta.json");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write output file: " + path.string());
    out << meta.dump(2) << '\n';
  }

  janitor.keep = true;
  result.outputs = janitor.written;
  log::info("wrote " + std::to_string(result.outputs.size()) + " artifact files to " +
            out_dir.string());
  return result;
}

}  // namespace cyclofrag::pipeline
