// Command-line front end for the cyclone fragility pipeline.
//
// Subcommands mirror the library modules: `run` executes the whole
// uncertainty framework from a JSON config; the remaining subcommands expose
// individual stages with the same file formats.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cyclofrag/csv.hpp"
#include "cyclofrag/errors.hpp"
#include "cyclofrag/fragility.hpp"
#include "cyclofrag/ingest.hpp"
#include "cyclofrag/log.hpp"
#include "cyclofrag/pipeline.hpp"
#include "cyclofrag/rng.hpp"
#include "cyclofrag/uncertainty.hpp"
#include "cyclofrag/windfield.hpp"

namespace {

namespace cf = cyclofrag;
using nlohmann::json;

struct GustDataset {
  std::vector<std::string> ids;
  std::vector<double> gusts_kmh;
  std::vector<cf::ingest::Damage> damage;
};

// Per-tower gust/damage file used by fit, converge and selectdist:
// columns id, gust_kmh, damage.
GustDataset read_gusts_csv(const std::string& path) {
  const auto table = cf::csv::read_file(path);
  const auto c_id = table.require_column("id", path);
  const auto c_gust = table.require_column("gust_kmh", path);
  const auto c_damage = table.require_column("damage", path);
  GustDataset data;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string context = path + ": row " + std::to_string(table.line_numbers[i]);
    if (row.size() <= std::max({c_id, c_gust, c_damage}))
      throw cf::IngestError(context + ": too few fields");
    data.ids.push_back(row[c_id]);
    try {
      data.gusts_kmh.push_back(std::stod(row[c_gust]));
    } catch (const std::exception&) {
      throw cf::IngestError(context + " field gust_kmh: not a number: '" + row[c_gust] + "'");
    }
    data.damage.push_back(cf::ingest::parse_damage_label(row[c_damage]));
  }
  if (data.ids.empty()) throw cf::IngestError(path + ": no data rows");
  return data;
}

std::vector<std::uint8_t> flags_for(const GustDataset& data, cf::ingest::DamageState state) {
  std::vector<std::uint8_t> flags(data.damage.size());
  for (std::size_t i = 0; i < data.damage.size(); ++i)
    flags[i] = cf::ingest::in_state(data.damage[i], state) ? 1 : 0;
  return flags;
}

cf::ingest::TowersFormat towers_format_of(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == "geojson" || ext == "json") return cf::ingest::TowersFormat::GeoJson;
  }
  return cf::ingest::TowersFormat::Csv;
}

std::string state_name(cf::ingest::DamageState state) {
  return state == cf::ingest::DamageState::Collapse ? "CO" : "FD";
}

struct FitStageOutputs {
  std::vector<cf::pipeline::FitRow> fits;
  std::vector<std::string> bin_lines;
};

FitStageOutputs fit_dataset(const GustDataset& data, std::size_t n_bins,
                            const std::vector<cf::ingest::DamageState>& states) {
  FitStageOutputs out;
  for (const auto state : states) {
    const auto flags = flags_for(data, state);
    const auto bins = cf::fragility::bin_towers(data.gusts_kmh, flags, n_bins);
    const auto fit = cf::fragility::fit_cdf(bins, cf::fragility::Family::Lognormal);
    cf::pipeline::FitRow row;
    row.damage_state = state_name(state);
    row.uncertainty_mode = "single";
    row.percentile = "NA";
    row.x_m_kmh = fit.p1;
    row.beta = fit.p2;
    row.sse = fit.sse;
    row.converged = fit.converged;
    out.fits.push_back(row);
    for (std::size_t b = 0; b < bins.rows.size(); ++b) {
      const auto& bin = bins.rows[b];
      out.bin_lines.push_back(row.damage_state + ',' + std::to_string(b) + ',' +
                              cf::csv::format_double(bin.mean_gust_kmh) + ',' +
                              std::to_string(bin.n_towers) + ',' + std::to_string(bin.n_failed) +
                              ',' + cf::csv::format_double(bin.failure_ratio));
    }
  }
  return out;
}

std::string fit_row_line(const cf::pipeline::FitRow& row) {
  return row.damage_state + ',' + row.uncertainty_mode + ',' + row.percentile + ',' +
         cf::csv::format_double(row.x_m_kmh) + ',' + cf::csv::format_double(row.beta) + ',' +
         cf::csv::format_double(row.sse) + ',' + (row.converged ? "true" : "false");
}

constexpr const char* kFitsHeader = "damage_state,uncertainty_mode,percentile,xm_kmh,beta,sse,converged";

int dispatch(CLI::App& app, int argc, char** argv);

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cyclone wind-field reconstruction and tower fragility fitting"};
  app.require_subcommand(1);
  try {
    return dispatch(app, argc, argv);
  } catch (const cf::ConfigError& e) {
    cf::log::error(e.what());
    return cf::kExitConfigError;
  } catch (const cf::IngestError& e) {
    cf::log::error(e.what());
    return cf::kExitIngestError;
  } catch (const cf::WindfieldError& e) {
    cf::log::error(e.what());
    return cf::kExitWindfieldError;
  } catch (const cf::FitError& e) {
    cf::log::error(e.what());
    return cf::kExitFitError;
  } catch (const std::exception& e) {
    cf::log::error(e.what());
    return 1;
  }
}

namespace {

int dispatch(CLI::App& app, int argc, char** argv) {
  // run
  auto* run_cmd = app.add_subcommand("run", "Execute the full uncertainty pipeline");
  std::string run_config_path;
  std::optional<std::uint64_t> run_seed;
  std::optional<unsigned> run_jobs;
  std::optional<std::string> run_out;
  run_cmd->add_option("--config", run_config_path, "Pipeline config JSON")->required();
  run_cmd->add_option("--seed", run_seed, "Override the config seed");
  run_cmd->add_option("--jobs", run_jobs, "Worker count (default: all processors)");
  run_cmd->add_option("--out", run_out, "Override the config output directory");

  // windfield
  auto* wind_cmd = app.add_subcommand("windfield", "Per-tower gusts for one configuration");
  std::string wf_towers, wf_track, wf_model = "WDE", wf_out = ".";
  double wf_cf = 0.90, wf_gf = 1.58;
  int wf_step = 15;
  unsigned wf_jobs = 0;
  wind_cmd->add_option("--towers", wf_towers, "Tower CSV/GeoJSON file")->required();
  wind_cmd->add_option("--track", wf_track, "Track CSV file")->required();
  wind_cmd->add_option("--model", wf_model, "RWPM: WSE|WDE|HOL");
  wind_cmd->add_option("--cf", wf_cf, "Conversion factor");
  wind_cmd->add_option("--gf", wf_gf, "Gust factor");
  wind_cmd->add_option("--step-minutes", wf_step, "Track interpolation step");
  wind_cmd->add_option("--jobs", wf_jobs, "Worker count");
  wind_cmd->add_option("--out", wf_out, "Output directory");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "LHS wind ensembles and their summary");
  std::string sm_config;
  std::optional<std::uint64_t> sm_seed;
  std::optional<unsigned> sm_jobs;
  std::optional<std::string> sm_out;
  sample_cmd->add_option("--config", sm_config, "Pipeline config JSON")->required();
  sample_cmd->add_option("--seed", sm_seed, "Override the config seed");
  sample_cmd->add_option("--jobs", sm_jobs, "Worker count");
  sample_cmd->add_option("--out", sm_out, "Override the config output directory");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Bounding-EDP fit of a gust/damage dataset");
  std::string ft_gusts, ft_out = ".";
  std::size_t ft_bins = 30;
  fit_cmd->add_option("--gusts", ft_gusts, "CSV with id,gust_kmh,damage")->required();
  fit_cmd->add_option("--n-bins", ft_bins, "Bin count");
  fit_cmd->add_option("--out", ft_out, "Output directory");

  // curves
  auto* curves_cmd = app.add_subcommand("curves", "Probability curves from fitted parameters");
  std::string cv_fits, cv_out = ".";
  double cv_min = 150.0, cv_max = 450.0, cv_step = 1.0;
  curves_cmd->add_option("--fits", cv_fits, "fits.csv from `fit` or `run`")->required();
  curves_cmd->add_option("--im-min", cv_min, "Grid start, km/h");
  curves_cmd->add_option("--im-max", cv_max, "Grid end, km/h");
  curves_cmd->add_option("--im-step", cv_step, "Grid step, km/h");
  curves_cmd->add_option("--out", cv_out, "Output directory");

  // converge
  auto* conv_cmd = app.add_subcommand("converge", "Fit parameters vs bin count");
  std::string cg_gusts, cg_state = "FD", cg_out = ".";
  std::vector<std::size_t> cg_bins{5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
  conv_cmd->add_option("--gusts", cg_gusts, "CSV with id,gust_kmh,damage")->required();
  conv_cmd->add_option("--n-list", cg_bins, "Bin counts to evaluate");
  conv_cmd->add_option("--state", cg_state, "Damage state: CO|FD");
  conv_cmd->add_option("--out", cg_out, "Output directory");

  // selectdist
  auto* sel_cmd = app.add_subcommand("selectdist", "Five-family SSE comparison for a dataset");
  std::string sd_gusts, sd_state = "FD", sd_out = ".";
  std::size_t sd_bins = 30;
  sel_cmd->add_option("--gusts", sd_gusts, "CSV with id,gust_kmh,damage")->required();
  sel_cmd->add_option("--n-bins", sd_bins, "Bin count");
  sel_cmd->add_option("--state", sd_state, "Damage state: CO|FD");
  sel_cmd->add_option("--out", sd_out, "Output directory");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Reference curves next to fitted 50th percentiles");
  std::string cp_fits, cp_out = ".";
  cmp_cmd->add_option("--fits", cp_fits, "Optional fits.csv with 50th-percentile rows");
  cmp_cmd->add_option("--out", cp_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cf::kExitConfigError;
  }

  if (run_cmd->parsed()) {
    auto config = cf::pipeline::load_config(run_config_path);
    if (run_seed) config.seed = *run_seed;
    if (run_jobs) config.jobs = *run_jobs;
    if (run_out) config.output_dir = *run_out;
    cf::pipeline::run_pipeline(config);
    return cf::kExitOk;
  }

  if (wind_cmd->parsed()) {
    const auto model = cf::windfield::rwpm_from_name(wf_model);
    if (!model) throw cf::ConfigError("windfield: unknown model '" + wf_model + "'");
    const cf::windfield::WindConfig config{*model, wf_cf, wf_gf};
    const auto towers = cf::ingest::parse_towers(wf_towers, towers_format_of(wf_towers));
    const auto track =
        cf::ingest::interpolate_track(cf::ingest::parse_track(wf_track), wf_step);
    const auto gusts = cf::windfield::gust_field(track, config, towers, {}, wf_jobs);

    json params{{"towers", wf_towers}, {"track", wf_track},   {"model", wf_model},
                {"cf", wf_cf},         {"gf", wf_gf},         {"step_minutes", wf_step}};
    const auto hash = cf::pipeline::hash_of_json(params);
    std::vector<std::string> lines;
    lines.reserve(towers.size());
    for (std::size_t i = 0; i < towers.size(); ++i)
      lines.push_back(towers[i].id + ',' + cf::csv::format_double(gusts[i]) + ',' +
                      cf::windfield::rwpm_name(*model) + ',' + cf::csv::format_double(wf_cf) +
                      ',' + cf::csv::format_double(wf_gf));
    std::filesystem::create_directories(wf_out);
    cf::pipeline::write_csv(std::filesystem::path(wf_out) / "gusts.csv", hash,
                            "id,gust_kmh,model,cf,gf", lines);
    return cf::kExitOk;
  }

  if (sample_cmd->parsed()) {
    auto config = cf::pipeline::load_config(sm_config);
    if (sm_seed) config.seed = *sm_seed;
    if (sm_jobs) config.jobs = *sm_jobs;
    if (sm_out) config.output_dir = *sm_out;
    const auto hash = cf::pipeline::config_hash(config);

    const auto towers = cf::ingest::parse_towers(config.towers_path, config.towers_format);
    const auto track = cf::ingest::interpolate_track(cf::ingest::parse_track(config.track_path),
                                                     config.step_minutes);
    const auto design = cf::uncertainty::lhs_design(
        config.n_lhs, cf::derive_seed(config.seed, cf::pipeline::seed_stream::kLhs));
    const auto ensembles =
        cf::uncertainty::build_ensembles(design, track, towers, config.holland, config.jobs);

    std::filesystem::create_directories(config.output_dir);
    std::vector<std::string> sample_lines;
    sample_lines.reserve(ensembles.size() * config.n_lhs);
    for (const auto& e : ensembles)
      for (std::size_t k = 0; k < e.samples_kmh.size(); ++k)
        sample_lines.push_back(e.tower_id + ',' + std::to_string(k) + ',' +
                               cf::csv::format_double(e.samples_kmh[k]));
    cf::pipeline::write_csv(std::filesystem::path(config.output_dir) / "ensembles.csv", hash,
                            "tower_id,sample_index,gust_kmh", sample_lines);

    std::vector<std::string> summary_lines;
    summary_lines.reserve(ensembles.size());
    for (const auto& e : ensembles)
      summary_lines.push_back(e.tower_id + ',' +
                              cf::csv::format_double(cf::uncertainty::ecdf_quantile(e, 0.5)) + ',' +
                              cf::csv::format_double(cf::uncertainty::ecdf_quantile(e, 0.16)) +
                              ',' +
                              cf::csv::format_double(cf::uncertainty::ecdf_quantile(e, 0.84)));
    cf::pipeline::write_csv(std::filesystem::path(config.output_dir) / "ensembles_summary.csv",
                            hash, "tower_id,median_kmh,p16_kmh,p84_kmh", summary_lines);
    return cf::kExitOk;
  }

  if (fit_cmd->parsed()) {
    const auto data = read_gusts_csv(ft_gusts);
    const auto outputs = fit_dataset(
        data, ft_bins,
        {cf::ingest::DamageState::Collapse, cf::ingest::DamageState::FunctionalityDisruption});
    const auto hash =
        cf::pipeline::hash_of_json(json{{"gusts", ft_gusts}, {"n_bins", ft_bins}});
    std::filesystem::create_directories(ft_out);
    std::vector<std::string> fit_lines;
    for (const auto& row : outputs.fits) fit_lines.push_back(fit_row_line(row));
    cf::pipeline::write_csv(std::filesystem::path(ft_out) / "fits.csv", hash, kFitsHeader,
                            fit_lines);
    cf::pipeline::write_csv(std::filesystem::path(ft_out) / "bins.csv", hash,
                            "damage_state,bin_index,mean_gust_kmh,n_towers,n_failed,failure_ratio",
                            outputs.bin_lines);
    return cf::kExitOk;
  }

  if (curves_cmd->parsed()) {
    const auto table = cf::csv::read_file(cv_fits);
    const auto c_state = table.require_column("damage_state", cv_fits);
    const auto c_mode = table.require_column("uncertainty_mode", cv_fits);
    const auto c_pct = table.require_column("percentile", cv_fits);
    const auto c_xm = table.require_column("xm_kmh", cv_fits);
    const auto c_beta = table.require_column("beta", cv_fits);

    // curves.csv has no mode column: keep the highest-priority mode present.
    std::string selected_mode;
    for (const std::string preferred : {"Combined", "IM", "FS"}) {
      for (const auto& row : table.rows)
        if (row[c_mode] == preferred) {
          selected_mode = preferred;
          break;
        }
      if (!selected_mode.empty()) break;
    }
    if (selected_mode.empty() && !table.rows.empty()) selected_mode = table.rows.front()[c_mode];

    const cf::fragility::ImGrid grid{cv_min, cv_max, cv_step};
    const auto ims = grid.values();
    std::vector<std::string> lines;
    for (const auto& row : table.rows) {
      if (row[c_mode] != selected_mode) continue;
      const double xm = std::stod(row[c_xm]);
      const double beta = std::stod(row[c_beta]);
      for (const double im : ims)
        lines.push_back(cf::csv::format_double(im) + ',' + row[c_state] + ',' + row[c_pct] + ',' +
                        cf::csv::format_double(cf::fragility::lognormal_cdf(im, xm, beta)));
    }
    const auto hash = cf::pipeline::hash_of_json(json{{"fits", cv_fits},
                                                      {"im_min", cv_min},
                                                      {"im_max", cv_max},
                                                      {"im_step", cv_step}});
    std::filesystem::create_directories(cv_out);
    cf::pipeline::write_csv(std::filesystem::path(cv_out) / "curves.csv", hash,
                            "im_kmh,damage_state,percentile,probability", lines);
    return cf::kExitOk;
  }

  if (conv_cmd->parsed()) {
    const auto data = read_gusts_csv(cg_gusts);
    const auto state = cg_state == "CO" ? cf::ingest::DamageState::Collapse
                                        : cf::ingest::DamageState::FunctionalityDisruption;
    if (cg_state != "CO" && cg_state != "FD")
      throw cf::ConfigError("converge: --state must be CO or FD");
    const auto flags = flags_for(data, state);
    const auto rows = cf::fragility::bin_convergence(data.gusts_kmh, flags, cg_bins);
    const auto hash = cf::pipeline::hash_of_json(
        json{{"gusts", cg_gusts}, {"state", cg_state}, {"n_list", cg_bins}});
    std::vector<std::string> lines;
    for (const auto& row : rows)
      lines.push_back(std::to_string(row.n_bins) + ',' + cf::csv::format_double(row.x_m_kmh) +
                      ',' + cf::csv::format_double(row.beta));
    std::filesystem::create_directories(cg_out);
    cf::pipeline::write_csv(std::filesystem::path(cg_out) / "convergence.csv", hash,
                            "n_bins,xm_kmh,beta", lines);
    return cf::kExitOk;
  }

  if (sel_cmd->parsed()) {
    const auto data = read_gusts_csv(sd_gusts);
    if (sd_state != "CO" && sd_state != "FD")
      throw cf::ConfigError("selectdist: --state must be CO or FD");
    const auto state = sd_state == "CO" ? cf::ingest::DamageState::Collapse
                                        : cf::ingest::DamageState::FunctionalityDisruption;
    const auto flags = flags_for(data, state);
    const auto bins = cf::fragility::bin_towers(data.gusts_kmh, flags, sd_bins);
    const std::vector<cf::fragility::BinTable> datasets{bins};
    const auto report = cf::fragility::select_distribution(datasets);
    const auto hash = cf::pipeline::hash_of_json(
        json{{"gusts", sd_gusts}, {"state", sd_state}, {"n_bins", sd_bins}});
    std::vector<std::string> lines;
    for (const auto& family : report.families)
      lines.push_back(std::string(cf::fragility::family_name(family.family)) + ',' +
                      std::to_string(family.wins) + ',' + cf::csv::format_double(family.sse_mean) +
                      ',' + cf::csv::format_double(family.sse_p16) + ',' +
                      cf::csv::format_double(family.sse_p84));
    std::filesystem::create_directories(sd_out);
    cf::pipeline::write_csv(std::filesystem::path(sd_out) / "selection.csv", hash,
                            "family,wins,sse_mean,sse_p16,sse_p84", lines);
    return cf::kExitOk;
  }

  if (cmp_cmd->parsed()) {
    std::vector<std::string> lines;
    for (const auto& ref : cf::fragility::reference_curves())
      lines.push_back(ref.source + ',' + cf::csv::format_double(ref.x_m_kmh) + ',' +
                      cf::csv::format_double(ref.beta));
    if (!cp_fits.empty()) {
      const auto table = cf::csv::read_file(cp_fits);
      const auto c_state = table.require_column("damage_state", cp_fits);
      const auto c_pct = table.require_column("percentile", cp_fits);
      const auto c_mode = table.require_column("uncertainty_mode", cp_fits);
      const auto c_xm = table.require_column("xm_kmh", cp_fits);
      const auto c_beta = table.require_column("beta", cp_fits);
      for (const std::string state : {"CO", "FD"}) {
        // Prefer the combined-uncertainty row, as in the published comparison.
        for (const std::string mode : {"Combined", "IM", "FS", "single"}) {
          bool found = false;
          for (const auto& row : table.rows) {
            if (row[c_state] != state || row[c_mode] != mode) continue;
            if (row[c_pct] != "50" && row[c_pct] != "NA") continue;
            lines.push_back("50th percentile - " + state + ',' + row[c_xm] + ',' + row[c_beta]);
            found = true;
            break;
          }
          if (found) break;
        }
      }
    }
    const auto hash = cf::pipeline::hash_of_json(json{{"fits", cp_fits}});
    std::filesystem::create_directories(cp_out);
    cf::pipeline::write_csv(std::filesystem::path(cp_out) / "compare.csv", hash,
                            "source,xm_kmh,beta", lines);
    return cf::kExitOk;
  }

  return cf::kExitConfigError;
}

}  // namespace
