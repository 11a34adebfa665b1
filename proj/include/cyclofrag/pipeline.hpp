#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclofrag/fragility.hpp"
#include "cyclofrag/ingest.hpp"
#include "cyclofrag/uncertainty.hpp"
#include "cyclofrag/windfield.hpp"

namespace cyclofrag::pipeline {

inline constexpr const char* kVersion = "0.1.0";

// Named seed streams: every random draw in the pipeline comes from
// derive_seed(master, stream, index), so any stage can be reproduced in
// isolation and results do not depend on worker count.
namespace seed_stream {
inline constexpr std::uint64_t kLhs = 1;
inline constexpr std::uint64_t kImPercentile = 2;
inline constexpr std::uint64_t kFsBootstrap = 3;
inline constexpr std::uint64_t kCombinedPercentile = 4;
inline constexpr std::uint64_t kCombinedBootstrap = 5;
}  // namespace seed_stream

struct RunConfig {
  std::string towers_path;
  std::string track_path;
  ingest::TowersFormat towers_format{ingest::TowersFormat::Csv};
  std::uint64_t seed{0};
  std::size_t n_lhs{1000};
  std::size_t n_replicates{1000};
  std::size_t n_bins{30};
  int step_minutes{15};
  std::vector<double> percentiles{2.5, 16.0, 50.0, 84.0, 97.5};
  std::vector<uncertainty::ReplicateMode> modes{uncertainty::ReplicateMode::Im,
                                                uncertainty::ReplicateMode::Fs,
                                                uncertainty::ReplicateMode::Combined};
  windfield::WindConfig fs_config{windfield::Rwpm::Wde, 0.90, 1.58};
  windfield::HollandOptions holland{};
  fragility::ImGrid im_grid{};
  std::vector<std::size_t> convergence_bins{5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
  std::size_t selection_datasets{100};
  std::string output_dir{"."};
  unsigned jobs{0};  // 0 = all processors; not part of the config hash
};

// Parses and validates a JSON config file; reports problems as ConfigError.
// Input file existence is an ingest concern and is not checked here.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& doc);

// Canonical JSON of the semantic configuration (excludes output_dir and
// jobs), and its FNV-1a hash carried in every output file.
nlohmann::json canonical_config_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);
std::string hash_of_json(const nlohmann::json& doc);

// One fits.csv row.
struct FitRow {
  std::string damage_state;      // CO | FD
  std::string uncertainty_mode;  // IM | FS | Combined (or "single")
  std::string percentile;        // number, or "NA" for single-dataset fits
  double x_m_kmh{};
  double beta{};
  double sse{};
  bool converged{};
};

struct RunResult {
  std::vector<FitRow> fits;
  std::vector<std::filesystem::path> outputs;
  std::string config_hash;
};

// Full framework run: ingest -> interpolate -> LHS ensembles -> per-mode
// replicates -> per-replicate Bounding-EDP fits (both damage states) ->
// percentile extraction -> artifact files (fits.csv, curves.csv,
// ensembles_summary.csv, convergence.csv, selection.csv, run_meta.json).
// Any stage failure removes files written so far and rethrows.
RunResult run_pipeline(const RunConfig& config);

// Gathers a replicate's (wind, failure) pairs through its index multiset,
// bins them, and fits the requested family.
fragility::FragilityFit fit_replicate(const uncertainty::Replicate& replicate,
                                      std::span<const std::uint8_t> failed, std::size_t n_bins,
                                      fragility::Family family = fragility::Family::Lognormal);
fragility::BinTable bin_replicate(const uncertainty::Replicate& replicate,
                                  std::span<const std::uint8_t> failed, std::size_t n_bins);

// Writes a CSV with the standard "# config_hash=..." comment line followed
// by the header row and preformatted data lines.
void write_csv(const std::filesystem::path& path, const std::string& config_hash,
               const std::string& header, const std::vector<std::string>& lines);

}  // namespace cyclofrag::pipeline
