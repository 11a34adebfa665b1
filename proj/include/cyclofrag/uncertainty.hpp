#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cyclofrag/ingest.hpp"
#include "cyclofrag/windfield.hpp"

namespace cyclofrag::uncertainty {

// Latin Hypercube design over three unit-interval columns:
// (model selector, conversion-factor selector, gust-factor quantile).
struct LhsDesign {
  std::vector<std::array<double, 3>> rows;
};

// Per column, exactly one sample falls in each stratum [k/n, (k+1)/n).
LhsDesign lhs_design(std::size_t n_rows, std::uint64_t seed);

// Maps a unit-interval triple to a wind configuration: model and conversion
// factor by thirds (left-open, right-closed), gust factor by the inverse
// normal CDF with mean 1.58 and sd 0.1.
windfield::WindConfig decode_config(double r1, double r2, double r3);

// 3-sec gust samples at one tower, one per design row, plus the sorted copy
// that serves as the empirical CDF.
struct WindEnsemble {
  std::string tower_id;
  std::vector<double> samples_kmh;
  std::vector<double> ecdf_kmh;
};

// Evaluates the gust field for every design row and transposes into
// per-tower ensembles. Parallelises over design rows.
std::vector<WindEnsemble> build_ensembles(const LhsDesign& design, const ingest::Track& track,
                                          std::span<const ingest::TowerRecord> towers,
                                          const windfield::HollandOptions& options = {},
                                          unsigned jobs = 1);

// Linear-interpolation quantile of the ensemble ECDF, p in (0,1).
double ecdf_quantile(const WindEnsemble& ensemble, double p);

enum class ReplicateMode { Im, Fs, Combined };

const char* replicate_mode_name(ReplicateMode mode);

// Wind vector plus tower index multiset feeding one Bounding-EDP fit.
struct Replicate {
  std::vector<double> wind_kmh;         // aligned with the original tower order
  std::vector<std::size_t> tower_indices;  // multiset into the tower list
  ReplicateMode mode{ReplicateMode::Im};
};

// One shared percentile applied to every tower's ECDF (winds fully
// correlated across towers); the index multiset is the identity.
Replicate im_replicate(std::span<const WindEnsemble> ensembles, double r);

// n uniform draws with replacement from {0..n-1}.
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed);

// Deterministic gust field under the fixed configuration, towers resampled
// with replacement. The overload taking a precomputed wind vector lets
// callers evaluate the field once for all replicates.
Replicate fs_replicate(std::span<const ingest::TowerRecord> towers,
                       const windfield::WindConfig& fixed_config, const ingest::Track& track,
                       std::uint64_t seed, const windfield::HollandOptions& options = {});
Replicate fs_replicate(std::span<const double> fixed_wind_kmh, std::uint64_t seed);

// im_replicate winds plus a bootstrap of the tower indices.
Replicate combined_replicate(std::span<const WindEnsemble> ensembles, double r,
                             std::uint64_t seed);

}  // namespace cyclofrag::uncertainty
