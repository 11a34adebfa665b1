#include "cyclofrag/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cyclofrag/errors.hpp"
#include "cyclofrag/parallel.hpp"
#include "cyclofrag/rng.hpp"
#include "cyclofrag/stats.hpp"

namespace cyclofrag::uncertainty {

namespace {

constexpr double kGfMean = 1.58;
constexpr double kGfSd = 0.1;
constexpr double kThird = 1.0 / 3.0;
constexpr double kTwoThirds = 2.0 / 3.0;

}  // namespace

LhsDesign lhs_design(std::size_t n_rows, std::uint64_t seed) {
  if (n_rows < 1) throw std::invalid_argument("lhs_design: n_rows must be at least 1");
  LhsDesign design;
  design.rows.assign(n_rows, {});

  const double inv_n = 1.0 / static_cast<double>(n_rows);
  for (std::size_t col = 0; col < 3; ++col) {
    Rng rng(derive_seed(seed, col));
    std::vector<std::size_t> strata(n_rows);
    std::iota(strata.begin(), strata.end(), 0);
    // Fisher-Yates with our own bounded draws; std::shuffle is not portable.
    for (std::size_t i = n_rows - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_index(i + 1));
      std::swap(strata[i], strata[j]);
    }
    for (std::size_t row = 0; row < n_rows; ++row) {
      const double u = rng.uniform01();  // strictly inside (0,1)
      design.rows[row][col] = (static_cast<double>(strata[row]) + u) * inv_n;
    }
  }
  return design;
}

windfield::WindConfig decode_config(double r1, double r2, double r3) {
  if (!(r1 > 0.0 && r1 < 1.0 && r2 > 0.0 && r2 < 1.0 && r3 > 0.0 && r3 < 1.0))
    throw std::invalid_argument("decode_config: r values must be in (0,1)");

  windfield::WindConfig config;
  // Left-open, right-closed thirds.
  config.model = r1 <= kThird ? windfield::Rwpm::Wse
                              : (r1 <= kTwoThirds ? windfield::Rwpm::Wde : windfield::Rwpm::Hol);
  config.cf = r2 <= kThird ? 0.75 : (r2 <= kTwoThirds ? 0.80 : 0.90);
  const double r3_clamped = std::clamp(r3, 1e-12, 1.0 - 1e-12);
  config.gf = kGfMean + kGfSd * stats::norm_ppf(r3_clamped);
  return config;
}

std::vector<WindEnsemble> build_ensembles(const LhsDesign& design, const ingest::Track& track,
                                          std::span<const ingest::TowerRecord> towers,
                                          const windfield::HollandOptions& options,
                                          unsigned jobs) {
  const std::size_t n_rows = design.rows.size();
  const std::size_t n_towers = towers.size();
  if (n_rows == 0) throw std::invalid_argument("build_ensembles: empty design");

  // Row-major gusts, one gust_field evaluation per design row.
  std::vector<double> by_row(n_rows * n_towers);
  parallel_for(n_rows, jobs, [&](std::size_t row) {
    const auto& r = design.rows[row];
    const auto config = decode_config(r[0], r[1], r[2]);
    const auto gusts = windfield::gust_field(track, config, towers, options, 1);
    std::copy(gusts.begin(), gusts.end(), by_row.begin() + static_cast<std::ptrdiff_t>(row * n_towers));
  });

  std::vector<WindEnsemble> ensembles(n_towers);
  parallel_for(n_towers, jobs, [&](std::size_t t) {
    auto& e = ensembles[t];
    e.tower_id = towers[t].id;
    e.samples_kmh.resize(n_rows);
    for (std::size_t row = 0; row < n_rows; ++row)
      e.samples_kmh[row] = by_row[row * n_towers + t];
    e.ecdf_kmh = e.samples_kmh;
    std::sort(e.ecdf_kmh.begin(), e.ecdf_kmh.end());
  });
  return ensembles;
}

double ecdf_quantile(const WindEnsemble& ensemble, double p) {
  if (ensemble.ecdf_kmh.empty()) throw std::invalid_argument("ecdf_quantile: empty ensemble");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("ecdf_quantile: p must be in (0,1)");
  return stats::quantile_type7(ensemble.ecdf_kmh, p);
}

const char* replicate_mode_name(ReplicateMode mode) {
  switch (mode) {
    case ReplicateMode::Im: return "IM";
    case ReplicateMode::Fs: return "FS";
    case ReplicateMode::Combined: return "Combined";
  }
  return "IM";
}

Replicate im_replicate(std::span<const WindEnsemble> ensembles, double r) {
  Replicate rep;
  rep.mode = ReplicateMode::Im;
  rep.wind_kmh.resize(ensembles.size());
  for (std::size_t i = 0; i < ensembles.size(); ++i)
    rep.wind_kmh[i] = ecdf_quantile(ensembles[i], r);
  rep.tower_indices.resize(ensembles.size());
  std::iota(rep.tower_indices.begin(), rep.tower_indices.end(), 0);
  return rep;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("bootstrap_indices: n must be at least 1");
  Rng rng(seed);
  std::vector<std::size_t> indices(n);
  for (auto& idx : indices) idx = static_cast<std::size_t>(rng.uniform_index(n));
  return indices;
}

Replicate fs_replicate(std::span<const ingest::TowerRecord> towers,
                       const windfield::WindConfig& fixed_config, const ingest::Track& track,
                       std::uint64_t seed, const windfield::HollandOptions& options) {
  const auto wind = windfield::gust_field(track, fixed_config, towers, options, 1);
  return fs_replicate(wind, seed);
}

Replicate fs_replicate(std::span<const double> fixed_wind_kmh, std::uint64_t seed) {
  Replicate rep;
  rep.mode = ReplicateMode::Fs;
  rep.wind_kmh.assign(fixed_wind_kmh.begin(), fixed_wind_kmh.end());
  rep.tower_indices = bootstrap_indices(fixed_wind_kmh.size(), seed);
  return rep;
}

Replicate combined_replicate(std::span<const WindEnsemble> ensembles, double r,
                             std::uint64_t seed) {
  Replicate rep = im_replicate(ensembles, r);
  rep.mode = ReplicateMode::Combined;
  rep.tower_indices = bootstrap_indices(ensembles.size(), seed);
  return rep;
}

}  // namespace cyclofrag::uncertainty
