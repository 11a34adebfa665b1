#include "cyclofrag/fragility.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "cyclofrag/errors.hpp"
#include "cyclofrag/neldermead.hpp"
#include "cyclofrag/stats.hpp"

namespace cyclofrag::fragility {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSseTie = 1e-15;

// Tie-break preference for min-SSE selection.
constexpr std::array<Family, 5> kPreferenceOrder = {Family::Lognormal, Family::Normal,
                                                    Family::Gamma, Family::Weibull,
                                                    Family::Cauchy};

double sse_of(std::span<const FitPoint> points, Family family, double p1, double p2) {
  double total = 0.0;
  for (const auto& pt : points) {
    const double d = pt.prob - family_cdf(family, pt.im_kmh, p1, p2);
    total += d * d;
  }
  return total;
}

// Start parameters from a location guess and a relative spread.
std::array<double, 2> initial_params(Family family, double location, double spread) {
  switch (family) {
    case Family::Lognormal: return {location, spread};
    case Family::Normal: return {location, spread * location};
    case Family::Cauchy: return {location, spread * location};
    case Family::Gamma: {
      const double shape = 1.0 / (spread * spread);
      return {shape, location / shape};
    }
    case Family::Weibull: return {1.0 / spread, location};
  }
  return {location, spread};
}

std::vector<FitPoint> to_points(const BinTable& bins) {
  std::vector<FitPoint> points;
  points.reserve(bins.rows.size());
  for (const auto& row : bins.rows) points.push_back({row.mean_gust_kmh, row.failure_ratio});
  return points;
}

}  // namespace

const char* family_name(Family family) {
  switch (family) {
    case Family::Lognormal: return "LO";
    case Family::Normal: return "NO";
    case Family::Cauchy: return "CA";
    case Family::Gamma: return "GA";
    case Family::Weibull: return "WE";
  }
  return "LO";
}

double family_cdf(Family family, double x, double p1, double p2) {
  switch (family) {
    case Family::Lognormal:
      return lognormal_cdf(x, p1, p2);
    case Family::Normal:
      return stats::norm_cdf((x - p1) / p2);
    case Family::Cauchy:
      return 0.5 + std::atan((x - p1) / p2) / kPi;
    case Family::Gamma:
      if (x <= 0.0) return 0.0;
      return stats::lower_gamma_regularized(p1, x / p2);
    case Family::Weibull:
      if (x <= 0.0) return 0.0;
      return 1.0 - std::exp(-std::pow(x / p2, p1));
  }
  return 0.0;
}

double lognormal_cdf(double im_kmh, double x_m_kmh, double beta) {
  if (!(x_m_kmh > 0.0)) throw FitError("lognormal_cdf: median must be positive");
  if (!(beta > 0.0)) throw FitError("lognormal_cdf: beta must be positive");
  if (im_kmh <= 0.0) return 0.0;
  return stats::norm_cdf(std::log(im_kmh / x_m_kmh) / beta);
}

BinTable bin_towers(std::span<const double> gusts_kmh, std::span<const std::uint8_t> failed,
                    std::size_t n_bins) {
  const std::size_t n = gusts_kmh.size();
  if (failed.size() != n) throw FitError("bin_towers: gusts and failure flags differ in length");
  if (n_bins < 2) throw FitError("bin_towers: need at least 2 bins");
  if (n_bins > n) throw FitError("bin_towers: more bins than towers");

  // Sort by gust; equal gusts keep their original order.
  std::vector<std::pair<double, std::uint32_t>> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = {gusts_kmh[i], static_cast<std::uint32_t>(i)};
  std::sort(order.begin(), order.end());

  const std::size_t base = n / n_bins;
  const std::size_t larger = n % n_bins;

  BinTable table;
  table.rows.reserve(n_bins);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const std::size_t size = base + (b < larger ? 1 : 0);
    BinRow row;
    row.n_towers = size;
    double sum = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      sum += order[pos + k].first;
      row.n_failed += failed[order[pos + k].second] ? 1 : 0;
    }
    row.mean_gust_kmh = sum / static_cast<double>(size);
    row.failure_ratio = static_cast<double>(row.n_failed) / static_cast<double>(size);
    table.rows.push_back(row);
    pos += size;
  }
  return table;
}

FragilityFit fit_cdf(std::span<const FitPoint> points, Family family) {
  if (points.size() < 3) throw FitError("fit_cdf: need at least 3 points");

  double location = points.back().im_kmh;
  bool any_failure = false;
  for (const auto& pt : points) {
    if (pt.prob > 0.0) any_failure = true;
    if (pt.prob >= 0.5) {
      location = pt.im_kmh;
      break;
    }
  }
  if (!(location > 0.0)) location = 1.0;

  if (!any_failure) {
    // No failures anywhere: the data carry no information about the curve.
    const auto start = initial_params(family, location, 0.1);
    FragilityFit fit{family, start[0], start[1], 0.0, false};
    fit.sse = sse_of(points, family, fit.p1, fit.p2);
    return fit;
  }

  FragilityFit best{};
  bool have_best = false;
  for (const double spread : {0.1, 0.5}) {
    const auto start = initial_params(family, location, spread);
    const std::array<double, 2> log_start = {std::log(start[0]), std::log(start[1])};
    auto objective = [&](std::span<const double> lp) {
      return sse_of(points, family, std::exp(lp[0]), std::exp(lp[1]));
    };
    const auto result = minimize_simplex(objective, log_start, 0.05, 1e-10, 10000);
    FragilityFit fit{family, std::exp(result.x[0]), std::exp(result.x[1]), result.fmin,
                     result.converged};
    if (!have_best || fit.sse < best.sse) {
      best = fit;
      have_best = true;
    }
  }
  return best;
}

FragilityFit fit_cdf(const BinTable& bins, Family family) {
  const auto points = to_points(bins);
  return fit_cdf(points, family);
}

double sse(std::span<const FitPoint> points, const FragilityFit& fit) {
  return sse_of(points, fit.family, fit.p1, fit.p2);
}

double sse(const BinTable& bins, const FragilityFit& fit) {
  const auto points = to_points(bins);
  return sse_of(points, fit.family, fit.p1, fit.p2);
}

SelectionReport select_distribution(std::span<const BinTable> datasets) {
  if (datasets.empty()) throw FitError("select_distribution: need at least one dataset");

  SelectionReport report;
  report.n_datasets = datasets.size();
  report.datasets.reserve(datasets.size());

  std::array<std::vector<double>, 5> sses_by_family;
  std::array<std::size_t, 5> wins{};

  for (const auto& bins : datasets) {
    DatasetSelection sel;
    sel.sse_by_family.resize(5);
    bool all_converged = true;
    for (std::size_t f = 0; f < 5; ++f) {
      const auto fit = fit_cdf(bins, static_cast<Family>(f));
      sel.sse_by_family[f] = fit.sse;
      all_converged = all_converged && fit.converged;
    }
    sel.excluded = !all_converged;

    double min_sse = std::numeric_limits<double>::infinity();
    for (const double v : sel.sse_by_family) min_sse = std::min(min_sse, v);
    std::size_t n_tied = 0;
    for (const Family f : kPreferenceOrder) {
      if (sel.sse_by_family[static_cast<std::size_t>(f)] <= min_sse + kSseTie) {
        if (n_tied == 0) sel.best = f;
        ++n_tied;
      }
    }
    sel.tie = n_tied > 1;

    if (sel.excluded) {
      ++report.n_excluded;
    } else {
      ++wins[static_cast<std::size_t>(sel.best)];
      for (std::size_t f = 0; f < 5; ++f) sses_by_family[f].push_back(sel.sse_by_family[f]);
    }
    report.datasets.push_back(std::move(sel));
  }

  for (std::size_t f = 0; f < 5; ++f) {
    FamilySummary summary;
    summary.family = static_cast<Family>(f);
    summary.wins = wins[f];
    auto& sses = sses_by_family[f];
    if (!sses.empty()) {
      summary.sse_mean = std::accumulate(sses.begin(), sses.end(), 0.0) /
                         static_cast<double>(sses.size());
      std::sort(sses.begin(), sses.end());
      summary.sse_p16 = stats::quantile_type7(sses, 0.16);
      summary.sse_p84 = stats::quantile_type7(sses, 0.84);
    }
    report.families.push_back(summary);
  }
  return report;
}

std::vector<double> ImGrid::values() const {
  if (!(step_kmh > 0.0) || !(max_kmh > min_kmh))
    throw FitError("im grid: need max > min and a positive step");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>((max_kmh - min_kmh) / step_kmh) + 2);
  for (double v = min_kmh; v <= max_kmh + 1e-9; v += step_kmh) grid.push_back(v);
  return grid;
}

std::vector<PercentileCurve> percentile_curves(std::span<const FragilityFit> fits,
                                               std::span<const double> percentiles,
                                               const ImGrid& grid) {
  std::vector<const FragilityFit*> usable;
  usable.reserve(fits.size());
  for (const auto& fit : fits) {
    if (fit.family != Family::Lognormal)
      throw FitError("percentile_curves: member fits must be lognormal");
    if (fit.converged) usable.push_back(&fit);
  }
  if (usable.size() < 30)
    throw FitError("percentile_curves: need at least 30 converged fits, have " +
                   std::to_string(usable.size()));

  const auto ims = grid.values();
  const std::size_t n_fits = usable.size();

  // Probabilities per grid point across replicates, sorted for quantiles.
  std::vector<std::vector<double>> pointwise(ims.size());
  std::vector<double> column(n_fits);
  for (std::size_t g = 0; g < ims.size(); ++g) {
    for (std::size_t k = 0; k < n_fits; ++k)
      column[k] = lognormal_cdf(ims[g], usable[k]->p1, usable[k]->p2);
    std::sort(column.begin(), column.end());
    pointwise[g] = column;
  }

  std::vector<PercentileCurve> curves;
  curves.reserve(percentiles.size());
  for (const double percentile : percentiles) {
    if (!(percentile > 0.0 && percentile < 100.0))
      throw FitError("percentile_curves: percentiles must lie in (0,100)");
    std::vector<FitPoint> points(ims.size());
    for (std::size_t g = 0; g < ims.size(); ++g)
      points[g] = {ims[g], stats::quantile_type7(pointwise[g], percentile / 100.0)};
    const auto fit = fit_cdf(points, Family::Lognormal);
    if (!fit.converged)
      throw FitError("percentile_curves: refit did not converge at percentile " +
                     std::to_string(percentile) + " (sse " + std::to_string(fit.sse) + ")");
    curves.push_back({percentile, fit.p1, fit.p2, fit.sse, fit.converged});
  }
  return curves;
}

std::vector<ConvergenceRow> bin_convergence(std::span<const double> gusts_kmh,
                                            std::span<const std::uint8_t> failed,
                                            std::span<const std::size_t> n_values) {
  std::vector<ConvergenceRow> rows;
  rows.reserve(n_values.size());
  for (const std::size_t n : n_values) {
    const auto bins = bin_towers(gusts_kmh, failed, n);
    const auto fit = fit_cdf(bins, Family::Lognormal);
    rows.push_back({n, fit.p1, fit.p2});
  }
  return rows;
}

std::vector<ReferenceCurve> reference_curves() {
  return {
      {"Quanta Technology (2009)", 284.0, 0.035},
      {"Panteli et al. (2017)", 294.0, 0.25},
      {"Fu et al. (2019)", 223.5, 0.04},
  };
}

}  // namespace cyclofrag::fragility
