#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cyclofrag::fragility {

// Candidate two-parameter CDF families for the failure-ratio fit.
enum class Family { Lognormal, Normal, Cauchy, Gamma, Weibull };

const char* family_name(Family family);

// F(x) for the family. Parameter meaning per family:
//   Lognormal: p1 = median, p2 = log standard deviation
//   Normal:    p1 = mean,   p2 = standard deviation
//   Cauchy:    p1 = location, p2 = scale
//   Gamma:     p1 = shape,  p2 = scale
//   Weibull:   p1 = shape,  p2 = scale
double family_cdf(Family family, double x, double p1, double p2);

// Lognormal fragility value; F(im <= 0) = 0.
double lognormal_cdf(double im_kmh, double x_m_kmh, double beta);

struct BinRow {
  double mean_gust_kmh{};
  std::size_t n_towers{};
  std::size_t n_failed{};
  double failure_ratio{};
};

struct BinTable {
  std::vector<BinRow> rows;
};

// Equal-count binning: towers sorted by gust (ties by original index), split
// into n_bins contiguous groups whose sizes differ by at most one, larger
// bins first.
BinTable bin_towers(std::span<const double> gusts_kmh, std::span<const std::uint8_t> failed,
                    std::size_t n_bins);

struct FragilityFit {
  Family family{Family::Lognormal};
  double p1{};
  double p2{};
  double sse{};
  bool converged{};
};

// One (intensity, observed ratio) point of the least-squares target.
struct FitPoint {
  double im_kmh{};
  double prob{};
};

// Least-squares CDF fit by Nelder-Mead over the log-parameters. Start point:
// p1 at the first bin whose ratio reaches 0.5 (fallback: the last bin) with a
// tight spread, plus a second wide-spread start; the better end point wins.
// Zero-failure data cannot constrain the parameters and comes back with
// converged=false immediately.
FragilityFit fit_cdf(std::span<const FitPoint> points, Family family);
FragilityFit fit_cdf(const BinTable& bins, Family family);

// Sum of squared differences between observed ratios and the fitted CDF.
double sse(std::span<const FitPoint> points, const FragilityFit& fit);
double sse(const BinTable& bins, const FragilityFit& fit);

struct FamilySummary {
  Family family{};
  std::size_t wins{};
  double sse_mean{};
  double sse_p16{};
  double sse_p84{};
};

struct DatasetSelection {
  Family best{};
  bool tie{};
  bool excluded{};  // some family failed to converge on this dataset
  std::vector<double> sse_by_family;
};

struct SelectionReport {
  std::vector<FamilySummary> families;
  std::vector<DatasetSelection> datasets;
  std::size_t n_datasets{};
  std::size_t n_excluded{};
};

// Fits all five families to every dataset and aggregates min-SSE win counts
// and SSE spread. SSE ties within 1e-15 resolve by the fixed preference
// order LO > NO > GA > WE > CA and are flagged.
SelectionReport select_distribution(std::span<const BinTable> datasets);

struct PercentileCurve {
  double percentile{};
  double x_m_kmh{};
  double beta{};
  double sse{};
  bool converged{};
};

struct ImGrid {
  double min_kmh{150.0};
  double max_kmh{450.0};
  double step_kmh{1.0};

  std::vector<double> values() const;
};

// Pointwise probability percentiles across the replicate curves on the grid,
// each refit as a lognormal CDF. Lower percentiles give larger medians.
// Requires at least 30 converged member fits.
std::vector<PercentileCurve> percentile_curves(std::span<const FragilityFit> fits,
                                               std::span<const double> percentiles,
                                               const ImGrid& grid);

struct ConvergenceRow {
  std::size_t n_bins{};
  double x_m_kmh{};
  double beta{};
};

// Lognormal fit parameters as a function of the bin count.
std::vector<ConvergenceRow> bin_convergence(std::span<const double> gusts_kmh,
                                            std::span<const std::uint8_t> failed,
                                            std::span<const std::size_t> n_values);

struct ReferenceCurve {
  std::string source;
  double x_m_kmh{};
  double beta{};
};

// Published transmission-tower fragility parameters used for comparison.
std::vector<ReferenceCurve> reference_curves();

}  // namespace cyclofrag::fragility
