#include "cyclofrag/windfield.hpp"

#include <cmath>
#include <string>

#include "cyclofrag/errors.hpp"
#include "cyclofrag/parallel.hpp"

namespace cyclofrag::windfield {

namespace {

constexpr double kMpsToKmh = 3.6;
constexpr double kE = 2.71828182845904523536;

// Smooth 0->1 ramp of the transition zone, C4-continuous at both ends.
double blend_ramp(double xi) {
  const double x5 = xi * xi * xi * xi * xi;
  return x5 * (126.0 + xi * (-420.0 + xi * (540.0 + xi * (-315.0 + xi * 70.0))));
}

double blend_ramp_deriv(double xi) {
  const double a = xi * (1.0 - xi);
  return 630.0 * a * a * a * a;
}

// Inverts blend_ramp on [0,1] by safeguarded Newton iteration.
double solve_ramp_fraction(double w_target) {
  double lo = 0.0, hi = 1.0, xi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double fx = blend_ramp(xi) - w_target;
    if (std::fabs(fx) < 1e-13) break;
    if (fx > 0.0)
      hi = xi;
    else
      lo = xi;
    const double d = blend_ramp_deriv(xi);
    double next = d > 0.0 ? xi - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    xi = next;
  }
  return xi;
}

void validate_willoughby(const WilloughbyParams& p) {
  if (!(p.vmax_gradient_mps > 0.0))
    throw WindfieldError("willoughby: vmax_gradient must be positive");
  if (!(p.n_exp > 0.0)) throw WindfieldError("willoughby: n_exp must be positive");
  if (!(p.x1_km > 0.0)) throw WindfieldError("willoughby: x1_km must be positive");
  if (!(p.x2_km > 0.0)) throw WindfieldError("willoughby: x2_km must be positive");
  if (!(p.a_mix >= 0.0 && p.a_mix <= 1.0))
    throw WindfieldError("willoughby: a_mix must be in [0,1]");
  if (!(p.r1_km > 0.0 && p.r1_km < p.rmax_km && p.rmax_km < p.r2_km))
    throw WindfieldError("willoughby: need 0 < r1_km < rmax_km < r2_km");
}

void validate_holland(const HollandParams& p) {
  if (!(p.a_scale > 0.0)) throw WindfieldError("holland: a_scale must be positive");
  if (!(p.b_scale > 0.0)) throw WindfieldError("holland: b_scale must be positive");
  if (!(p.delta_p_pa > 0.0)) throw WindfieldError("holland: delta_p must be positive");
  if (!(p.rho_kg_m3 > 0.0)) throw WindfieldError("holland: rho must be positive");
}

}  // namespace

const char* rwpm_name(Rwpm model) {
  switch (model) {
    case Rwpm::Wse: return "WSE";
    case Rwpm::Wde: return "WDE";
    case Rwpm::Hol: return "HOL";
  }
  return "WSE";
}

std::optional<Rwpm> rwpm_from_name(std::string_view name) {
  if (name == "WSE" || name == "wse") return Rwpm::Wse;
  if (name == "WDE" || name == "wde") return Rwpm::Wde;
  if (name == "HOL" || name == "hol") return Rwpm::Hol;
  return std::nullopt;
}

double willoughby_profile(const WilloughbyParams& p, bool double_exp, double r_km) {
  validate_willoughby(p);
  if (r_km < 0.0) throw WindfieldError("willoughby: radius must be nonnegative");
  const double a = double_exp ? p.a_mix : 0.0;

  auto inner = [&](double r) {
    return p.vmax_gradient_mps * std::pow(r / p.rmax_km, p.n_exp);
  };
  auto outer = [&](double r) {
    const double decay1 = std::exp(-(r - p.rmax_km) / p.x1_km);
    if (a == 0.0) return p.vmax_gradient_mps * decay1;
    const double decay2 = std::exp(-(r - p.rmax_km) / p.x2_km);
    return p.vmax_gradient_mps * ((1.0 - a) * decay1 + a * decay2);
  };

  if (r_km < p.r1_km) return inner(r_km);
  if (r_km > p.r2_km) return outer(r_km);
  const double w = blend_ramp((r_km - p.r1_km) / (p.r2_km - p.r1_km));
  return inner(r_km) * (1.0 - w) + outer(r_km) * w;
}

double holland_profile(const HollandParams& p, double r_km) {
  validate_holland(p);
  if (r_km < 0.0) throw WindfieldError("holland: radius must be nonnegative");
  if (r_km == 0.0) return 0.0;
  const double x = p.a_scale / std::pow(r_km, p.b_scale);
  const double v2 = p.b_scale * p.delta_p_pa / p.rho_kg_m3 * x * std::exp(-x);
  return std::sqrt(v2);
}

WilloughbyParams calibrate_willoughby(double vmax_gradient_mps, double eye_lat_deg,
                                      bool double_exp) {
  if (!(vmax_gradient_mps > 0.0))
    throw WindfieldError("calibrate_willoughby: vmax_gradient must be positive");
  const double v = vmax_gradient_mps;
  const double lat = std::fabs(eye_lat_deg);

  WilloughbyParams p;
  p.vmax_gradient_mps = v;
  p.rmax_km = 46.4 * std::exp(-0.0155 * v + 0.0169 * lat);
  p.x1_km = 317.1 - 2.026 * v + 1.915 * lat;
  p.n_exp = 0.4067 + 0.0144 * v - 0.0038 * lat;
  p.x2_km = 25.0;
  p.a_mix = double_exp ? std::max(0.0, 0.0696 + 0.0049 * v - 0.0064 * lat) : 0.0;

  if (!(p.x1_km > 0.0)) throw WindfieldError("calibrate_willoughby: x1_km not positive");
  if (!(p.n_exp > 0.0)) throw WindfieldError("calibrate_willoughby: n_exp not positive");
  if (p.a_mix > 1.0) throw WindfieldError("calibrate_willoughby: a_mix above 1");

  // Blend weight at rmax from the tangency condition V'(rmax) = 0, so the
  // peak of the composite profile sits exactly at the eye wall.
  const double inner_slope = p.n_exp / p.rmax_km;
  const double outer_slope = (1.0 - p.a_mix) / p.x1_km + p.a_mix / p.x2_km;
  const double w_peak = inner_slope / (inner_slope + outer_slope);
  const double xi_peak = solve_ramp_fraction(w_peak);

  const double width = p.rmax_km > 20.0 ? 25.0 : 15.0;
  p.r1_km = p.rmax_km - xi_peak * width;
  p.r2_km = p.r1_km + width;
  if (!(p.r1_km > 0.0))
    throw WindfieldError("calibrate_willoughby: r1_km not positive (rmax too small)");
  validate_willoughby(p);
  return p;
}

HollandParams calibrate_holland(double vmax_gradient_mps, double rmax_km,
                                std::optional<double> delta_p_pa,
                                const HollandOptions& options) {
  if (!(vmax_gradient_mps > 0.0))
    throw WindfieldError("calibrate_holland: vmax_gradient must be positive");
  if (!(rmax_km > 0.0)) throw WindfieldError("calibrate_holland: rmax_km must be positive");

  HollandParams p;
  p.rho_kg_m3 = options.rho_kg_m3;
  const double v2_rho_e = vmax_gradient_mps * vmax_gradient_mps * p.rho_kg_m3 * kE;
  if (delta_p_pa) {
    // Pressure given: keep it, solve B from the peak relation.
    if (!(*delta_p_pa > 0.0))
      throw WindfieldError("calibrate_holland: delta_p must be positive");
    p.delta_p_pa = *delta_p_pa;
    p.b_scale = v2_rho_e / p.delta_p_pa;
    if (!(p.b_scale > 0.1 && p.b_scale < 20.0))
      throw WindfieldError("calibrate_holland: derived b_scale " +
                           std::to_string(p.b_scale) + " out of range (0.1, 20)");
  } else {
    p.b_scale = options.default_b;
    p.delta_p_pa = v2_rho_e / p.b_scale;
  }
  p.a_scale = std::pow(rmax_km, p.b_scale);
  validate_holland(p);
  return p;
}

std::vector<StepModel> calibrate_track(const ingest::Track& track, const WindConfig& config,
                                       const HollandOptions& options) {
  if (track.points.empty()) throw WindfieldError("gust evaluation needs a non-empty track");
  if (!(config.cf > 0.0 && config.cf <= 1.0))
    throw WindfieldError("wind config: cf must be in (0,1]");
  if (!(config.gf > 0.0)) throw WindfieldError("wind config: gf must be positive");

  std::vector<StepModel> steps;
  steps.reserve(track.points.size());
  for (const auto& pt : track.points) {
    StepModel step;
    step.eye_lat_deg = pt.eye_lat_deg;
    step.eye_lon_deg = pt.eye_lon_deg;
    const double v_gust10_mps = pt.vmax_kmh / kMpsToKmh * config.gf;
    const double v_gradient_mps = v_gust10_mps / config.cf;
    if (config.model == Rwpm::Hol) {
      step.use_holland = true;
      // Radius of maximum wind from the same intensity/latitude regression.
      const double rmax_km =
          calibrate_willoughby(v_gradient_mps, pt.eye_lat_deg, false).rmax_km;
      std::optional<double> delta_p;
      if (pt.central_pressure_hpa &&
          *pt.central_pressure_hpa < options.ambient_pressure_hpa)
        delta_p = (options.ambient_pressure_hpa - *pt.central_pressure_hpa) * 100.0;
      step.hol = calibrate_holland(v_gradient_mps, rmax_km, delta_p, options);
    } else {
      step.use_holland = false;
      step.double_exp = config.model == Rwpm::Wde;
      step.wil = calibrate_willoughby(v_gradient_mps, pt.eye_lat_deg, step.double_exp);
    }
    steps.push_back(step);
  }
  return steps;
}

double gust_from_models_kmh(std::span<const StepModel> steps, double cf, double lat_deg,
                            double lon_deg) {
  double best_mps = 0.0;
  for (const auto& step : steps) {
    const double r_km = ingest::geodesic_km(step.eye_lat_deg, step.eye_lon_deg, lat_deg, lon_deg);
    const double v_gradient = step.use_holland
                                  ? holland_profile(step.hol, r_km)
                                  : willoughby_profile(step.wil, step.double_exp, r_km);
    const double gust_mps = cf * v_gradient;
    if (gust_mps > best_mps) best_mps = gust_mps;
  }
  return best_mps * kMpsToKmh;
}

double gust_at_point(const ingest::Track& track, const WindConfig& config, double lat_deg,
                     double lon_deg, const HollandOptions& options) {
  const auto steps = calibrate_track(track, config, options);
  return gust_from_models_kmh(steps, config.cf, lat_deg, lon_deg);
}

std::vector<double> gust_field(const ingest::Track& track, const WindConfig& config,
                               std::span<const ingest::TowerRecord> towers,
                               const HollandOptions& options, unsigned jobs) {
  const auto steps = calibrate_track(track, config, options);
  std::vector<double> gusts(towers.size());
  parallel_for(towers.size(), jobs, [&](std::size_t i) {
    gusts[i] = gust_from_models_kmh(steps, config.cf, towers[i].lat_deg, towers[i].lon_deg);
  });
  return gusts;
}

}  // namespace cyclofrag::windfield
