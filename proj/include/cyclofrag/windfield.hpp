#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cyclofrag/ingest.hpp"

namespace cyclofrag::windfield {

// The three radial wind profile models: Willoughby single exponential,
// Willoughby double exponential, and Holland.
enum class Rwpm { Wse, Wde, Hol };

const char* rwpm_name(Rwpm model);
std::optional<Rwpm> rwpm_from_name(std::string_view name);

// One sampled model/conversion-factor/gust-factor choice.
struct WindConfig {
  Rwpm model{Rwpm::Wde};
  double cf{0.90};  // surface/gradient conversion factor
  double gf{1.58};  // 3-sec gust / 3-min sustained ratio
};

// Sectionally continuous Willoughby vortex: power-law eye, polynomial-ramp
// transition on [r1, r2], exponential outer decay (single or dual).
struct WilloughbyParams {
  double vmax_gradient_mps{};
  double rmax_km{};
  double n_exp{};
  double r1_km{};
  double r2_km{};
  double x1_km{};
  double x2_km{25.0};  // fixed short decay length of the dual profile
  double a_mix{};      // dual-exponential mixing fraction, 0 for WSE
};

struct HollandParams {
  double a_scale{};     // rmax^B, with r in km
  double b_scale{};
  double delta_p_pa{};  // ambient minus central pressure
  double rho_kg_m3{};
};

// Knobs the paper leaves to the analyst; recorded in run metadata.
struct HollandOptions {
  double default_b{1.4};
  double rho_kg_m3{1.15};
  double ambient_pressure_hpa{1013.25};
};

// Gradient wind speed (m/s) at radius r from the eye.
double willoughby_profile(const WilloughbyParams& params, bool double_exp, double r_km);
double holland_profile(const HollandParams& params, double r_km);

// Willoughby et al. intensity/latitude regressions; the blend weight at rmax
// is chosen so the profile peaks exactly at rmax with value vmax_gradient.
// Violated parameter invariants raise WindfieldError naming the parameter.
WilloughbyParams calibrate_willoughby(double vmax_gradient_mps, double eye_lat_deg,
                                      bool double_exp);

// With delta_p absent: B defaults and delta_p is set from the peak relation
// vmax = sqrt(B*delta_p/(rho*e)). With delta_p given it is used verbatim and
// B is solved from the same relation. Either way the profile peaks at rmax_km
// with value vmax_gradient_mps.
HollandParams calibrate_holland(double vmax_gradient_mps, double rmax_km,
                                std::optional<double> delta_p_pa,
                                const HollandOptions& options = {});

// One calibrated track step, ready for radial evaluation at any point.
struct StepModel {
  double eye_lat_deg{};
  double eye_lon_deg{};
  bool use_holland{};
  bool double_exp{};
  WilloughbyParams wil;
  HollandParams hol;
};

std::vector<StepModel> calibrate_track(const ingest::Track& track, const WindConfig& config,
                                       const HollandOptions& options = {});

// Max over track steps of cf * V_gradient(r); returns a 3-sec gust in km/h.
double gust_from_models_kmh(std::span<const StepModel> steps, double cf, double lat_deg,
                            double lon_deg);

// Full pipeline for one point: sustained -> x gf -> / cf -> profile -> x cf,
// maximised over the (already interpolated) track.
double gust_at_point(const ingest::Track& track, const WindConfig& config, double lat_deg,
                     double lon_deg, const HollandOptions& options = {});

// Element-wise gust_at_point over the towers; output order matches input.
std::vector<double> gust_field(const ingest::Track& track, const WindConfig& config,
                               std::span<const ingest::TowerRecord> towers,
                               const HollandOptions& options = {}, unsigned jobs = 1);

}  // namespace cyclofrag::windfield
