#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cyclofrag/errors.hpp"
#include "cyclofrag/ingest.hpp"
#include "cyclofrag/log.hpp"
#include "cyclofrag/rng.hpp"
#include "cyclofrag/windfield.hpp"
#include "testutil.hpp"

using namespace cyclofrag;
using windfield::Rwpm;

namespace {

struct QuietLogs {
  QuietLogs() { log::set_level(log::Level::Error); }
};
const QuietLogs quiet;

// Dense radial scan; the independent oracle for peak location and value.
struct ScanResult {
  double peak_r{};
  double peak_v{};
};

template <typename ProfileFn>
ScanResult scan_profile(ProfileFn&& profile, double r_lo, double r_hi, int n_steps = 40000) {
  ScanResult best{r_lo, -1.0};
  for (int i = 0; i <= n_steps; ++i) {
    const double r = r_lo + (r_hi - r_lo) * static_cast<double>(i) / n_steps;
    const double v = profile(r);
    if (v > best.peak_v) best = {r, v};
  }
  return best;
}

}  // namespace

TEST_CASE("willoughby profile basics") {
  const auto params = windfield::calibrate_willoughby(60.0, 19.0, true);

  SUBCASE("zero at the eye") {
    CHECK(windfield::willoughby_profile(params, true, 0.0) == 0.0);
  }
  SUBCASE("peak value at rmax") {
    const double v = windfield::willoughby_profile(params, true, params.rmax_km);
    CHECK(v == doctest::Approx(60.0).epsilon(0.005));
  }
  SUBCASE("single-exponential equals dual with a_mix zero") {
    auto zero_mix = params;
    zero_mix.a_mix = 0.0;
    for (double r = 0.0; r < 400.0; r += 0.37) {
      CHECK(windfield::willoughby_profile(zero_mix, true, r) ==
            windfield::willoughby_profile(zero_mix, false, r));
    }
  }
  SUBCASE("outer decay falls below 20 percent of the peak") {
    const double far = params.rmax_km + 2.0 * params.x1_km;
    CHECK(windfield::willoughby_profile(params, true, far) < 0.2 * 60.0);
    // and decays monotonically beyond the transition zone
    double prev = windfield::willoughby_profile(params, true, params.r2_km);
    for (double r = params.r2_km + 1.0; r < far; r += 5.0) {
      const double v = windfield::willoughby_profile(params, true, r);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
  SUBCASE("invalid parameters rejected") {
    auto bad = params;
    bad.r1_km = bad.rmax_km + 1.0;
    CHECK_THROWS_AS(windfield::willoughby_profile(bad, true, 10.0), WindfieldError);
    auto bad2 = params;
    bad2.n_exp = -1.0;
    CHECK_THROWS_AS(windfield::willoughby_profile(bad2, true, 10.0), WindfieldError);
  }
}

TEST_CASE("willoughby continuity at the transition boundaries") {
  Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    const double vmax = 20.0 + 70.0 * rng.uniform01();
    const double lat = 5.0 + 25.0 * rng.uniform01();
    const bool dual = rng.uniform01() < 0.5;
    const auto params = windfield::calibrate_willoughby(vmax, lat, dual);
    const double eps = 1e-6;
    for (const double boundary : {params.r1_km, params.r2_km}) {
      const double below = windfield::willoughby_profile(params, dual, boundary - eps);
      const double above = windfield::willoughby_profile(params, dual, boundary + eps);
      CHECK(std::fabs(below - above) < 1e-6 * vmax);
    }
  }
}

TEST_CASE("willoughby calibration over the intensity/latitude grid") {
  for (double vmax = 20.0; vmax <= 90.0; vmax += 5.0) {
    for (double lat = 5.0; lat <= 30.0; lat += 5.0) {
      for (const bool dual : {false, true}) {
        const auto p = windfield::calibrate_willoughby(vmax, lat, dual);
        CHECK(p.r1_km > 0.0);
        CHECK(p.r1_km < p.rmax_km);
        CHECK(p.rmax_km < p.r2_km);
        CHECK(p.n_exp > 0.0);
        CHECK(p.x1_km > 0.0);
        CHECK(p.a_mix >= 0.0);
        CHECK(p.a_mix <= 1.0);
        if (!dual) CHECK(p.a_mix == 0.0);

        // Peak sits at rmax with value vmax (dense-scan oracle).
        const auto peak = scan_profile(
            [&](double r) { return windfield::willoughby_profile(p, dual, r); }, 0.0,
            3.0 * p.rmax_km + 50.0);
        CHECK(peak.peak_v == doctest::Approx(vmax).epsilon(0.005));
        CHECK(peak.peak_r == doctest::Approx(p.rmax_km).epsilon(0.01));
      }
    }
  }
}

TEST_CASE("rmax regression is nonincreasing in intensity") {
  for (double lat = 5.0; lat <= 30.0; lat += 5.0) {
    double prev = 1e9;
    for (double vmax = 20.0; vmax <= 90.0; vmax += 2.0) {
      const double rmax = windfield::calibrate_willoughby(vmax, lat, true).rmax_km;
      CHECK(rmax <= prev + 1e-12);
      prev = rmax;
    }
  }
}

TEST_CASE("holland profile and calibration") {
  SUBCASE("limit at the eye and positivity") {
    const auto p = windfield::calibrate_holland(60.0, 30.0, std::nullopt);
    CHECK(windfield::holland_profile(p, 0.0) == 0.0);
    CHECK(windfield::holland_profile(p, 1e-9) < 1e-6 * 60.0);
    for (double r = 0.5; r < 500.0; r += 7.3) CHECK(windfield::holland_profile(p, r) > 0.0);
  }
  SUBCASE("peak location and value match the analytic relation") {
    Rng rng(77);
    for (int i = 0; i < 50; ++i) {
      const double vmax = 25.0 + 70.0 * rng.uniform01();
      const double rmax = 10.0 + 50.0 * rng.uniform01();
      const auto p = windfield::calibrate_holland(vmax, rmax, std::nullopt);
      // Analytic peak: r* = A^(1/B), V* = sqrt(B dp / (rho e)); checked by scan.
      const double r_star = std::pow(p.a_scale, 1.0 / p.b_scale);
      const double v_star = std::sqrt(p.b_scale * p.delta_p_pa / (p.rho_kg_m3 * std::exp(1.0)));
      const auto peak = scan_profile(
          [&](double r) { return windfield::holland_profile(p, r); }, 1e-3, 4.0 * rmax);
      CHECK(r_star == doctest::Approx(rmax).epsilon(1e-9));
      CHECK(peak.peak_r == doctest::Approx(rmax).epsilon(0.01));
      CHECK(peak.peak_v == doctest::Approx(vmax).epsilon(0.005));
      CHECK(v_star == doctest::Approx(vmax).epsilon(1e-9));
    }
  }
  SUBCASE("provided pressure deficit is used verbatim") {
    const auto p = windfield::calibrate_holland(55.0, 28.0, 6500.0);
    CHECK(p.delta_p_pa == 6500.0);
    const auto peak = scan_profile(
        [&](double r) { return windfield::holland_profile(p, r); }, 1e-3, 120.0);
    CHECK(peak.peak_v == doctest::Approx(55.0).epsilon(0.005));
    CHECK(peak.peak_r == doctest::Approx(28.0).epsilon(0.01));
  }
  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS(windfield::calibrate_holland(-5.0, 30.0, std::nullopt), WindfieldError);
    CHECK_THROWS_AS(windfield::calibrate_holland(60.0, 0.0, std::nullopt), WindfieldError);
    CHECK_THROWS_AS(windfield::calibrate_holland(60.0, 30.0, -100.0), WindfieldError);
  }
}

TEST_CASE("profile output scales with vmax for fixed shape parameters") {
  auto p = windfield::calibrate_willoughby(45.0, 18.0, true);
  for (const double scale : {1.5, 2.0, 0.5}) {
    auto scaled = p;
    scaled.vmax_gradient_mps = p.vmax_gradient_mps * scale;
    for (double r = 0.5; r < 300.0; r += 11.7) {
      CHECK(windfield::willoughby_profile(scaled, true, r) ==
            doctest::Approx(scale * windfield::willoughby_profile(p, true, r)).epsilon(1e-12));
    }
  }
}

TEST_CASE("gust_at_point pipeline") {
  // Single-step track so per-step behaviour is visible.
  ingest::Track track;
  track.points.push_back({0, 19.0, 86.0, 150.0, std::nullopt});
  track.points.push_back({3600, 19.0, 86.0, 150.0, std::nullopt});
  const auto interp = ingest::interpolate_track(track, 60);

  SUBCASE("at the eye the profile contributes zero") {
    for (const Rwpm model : {Rwpm::Wse, Rwpm::Wde}) {
      const windfield::WindConfig config{model, 0.90, 1.58};
      CHECK(windfield::gust_at_point(interp, config, 19.0, 86.0) == 0.0);
    }
  }

  SUBCASE("at the eye wall the conversion factor cancels") {
    for (const Rwpm model : {Rwpm::Wse, Rwpm::Wde, Rwpm::Hol}) {
      for (const double cf : {0.75, 0.80, 0.90}) {
        const windfield::WindConfig config{model, cf, 1.58};
        const double v_gradient = 150.0 / 3.6 * 1.58 / cf;
        const double rmax =
            windfield::calibrate_willoughby(v_gradient, 19.0, model == Rwpm::Wde).rmax_km;
        // Walk due north from the eye by rmax.
        const double lat_at_rmax = 19.0 + rmax / 111.19492664455873;
        const double gust = windfield::gust_at_point(interp, config, lat_at_rmax, 86.0);
        CHECK(gust == doctest::Approx(1.58 * 150.0).epsilon(0.005));
      }
    }
  }

  SUBCASE("gust is monotone in the gust factor at the eye wall") {
    double prev = 0.0;
    for (double gf = 1.3; gf <= 1.9; gf += 0.05) {
      const windfield::WindConfig config{Rwpm::Wde, 0.90, gf};
      const double v_gradient = 150.0 / 3.6 * gf / 0.90;
      const double rmax = windfield::calibrate_willoughby(v_gradient, 19.0, true).rmax_km;
      const double gust =
          windfield::gust_at_point(interp, config, 19.0 + rmax / 111.19492664455873, 86.0);
      CHECK(gust > prev);
      prev = gust;
    }
  }

  SUBCASE("empty track rejected") {
    const ingest::Track empty;
    const windfield::WindConfig config{Rwpm::Wde, 0.90, 1.58};
    CHECK_THROWS_AS(windfield::gust_at_point(empty, config, 19.0, 86.0), WindfieldError);
  }
}

TEST_CASE("distant points see under 20 percent of the peak gust") {
  const auto track = ingest::interpolate_track(testutil::make_track(150.0, 120.0, 12, 3), 30);
  for (const Rwpm model : {Rwpm::Wse, Rwpm::Wde, Rwpm::Hol}) {
    const windfield::WindConfig config{model, 0.90, 1.58};
    // Roughly 500 km east of every track step.
    const double far_gust = windfield::gust_at_point(track, config, 19.5, 91.0);
    double min_dist = 1e9;
    for (const auto& pt : track.points)
      min_dist = std::min(min_dist, ingest::geodesic_km(pt.eye_lat_deg, pt.eye_lon_deg, 19.5, 91.0));
    CHECK(min_dist > 450.0);
    const double peak_gust = 1.58 * 150.0;
    CHECK(far_gust < 0.2 * peak_gust);
  }
}

TEST_CASE("gust_field matches gust_at_point and respects ordering") {
  const auto track = ingest::interpolate_track(testutil::make_track(), 60);
  auto towers = testutil::make_towers(40, 5);
  const windfield::WindConfig config{Rwpm::Wde, 0.90, 1.58};

  const auto field = windfield::gust_field(track, config, towers);
  REQUIRE(field.size() == towers.size());
  for (std::size_t i = 0; i < towers.size(); ++i) {
    CHECK(field[i] ==
          windfield::gust_at_point(track, config, towers[i].lat_deg, towers[i].lon_deg));
    CHECK(field[i] >= 0.0);
  }

  // Permuting towers permutes gusts identically.
  std::vector<ingest::TowerRecord> reversed(towers.rbegin(), towers.rend());
  const auto reversed_field = windfield::gust_field(track, config, reversed);
  for (std::size_t i = 0; i < towers.size(); ++i)
    CHECK(reversed_field[i] == field[towers.size() - 1 - i]);

  // Bit-identical across repeated evaluation and worker counts.
  const auto field_again = windfield::gust_field(track, config, towers, {}, 4);
  CHECK(field == field_again);
}
