#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "cyclofrag/errors.hpp"
#include "cyclofrag/ingest.hpp"
#include "cyclofrag/log.hpp"
#include "cyclofrag/rng.hpp"

using namespace cyclofrag;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

struct QuietLogs {
  QuietLogs() { log::set_level(log::Level::Error); }
};
const QuietLogs quiet;

}  // namespace

TEST_CASE("parse_towers maps CSV fields directly") {
  const auto path = write_temp("towers_basic.csv",
                               "id,lat_deg,lon_deg,height_m,voltage_kv,damage\n"
                               "T1,19.80,85.82,30,132,collapse\n"
                               "T2,19.90,85.60,,,none\n"
                               "T3,20.10,85.40,45,220,Partial\n");
  const auto towers = ingest::parse_towers(path, ingest::TowersFormat::Csv);
  REQUIRE(towers.size() == 3);
  CHECK(towers[0].id == "T1");
  CHECK(towers[0].lat_deg == doctest::Approx(19.80));
  CHECK(towers[0].lon_deg == doctest::Approx(85.82));
  CHECK(*towers[0].height_m == doctest::Approx(30.0));
  CHECK(*towers[0].voltage_kv == doctest::Approx(132.0));
  CHECK(towers[0].damage == ingest::Damage::Collapse);
  CHECK(towers[1].damage == ingest::Damage::None);
  CHECK_FALSE(towers[1].height_m.has_value());
  CHECK(towers[2].damage == ingest::Damage::Partial);
}

TEST_CASE("parse_towers rejects bad rows with row numbers") {
  SUBCASE("latitude out of range") {
    const auto path = write_temp("towers_badlat.csv",
                                 "id,lat_deg,lon_deg,damage\n"
                                 "T1,19.8,85.8,none\n"
                                 "T2,95,85.8,none\n");
    CHECK_THROWS_WITH_AS(ingest::parse_towers(path, ingest::TowersFormat::Csv),
                         doctest::Contains("latitude out of range"), IngestError);
    try {
      ingest::parse_towers(path, ingest::TowersFormat::Csv);
    } catch (const IngestError& e) {
      CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
  }
  SUBCASE("duplicate id") {
    const auto path = write_temp("towers_dup.csv",
                                 "id,lat_deg,lon_deg,damage\nT1,19.8,85.8,none\nT1,19.9,85.7,none\n");
    CHECK_THROWS_WITH_AS(ingest::parse_towers(path, ingest::TowersFormat::Csv),
                         doctest::Contains("duplicate id"), IngestError);
  }
  SUBCASE("malformed numeric field") {
    const auto path = write_temp("towers_badnum.csv",
                                 "id,lat_deg,lon_deg,damage\nT1,abc,85.8,none\n");
    CHECK_THROWS_WITH_AS(ingest::parse_towers(path, ingest::TowersFormat::Csv),
                         doctest::Contains("lat_deg"), IngestError);
  }
  SUBCASE("unknown damage label") {
    const auto path = write_temp("towers_badlabel.csv",
                                 "id,lat_deg,lon_deg,damage\nT1,19.8,85.8,wrecked\n");
    CHECK_THROWS_AS(ingest::parse_towers(path, ingest::TowersFormat::Csv), IngestError);
  }
}

TEST_CASE("parse_towers reads GeoJSON point features") {
  const auto path = write_temp("towers.geojson", R"({
    "type": "FeatureCollection",
    "features": [
      {"type": "Feature",
       "geometry": {"type": "Point", "coordinates": [85.82, 19.80]},
       "properties": {"id": "T1", "height_m": 30, "voltage_kv": 132, "damage": "collapse"}},
      {"type": "Feature",
       "geometry": {"type": "Point", "coordinates": [85.60, 19.90]},
       "properties": {"id": "T2", "damage": "none"}}
    ]})");
  const auto towers = ingest::parse_towers(path, ingest::TowersFormat::GeoJson);
  REQUIRE(towers.size() == 2);
  CHECK(towers[0].id == "T1");
  CHECK(towers[0].lat_deg == doctest::Approx(19.80));
  CHECK(towers[0].lon_deg == doctest::Approx(85.82));
  CHECK(towers[0].damage == ingest::Damage::Collapse);
  CHECK_FALSE(towers[1].voltage_kv.has_value());
}

TEST_CASE("parse_track basics and errors") {
  SUBCASE("two rows six hours apart") {
    const auto path = write_temp("track_ok.csv",
                                 "timestamp,eye_lat_deg,eye_lon_deg,vmax_3min_10m_kmh,central_pressure_hpa\n"
                                 "2019-05-02T12:00:00Z,17.5,86.9,210,940\n"
                                 "2019-05-02T18:00:00Z,18.4,86.2,200,\n");
    const auto track = ingest::parse_track(path);
    REQUIRE(track.points.size() == 2);
    CHECK(track.points[1].time_utc_s - track.points[0].time_utc_s == 6 * 3600);
    CHECK(track.points[0].central_pressure_hpa.has_value());
    CHECK_FALSE(track.points[1].central_pressure_hpa.has_value());
  }
  SUBCASE("rows out of order") {
    const auto path = write_temp("track_order.csv",
                                 "timestamp,eye_lat_deg,eye_lon_deg,vmax_3min_10m_kmh\n"
                                 "2019-05-02T18:00:00Z,18.4,86.2,200\n"
                                 "2019-05-02T12:00:00Z,17.5,86.9,210\n");
    CHECK_THROWS_WITH_AS(ingest::parse_track(path), doctest::Contains("strictly increasing"),
                         IngestError);
  }
  SUBCASE("nonpositive intensity") {
    const auto path = write_temp("track_vmax.csv",
                                 "timestamp,eye_lat_deg,eye_lon_deg,vmax_3min_10m_kmh\n"
                                 "2019-05-02T12:00:00Z,17.5,86.9,-10\n"
                                 "2019-05-02T18:00:00Z,18.4,86.2,200\n");
    CHECK_THROWS_WITH_AS(ingest::parse_track(path), doctest::Contains("nonpositive intensity"),
                         IngestError);
  }
  SUBCASE("missing vmax") {
    const auto path = write_temp("track_missing.csv",
                                 "timestamp,eye_lat_deg,eye_lon_deg,vmax_3min_10m_kmh\n"
                                 "2019-05-02T12:00:00Z,17.5,86.9,\n"
                                 "2019-05-02T18:00:00Z,18.4,86.2,200\n");
    CHECK_THROWS_AS(ingest::parse_track(path), IngestError);
  }
  SUBCASE("single row is not a track") {
    const auto path = write_temp("track_short.csv",
                                 "timestamp,eye_lat_deg,eye_lon_deg,vmax_3min_10m_kmh\n"
                                 "2019-05-02T12:00:00Z,17.5,86.9,210\n");
    CHECK_THROWS_AS(ingest::parse_track(path), IngestError);
  }
}

TEST_CASE("interpolate_track linear behaviour") {
  ingest::Track track;
  track.points.push_back({0, 10.0, 80.0, 100.0, 980.0});
  track.points.push_back({6 * 3600, 12.0, 78.0, 200.0, 960.0});

  SUBCASE("midpoint at half step") {
    const auto interp = ingest::interpolate_track(track, 180);
    REQUIRE(interp.points.size() == 3);
    CHECK(interp.points[1].eye_lat_deg == doctest::Approx(11.0));
    CHECK(interp.points[1].eye_lon_deg == doctest::Approx(79.0));
    CHECK(interp.points[1].vmax_kmh == doctest::Approx(150.0));
    CHECK(*interp.points[1].central_pressure_hpa == doctest::Approx(970.0));
  }
  SUBCASE("step equal to span keeps endpoints only") {
    const auto interp = ingest::interpolate_track(track, 360);
    REQUIRE(interp.points.size() == 2);
    CHECK(interp.points[0].time_utc_s == 0);
    CHECK(interp.points[1].time_utc_s == 6 * 3600);
  }
  SUBCASE("linear interpolation value at 1.5 h") {
    const auto interp = ingest::interpolate_track(track, 90);
    REQUIRE(interp.points.size() == 5);
    CHECK(interp.points[1].vmax_kmh == doctest::Approx(125.0));  // 100 + 100 * 1.5/6
  }
  SUBCASE("zero step rejected") {
    CHECK_THROWS_AS(ingest::interpolate_track(track, 0), IngestError);
  }
  SUBCASE("pressure dropped when one endpoint lacks it") {
    track.points[1].central_pressure_hpa.reset();
    const auto interp = ingest::interpolate_track(track, 180);
    CHECK_FALSE(interp.points[1].central_pressure_hpa.has_value());
  }
}

TEST_CASE("interpolate_track preserves aligned original points exactly") {
  ingest::Track track;
  track.points.push_back({0, 10.25, 80.125, 101.7, std::nullopt});
  track.points.push_back({3 * 3600, 11.1, 79.4, 163.3, 978.5});
  track.points.push_back({6 * 3600, 12.7, 78.9, 149.9, std::nullopt});
  const auto interp = ingest::interpolate_track(track, 90);
  REQUIRE(interp.points.size() == 5);
  for (std::size_t k : {0u, 2u, 4u}) {
    const auto& orig = track.points[k / 2];
    const auto& got = interp.points[k];
    CHECK(got.time_utc_s == orig.time_utc_s);
    CHECK(got.eye_lat_deg == orig.eye_lat_deg);
    CHECK(got.eye_lon_deg == orig.eye_lon_deg);
    CHECK(got.vmax_kmh == orig.vmax_kmh);
    CHECK(got.central_pressure_hpa == orig.central_pressure_hpa);
  }
}

TEST_CASE("geodesic_km identity, known value, symmetry, triangle inequality") {
  CHECK(ingest::geodesic_km(19.8, 85.8, 19.8, 85.8) == doctest::Approx(0.0).epsilon(1e-9));
  // One degree of longitude on the equator: 2*pi*6371/360.
  CHECK(ingest::geodesic_km(0.0, 0.0, 0.0, 1.0) == doctest::Approx(111.1949).epsilon(1e-4));

  Rng rng(91);
  for (int i = 0; i < 200; ++i) {
    const double lat_a = -80.0 + 160.0 * rng.uniform01();
    const double lon_a = -179.0 + 358.0 * rng.uniform01();
    const double lat_b = -80.0 + 160.0 * rng.uniform01();
    const double lon_b = -179.0 + 358.0 * rng.uniform01();
    const double lat_c = -80.0 + 160.0 * rng.uniform01();
    const double lon_c = -179.0 + 358.0 * rng.uniform01();
    const double ab = ingest::geodesic_km(lat_a, lon_a, lat_b, lon_b);
    const double ba = ingest::geodesic_km(lat_b, lon_b, lat_a, lon_a);
    const double ac = ingest::geodesic_km(lat_a, lon_a, lat_c, lon_c);
    const double cb = ingest::geodesic_km(lat_c, lon_c, lat_b, lon_b);
    CHECK(ab == ba);
    CHECK(ab >= 0.0);
    CHECK(ab <= ac + cb + 1e-9);
    CHECK(ingest::geodesic_km(lat_a, lon_a, lat_a, lon_a) <= 1e-9);
  }
}

TEST_CASE("tower and track files round-trip bit-for-bit") {
  const auto towers_path = write_temp("towers_rt.csv",
                                      "id,lat_deg,lon_deg,height_m,voltage_kv,damage\n"
                                      "T1,19.801234567891,85.82,30.25,132,collapse\n"
                                      "T2,19.9,85.6,,,none\n"
                                      "T3,-20.123,179.875,21.5,220,partial\n");
  const auto towers = ingest::parse_towers(towers_path, ingest::TowersFormat::Csv);
  const auto rt_path = std::filesystem::temp_directory_path() / "towers_rt_out.csv";
  ingest::write_towers_csv(rt_path, towers);
  const auto again = ingest::parse_towers(rt_path, ingest::TowersFormat::Csv);
  REQUIRE(again.size() == towers.size());
  for (std::size_t i = 0; i < towers.size(); ++i) {
    CHECK(again[i].id == towers[i].id);
    CHECK(again[i].lat_deg == towers[i].lat_deg);
    CHECK(again[i].lon_deg == towers[i].lon_deg);
    CHECK(again[i].height_m == towers[i].height_m);
    CHECK(again[i].voltage_kv == towers[i].voltage_kv);
    CHECK(again[i].damage == towers[i].damage);
  }

  const auto track_path = write_temp("track_rt.csv",
                                     "timestamp,eye_lat_deg,eye_lon_deg,vmax_3min_10m_kmh,central_pressure_hpa\n"
                                     "2019-05-02T12:00:00Z,17.512345,86.93,212.7,938.25\n"
                                     "2019-05-02T15:00:00Z,18.1,86.5,207.1,\n"
                                     "2019-05-02T18:00:00Z,18.43,86.21,199.9,952\n");
  const auto track = ingest::parse_track(track_path);
  const auto rt_track = std::filesystem::temp_directory_path() / "track_rt_out.csv";
  ingest::write_track_csv(rt_track, track);
  const auto track_again = ingest::parse_track(rt_track);
  REQUIRE(track_again.points.size() == track.points.size());
  for (std::size_t i = 0; i < track.points.size(); ++i) {
    CHECK(track_again.points[i].time_utc_s == track.points[i].time_utc_s);
    CHECK(track_again.points[i].eye_lat_deg == track.points[i].eye_lat_deg);
    CHECK(track_again.points[i].eye_lon_deg == track.points[i].eye_lon_deg);
    CHECK(track_again.points[i].vmax_kmh == track.points[i].vmax_kmh);
    CHECK(track_again.points[i].central_pressure_hpa == track.points[i].central_pressure_hpa);
  }
}

TEST_CASE("iso8601 parsing and formatting") {
  CHECK(ingest::parse_iso8601_utc("1970-01-01T00:00:00Z") == 0);
  CHECK(ingest::parse_iso8601_utc("1970-01-02 00:00:00") == 86400);
  CHECK(ingest::parse_iso8601_utc("2019-05-03T08:00:00Z") ==
        ingest::parse_iso8601_utc("2019-05-03T08:00Z"));
  const std::int64_t t = ingest::parse_iso8601_utc("2019-05-03T08:07:06Z");
  CHECK(ingest::format_iso8601_utc(t) == "2019-05-03T08:07:06Z");
  CHECK_THROWS_AS(ingest::parse_iso8601_utc("yesterday"), IngestError);
  CHECK_THROWS_AS(ingest::parse_iso8601_utc("2019-13-01T00:00:00Z"), IngestError);
}

TEST_CASE("damage states: collapse is a subset of functionality disruption") {
  CHECK(ingest::in_state(ingest::Damage::Collapse, ingest::DamageState::Collapse));
  CHECK(ingest::in_state(ingest::Damage::Collapse, ingest::DamageState::FunctionalityDisruption));
  CHECK_FALSE(ingest::in_state(ingest::Damage::Partial, ingest::DamageState::Collapse));
  CHECK(ingest::in_state(ingest::Damage::Partial, ingest::DamageState::FunctionalityDisruption));
  CHECK_FALSE(ingest::in_state(ingest::Damage::None, ingest::DamageState::FunctionalityDisruption));

  // Count inclusion on randomized damage vectors.
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ingest::TowerRecord> towers(200);
    for (auto& t : towers) {
      const double u = rng.uniform01();
      t.damage = u < 0.3 ? ingest::Damage::Collapse
                         : (u < 0.5 ? ingest::Damage::Partial : ingest::Damage::None);
    }
    const auto co = ingest::state_flags(towers, ingest::DamageState::Collapse);
    const auto fd = ingest::state_flags(towers, ingest::DamageState::FunctionalityDisruption);
    std::size_t n_co = 0, n_fd = 0;
    for (std::size_t i = 0; i < towers.size(); ++i) {
      n_co += co[i];
      n_fd += fd[i];
      CHECK(co[i] <= fd[i]);
    }
    CHECK(n_co <= n_fd);
  }
}
