#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cyclofrag::ingest {

enum class Damage { None, Partial, Collapse };

// Collapse is a subset of FunctionalityDisruption: a tower disrupts
// functionality when it is partially damaged or collapsed.
enum class DamageState { Collapse, FunctionalityDisruption };

struct TowerRecord {
  std::string id;
  double lat_deg{};
  double lon_deg{};
  std::optional<double> height_m;
  std::optional<double> voltage_kv;
  Damage damage{Damage::None};
};

struct TrackPoint {
  std::int64_t time_utc_s{};
  double eye_lat_deg{};
  double eye_lon_deg{};
  double vmax_kmh{};  // 3-min sustained wind at 10 m, as issued with the track
  std::optional<double> central_pressure_hpa;
};

struct Track {
  std::vector<TrackPoint> points;
};

enum class TowersFormat { Csv, GeoJson };

bool in_state(Damage damage, DamageState state);

// Accepted labels: none / partial / collapse, case-insensitive.
Damage parse_damage_label(std::string_view label);
std::string_view damage_label(Damage damage);

// Strict UTC ISO-8601, "YYYY-MM-DD[T ]HH:MM[:SS][Z]".
std::int64_t parse_iso8601_utc(std::string_view text);
std::string format_iso8601_utc(std::int64_t utc_seconds);

// Tower files: CSV columns id, lat_deg, lon_deg, height_m, voltage_kv, damage
// (height/voltage may be empty), or GeoJSON Point features with the same
// property names. Validation failures name the offending row/feature.
std::vector<TowerRecord> parse_towers(const std::filesystem::path& path, TowersFormat format);

// Track file: CSV columns timestamp, eye_lat_deg, eye_lon_deg,
// vmax_3min_10m_kmh, central_pressure_hpa (last one optional).
Track parse_track(const std::filesystem::path& path);

// Uniform time grid from the first point, stepping by step_minutes, always
// ending at the last point. Eye position and intensity interpolate linearly;
// central pressure only where both bracketing points carry it. Points that
// land exactly on an original timestamp are copied verbatim.
Track interpolate_track(const Track& track, int step_minutes);

// Great-circle (haversine) distance, mean Earth radius 6371.0 km.
double geodesic_km(double lat_a_deg, double lon_a_deg, double lat_b_deg, double lon_b_deg);

void write_towers_csv(const std::filesystem::path& path, std::span<const TowerRecord> towers);
void write_track_csv(const std::filesystem::path& path, const Track& track);

// 1 where a tower is in `state`, else 0; aligned with `towers`.
std::vector<std::uint8_t> state_flags(std::span<const TowerRecord> towers, DamageState state);

}  // namespace cyclofrag::ingest
