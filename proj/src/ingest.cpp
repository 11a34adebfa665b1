#include "cyclofrag/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "cyclofrag/csv.hpp"
#include "cyclofrag/errors.hpp"
#include "cyclofrag/log.hpp"

namespace cyclofrag::ingest {

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double parse_number(const std::string& text, const std::string& context) {
  if (text.empty()) throw IngestError(context + ": empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(v))
    throw IngestError(context + ": not a number: '" + text + "'");
  return v;
}

void validate_tower(TowerRecord& t, const std::string& context,
                    std::unordered_set<std::string>& seen_ids) {
  if (t.id.empty()) throw IngestError(context + ": empty id");
  if (!seen_ids.insert(t.id).second)
    throw IngestError(context + ": duplicate id '" + t.id + "'");
  if (!(t.lat_deg >= -90.0 && t.lat_deg <= 90.0))
    throw IngestError("latitude out of range at " + context);
  if (!(t.lon_deg >= -180.0 && t.lon_deg <= 180.0))
    throw IngestError("longitude out of range at " + context);
  if (t.height_m && !(*t.height_m > 0.0))
    throw IngestError(context + ": height_m must be positive");
  if (t.voltage_kv && !(*t.voltage_kv > 0.0))
    throw IngestError(context + ": voltage_kv must be positive");
}

// Howard Hinnant's civil-date algorithms; avoids locale and timezone state.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

}  // namespace

bool in_state(Damage damage, DamageState state) {
  if (state == DamageState::Collapse) return damage == Damage::Collapse;
  return damage == Damage::Partial || damage == Damage::Collapse;
}

Damage parse_damage_label(std::string_view label) {
  const std::string l = lower(label);
  if (l == "none") return Damage::None;
  if (l == "partial") return Damage::Partial;
  if (l == "collapse") return Damage::Collapse;
  throw IngestError("unknown damage label '" + std::string(label) +
                    "' (expected none|partial|collapse)");
}

std::string_view damage_label(Damage damage) {
  switch (damage) {
    case Damage::None: return "none";
    case Damage::Partial: return "partial";
    case Damage::Collapse: return "collapse";
  }
  return "none";
}

std::int64_t parse_iso8601_utc(std::string_view text) {
  int y = 0, hh = 0, mm = 0, ss = 0;
  unsigned mo = 0, dd = 0;
  char sep = 0;
  char tail[8] = {0};
  std::string s(text);
  int n = std::sscanf(s.c_str(), "%d-%u-%u%c%d:%d:%d%7s", &y, &mo, &dd, &sep, &hh, &mm, &ss, tail);
  if (n < 6) throw IngestError("invalid timestamp '" + s + "' (expected ISO-8601 UTC)");
  if (sep != 'T' && sep != ' ')
    throw IngestError("invalid timestamp '" + s + "' (expected 'T' or ' ' separator)");
  if (n == 6) ss = 0;
  if (n == 8 && !(tail[0] == 'Z' && tail[1] == 0))
    throw IngestError("invalid timestamp '" + s + "' (only 'Z' suffix supported)");
  if (mo < 1 || mo > 12 || dd < 1 || dd > 31 || hh < 0 || hh > 23 || mm < 0 || mm > 59 ||
      ss < 0 || ss > 60)
    throw IngestError("timestamp field out of range in '" + s + "'");
  return days_from_civil(y, mo, dd) * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_iso8601_utc(std::int64_t utc_seconds) {
  std::int64_t days = utc_seconds / 86400;
  std::int64_t sod = utc_seconds % 86400;
  if (sod < 0) {
    sod += 86400;
    --days;
  }
  int y = 0;
  unsigned mo = 0, dd = 0;
  civil_from_days(days, y, mo, dd);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, mo, dd,
                static_cast<long long>(sod / 3600), static_cast<long long>((sod % 3600) / 60),
                static_cast<long long>(sod % 60));
  return buf;
}

namespace {

std::vector<TowerRecord> parse_towers_csv(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  const std::string p = path.string();
  const auto c_id = table.require_column("id", p);
  const auto c_lat = table.require_column("lat_deg", p);
  const auto c_lon = table.require_column("lon_deg", p);
  const auto c_height = table.column("height_m");
  const auto c_voltage = table.column("voltage_kv");
  const auto c_damage = table.require_column("damage", p);

  std::vector<TowerRecord> towers;
  towers.reserve(table.rows.size());
  std::unordered_set<std::string> seen_ids;
  seen_ids.reserve(table.rows.size());

  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string context = p + ": row " + std::to_string(table.line_numbers[i]);
    const std::size_t needed =
        std::max({c_id, c_lat, c_lon, c_damage, c_height.value_or(0), c_voltage.value_or(0)});
    if (row.size() <= needed)
      throw IngestError(context + ": expected " + std::to_string(needed + 1) +
                        " fields, got " + std::to_string(row.size()));
    TowerRecord t;
    t.id = row[c_id];
    t.lat_deg = parse_number(row[c_lat], context + " field lat_deg");
    t.lon_deg = parse_number(row[c_lon], context + " field lon_deg");
    if (c_height && !row[*c_height].empty())
      t.height_m = parse_number(row[*c_height], context + " field height_m");
    if (c_voltage && !row[*c_voltage].empty())
      t.voltage_kv = parse_number(row[*c_voltage], context + " field voltage_kv");
    try {
      t.damage = parse_damage_label(row[c_damage]);
    } catch (const IngestError& e) {
      throw IngestError(context + " field damage: " + e.what());
    }
    validate_tower(t, context, seen_ids);
    towers.push_back(std::move(t));
  }
  return towers;
}

std::vector<TowerRecord> parse_towers_geojson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.contains("features") || !doc["features"].is_array())
    throw IngestError(path.string() + ": not a GeoJSON FeatureCollection");

  std::vector<TowerRecord> towers;
  towers.reserve(doc["features"].size());
  std::unordered_set<std::string> seen_ids;

  std::size_t index = 0;
  for (const auto& feature : doc["features"]) {
    const std::string context = path.string() + ": feature " + std::to_string(index);
    ++index;
    const auto& geometry = feature.value("geometry", nlohmann::json::object());
    if (geometry.value("type", "") != std::string("Point"))
      throw IngestError(context + ": geometry must be a Point");
    const auto& coords = geometry.value("coordinates", nlohmann::json::array());
    if (!coords.is_array() || coords.size() < 2)
      throw IngestError(context + ": Point needs [lon, lat] coordinates");
    const auto& props = feature.value("properties", nlohmann::json::object());

    TowerRecord t;
    t.lon_deg = coords[0].get<double>();
    t.lat_deg = coords[1].get<double>();
    if (!props.contains("id")) throw IngestError(context + ": missing property 'id'");
    t.id = props["id"].is_string() ? props["id"].get<std::string>() : props["id"].dump();
    if (props.contains("height_m") && !props["height_m"].is_null())
      t.height_m = props["height_m"].get<double>();
    if (props.contains("voltage_kv") && !props["voltage_kv"].is_null())
      t.voltage_kv = props["voltage_kv"].get<double>();
    if (!props.contains("damage")) throw IngestError(context + ": missing property 'damage'");
    try {
      t.damage = parse_damage_label(props["damage"].get<std::string>());
    } catch (const IngestError& e) {
      throw IngestError(context + ": " + e.what());
    }
    validate_tower(t, context, seen_ids);
    towers.push_back(std::move(t));
  }
  return towers;
}

}  // namespace

std::vector<TowerRecord> parse_towers(const std::filesystem::path& path, TowersFormat format) {
  auto towers = format == TowersFormat::Csv ? parse_towers_csv(path) : parse_towers_geojson(path);
  log::info("parsed " + std::to_string(towers.size()) + " towers from " + path.string());
  return towers;
}

Track parse_track(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  const std::string p = path.string();
  const auto c_time = table.require_column("timestamp", p);
  const auto c_lat = table.require_column("eye_lat_deg", p);
  const auto c_lon = table.require_column("eye_lon_deg", p);
  const auto c_vmax = table.require_column("vmax_3min_10m_kmh", p);
  const auto c_pressure = table.column("central_pressure_hpa");

  Track track;
  track.points.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string context = p + ": row " + std::to_string(table.line_numbers[i]);
    const std::size_t needed = std::max({c_time, c_lat, c_lon, c_vmax});
    if (row.size() <= needed)
      throw IngestError(context + ": expected " + std::to_string(needed + 1) +
                        " fields, got " + std::to_string(row.size()));
    TrackPoint pt;
    pt.time_utc_s = parse_iso8601_utc(row[c_time]);
    pt.eye_lat_deg = parse_number(row[c_lat], context + " field eye_lat_deg");
    pt.eye_lon_deg = parse_number(row[c_lon], context + " field eye_lon_deg");
    if (row[c_vmax].empty())
      throw IngestError(context + ": missing vmax_3min_10m_kmh");
    pt.vmax_kmh = parse_number(row[c_vmax], context + " field vmax_3min_10m_kmh");
    if (!(pt.vmax_kmh > 0.0)) throw IngestError(context + ": nonpositive intensity");
    if (!(pt.eye_lat_deg >= -90.0 && pt.eye_lat_deg <= 90.0))
      throw IngestError("latitude out of range at " + context);
    if (!(pt.eye_lon_deg >= -180.0 && pt.eye_lon_deg <= 180.0))
      throw IngestError("longitude out of range at " + context);
    if (c_pressure && !row[*c_pressure].empty())
      pt.central_pressure_hpa = parse_number(row[*c_pressure], context + " field central_pressure_hpa");
    if (!track.points.empty() && pt.time_utc_s <= track.points.back().time_utc_s)
      throw IngestError(context + ": timestamps must be strictly increasing");
    track.points.push_back(pt);
  }
  if (track.points.size() < 2)
    throw IngestError(p + ": a track needs at least 2 points");
  return track;
}

Track interpolate_track(const Track& track, int step_minutes) {
  if (step_minutes <= 0) throw IngestError("interpolate_track: step_minutes must be positive");
  if (track.points.size() < 2) throw IngestError("interpolate_track: track needs at least 2 points");

  const std::int64_t step_s = static_cast<std::int64_t>(step_minutes) * 60;
  const std::int64_t t0 = track.points.front().time_utc_s;
  const std::int64_t t_end = track.points.back().time_utc_s;

  Track out;
  out.points.reserve(static_cast<std::size_t>((t_end - t0) / step_s) + 2);
  std::size_t seg = 0;
  for (std::int64_t t = t0;; t += step_s) {
    if (t > t_end) t = t_end;
    while (seg + 2 < track.points.size() && track.points[seg + 1].time_utc_s <= t) ++seg;
    const TrackPoint& a = track.points[seg];
    const TrackPoint& b = track.points[seg + 1];
    if (t == a.time_utc_s) {
      out.points.push_back(a);
    } else if (t == b.time_utc_s) {
      out.points.push_back(b);
    } else {
      const double f = static_cast<double>(t - a.time_utc_s) /
                       static_cast<double>(b.time_utc_s - a.time_utc_s);
      TrackPoint pt;
      pt.time_utc_s = t;
      pt.eye_lat_deg = a.eye_lat_deg + f * (b.eye_lat_deg - a.eye_lat_deg);
      pt.eye_lon_deg = a.eye_lon_deg + f * (b.eye_lon_deg - a.eye_lon_deg);
      pt.vmax_kmh = a.vmax_kmh + f * (b.vmax_kmh - a.vmax_kmh);
      if (a.central_pressure_hpa && b.central_pressure_hpa)
        pt.central_pressure_hpa =
            *a.central_pressure_hpa + f * (*b.central_pressure_hpa - *a.central_pressure_hpa);
      out.points.push_back(pt);
    }
    if (t == t_end) break;
  }
  return out;
}

double geodesic_km(double lat_a_deg, double lon_a_deg, double lat_b_deg, double lon_b_deg) {
  const double lat_a = lat_a_deg * kDegToRad;
  const double lat_b = lat_b_deg * kDegToRad;
  const double dlat = (lat_b_deg - lat_a_deg) * kDegToRad;
  const double dlon = (lon_b_deg - lon_a_deg) * kDegToRad;
  const double sa = std::sin(0.5 * dlat);
  const double so = std::sin(0.5 * dlon);
  const double h = sa * sa + std::cos(lat_a) * std::cos(lat_b) * so * so;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

void write_towers_csv(const std::filesystem::path& path, std::span<const TowerRecord> towers) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write file: " + path.string());
  out << "id,lat_deg,lon_deg,height_m,voltage_kv,damage\n";
  for (const auto& t : towers) {
    out << t.id << ',' << csv::format_double(t.lat_deg) << ',' << csv::format_double(t.lon_deg)
        << ',' << (t.height_m ? csv::format_double(*t.height_m) : "") << ','
        << (t.voltage_kv ? csv::format_double(*t.voltage_kv) : "") << ',' << damage_label(t.damage)
        << '\n';
  }
}

void write_track_csv(const std::filesystem::path& path, const Track& track) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write file: " + path.string());
  out << "timestamp,eye_lat_deg,eye_lon_deg,vmax_3min_10m_kmh,central_pressure_hpa\n";
  for (const auto& pt : track.points) {
    out << format_iso8601_utc(pt.time_utc_s) << ',' << csv::format_double(pt.eye_lat_deg) << ','
        << csv::format_double(pt.eye_lon_deg) << ',' << csv::format_double(pt.vmax_kmh) << ','
        << (pt.central_pressure_hpa ? csv::format_double(*pt.central_pressure_hpa) : "") << '\n';
  }
}

std::vector<std::uint8_t> state_flags(std::span<const TowerRecord> towers, DamageState state) {
  std::vector<std::uint8_t> flags(towers.size());
  for (std::size_t i = 0; i < towers.size(); ++i)
    flags[i] = in_state(towers[i].damage, state) ? 1 : 0;
  return flags;
}

}  // namespace cyclofrag::ingest
