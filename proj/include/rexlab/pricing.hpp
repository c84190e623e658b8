#pragma once

#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <vector>

#include "rexlab/assignment.hpp"
#include "rexlab/roadnet.hpp"

namespace rexlab {

/// Synthetic fare and transit model. All constants are configurable; defaults
/// loosely mimic New York magnitudes.
struct FareConfig {
  double base_usd = 2.50;
  double per_km_usd = 1.56;
  double per_min_usd = 0.35;
  double bus_fare_usd = 2.50;
  double transit_time_factor = 1.6;
  double transit_wait_min = 8.0;
  double km_per_bus = 5.0;
  int max_buses = 3;
  double co2_kg_per_km = 0.192;
  double speed_kmh = 30.0;

  void validate() const {
    if (base_usd < 0 || per_km_usd < 0 || per_min_usd < 0) {
      throw input_error("FareConfig: fare components must be >= 0");
    }
    if (transit_time_factor < 1.0) throw input_error("FareConfig: transit_time_factor must be >= 1");
    if (transit_wait_min < 0) throw input_error("FareConfig: transit_wait_min must be >= 0");
    if (!(km_per_bus > 0)) throw input_error("FareConfig: km_per_bus must be positive");
    if (max_buses < 1) throw input_error("FareConfig: max_buses must be >= 1");
    if (co2_kg_per_km < 0) throw input_error("FareConfig: co2_kg_per_km must be >= 0");
    if (!(speed_kmh > 0)) throw input_error("FareConfig: speed_kmh must be positive");
  }
};

/// Per-passenger quotes for all three modes plus the CO2 saving.
struct TripQuote {
  double shared_cost_usd = 0.0;
  double shared_time_min = 0.0;
  double private_cost_usd = 0.0;
  double private_time_min = 0.0;
  double public_cost_usd = 0.0;
  double public_time_min = 0.0;
  double co2_saved_kg = 0.0;
};

struct Quote {
  double cost_usd = 0.0;
  double time_min = 0.0;
};

struct TransitQuote {
  double cost_usd = 0.0;
  double time_min = 0.0;
  int num_buses = 0;
};

/// Metered taxi: base + per-km + per-minute.
inline Quote private_quote(int origin, int dest, const DistanceMatrix& m, const FareConfig& cfg) {
  m.check_reachable(origin, dest);
  const double d = m.dist(origin, dest);
  const double t = m.time(origin, dest);
  return {cfg.base_usd + cfg.per_km_usd * d + cfg.per_min_usd * t, t};
}

/// Bus count is distance-bucketed and capped; time stretches driving time and
/// adds a fixed wait.
inline TransitQuote public_quote(int origin, int dest, const DistanceMatrix& m,
                                 const FareConfig& cfg) {
  m.check_reachable(origin, dest);
  const double d = m.dist(origin, dest);
  const double driving = m.time(origin, dest);
  const int buses = std::min(cfg.max_buses, 1 + static_cast<int>(std::floor(d / cfg.km_per_bus)));
  return {buses * cfg.bus_fare_usd, cfg.transit_time_factor * driving + cfg.transit_wait_min,
          buses};
}

/// Total price of the shared ride: the sum of per-leg taxi prices with the
/// base fare included only once.
inline double shared_total_cost(const VehicleRoute& route, const FareConfig& cfg) {
  double total = cfg.base_usd;
  for (const RouteLeg& leg : route.legs) {
    total += cfg.per_km_usd * leg.distance_km + cfg.per_min_usd * leg.time_min;
  }
  return total;
}

/// Proportional sharing: payment_i = f * c_i with f = total / sum(c_i).
inline std::vector<double> split_proportional(double total_shared_usd,
                                              const std::vector<double>& private_costs) {
  if (private_costs.empty()) throw input_error("split_proportional: no private costs");
  if (total_shared_usd < 0) throw input_error("split_proportional: negative total");
  double sum = 0.0;
  for (double c : private_costs) {
    if (!(c > 0)) throw input_error("split_proportional: private costs must be positive");
    sum += c;
  }
  const double f = total_shared_usd / sum;
  std::vector<double> payments;
  payments.reserve(private_costs.size());
  for (double c : private_costs) payments.push_back(f * c);
  return payments;
}

/// CO2 saving per passenger. The shared route's emissions are allocated in
/// proportion to each passenger's private distance, mirroring the cost split:
/// saved_i = rate * (private_i - g * private_i), g = route_km / sum(private).
inline std::map<int, double> co2_saved(const VehicleRoute& route,
                                       const std::map<int, double>& private_distances_km,
                                       const FareConfig& cfg) {
  double sum = 0.0;
  for (const auto& [pid, d] : private_distances_km) {
    if (d < 0) throw input_error("co2_saved: negative private distance");
    sum += d;
  }
  std::map<int, double> saved;
  if (sum <= 0.0) {
    for (const auto& [pid, d] : private_distances_km) saved[pid] = 0.0;
    return saved;
  }
  const double g = route.total_distance_km / sum;
  for (const auto& [pid, d] : private_distances_km) {
    saved[pid] = std::max(0.0, cfg.co2_kg_per_km * (d - g * d));
  }
  return saved;
}

// ---------------------------------------------------------------------------
// Flat key-value config file, one `key = value` per line; '#' comments.

inline FareConfig load_fare_config(std::istream& in) {
  FareConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    if (strip(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "fare config line " + std::to_string(line_no);
    if (eq == std::string::npos) throw parse_error(where + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key == "base_usd") cfg.base_usd = parse_double(value, where);
    else if (key == "per_km_usd") cfg.per_km_usd = parse_double(value, where);
    else if (key == "per_min_usd") cfg.per_min_usd = parse_double(value, where);
    else if (key == "bus_fare_usd") cfg.bus_fare_usd = parse_double(value, where);
    else if (key == "transit_time_factor") cfg.transit_time_factor = parse_double(value, where);
    else if (key == "transit_wait_min") cfg.transit_wait_min = parse_double(value, where);
    else if (key == "km_per_bus") cfg.km_per_bus = parse_double(value, where);
    else if (key == "max_buses") cfg.max_buses = static_cast<int>(parse_int(value, where));
    else if (key == "co2_kg_per_km") cfg.co2_kg_per_km = parse_double(value, where);
    else if (key == "speed_kmh") cfg.speed_kmh = parse_double(value, where);
    else throw parse_error(where + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

inline void save_fare_config(const FareConfig& cfg, std::ostream& out) {
  out << "base_usd = " << double_to_string(cfg.base_usd) << "\n"
      << "per_km_usd = " << double_to_string(cfg.per_km_usd) << "\n"
      << "per_min_usd = " << double_to_string(cfg.per_min_usd) << "\n"
      << "bus_fare_usd = " << double_to_string(cfg.bus_fare_usd) << "\n"
      << "transit_time_factor = " << double_to_string(cfg.transit_time_factor) << "\n"
      << "transit_wait_min = " << double_to_string(cfg.transit_wait_min) << "\n"
      << "km_per_bus = " << double_to_string(cfg.km_per_bus) << "\n"
      << "max_buses = " << cfg.max_buses << "\n"
      << "co2_kg_per_km = " << double_to_string(cfg.co2_kg_per_km) << "\n"
      << "speed_kmh = " << double_to_string(cfg.speed_kmh) << "\n";
}

}  // namespace rexlab
