#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "rexlab/roadnet.hpp"

namespace rexlab {

// Hard caps: the search is exponential by design.
inline constexpr int kMaxPartitionElements = 16;
inline constexpr int kMaxPassengers = 12;
inline constexpr int kMaxVehicleCapacity = 4;

struct RideRequest {
  int passenger_id = 0;
  int destination = 0;
};

struct RouteLeg {
  double distance_km = 0.0;
  double time_min = 0.0;
};

struct PassengerArrival {
  double ride_distance_km = 0.0;
  double ride_time_min = 0.0;
};

/// One vehicle: the passengers it carries, the stop order, and per-passenger
/// arrival data (prefix of the route up to that passenger's destination).
struct VehicleRoute {
  std::vector<int> passenger_ids;  // sorted
  std::vector<int> visit_order;    // one destination per passenger, duplicates kept
  std::vector<RouteLeg> legs;      // origin->d1, d1->d2, ...
  double total_distance_km = 0.0;
  std::map<int, PassengerArrival> per_passenger;
};

struct SearchStats {
  std::uint64_t partitions_visited = 0;
  std::size_t memo_entries = 0;
};

struct Assignment {
  std::vector<VehicleRoute> routes;
  double objective_km = 0.0;
  SearchStats stats;
};

namespace detail {

inline void check_partition_args(int n, int max_block) {
  if (n < 0 || n > kMaxPartitionElements) {
    throw input_error("partitions: n must be in [0, " + std::to_string(kMaxPartitionElements) +
                      "], got " + std::to_string(n));
  }
  if (max_block < 1) throw input_error("partitions: max_block must be >= 1");
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

// Canonical recursion: the lowest unplaced element leads the next block, and
// its companions are chosen among the remaining elements size-first, then in
// lexicographic member order.
template <typename Visitor>
void enumerate_partitions_rec(std::uint32_t remaining, int max_block,
                              std::vector<std::uint32_t>& blocks, Visitor& visit) {
  if (remaining == 0) {
    visit(std::span<const std::uint32_t>(blocks));
    return;
  }
  const int leader = std::countr_zero(remaining);
  const std::uint32_t rest = remaining & (remaining - 1);  // drop leader

  std::vector<int> pool;
  for (std::uint32_t bits = rest; bits != 0; bits &= bits - 1) {
    pool.push_back(std::countr_zero(bits));
  }
  const int pool_size = static_cast<int>(pool.size());

  std::vector<int> combo;
  for (int extra = 0; extra <= std::min(max_block - 1, pool_size); ++extra) {
    // lexicographic combinations of `extra` companions from pool
    combo.assign(static_cast<std::size_t>(extra), 0);
    for (int i = 0; i < extra; ++i) combo[static_cast<std::size_t>(i)] = i;
    while (true) {
      std::uint32_t block = std::uint32_t{1} << leader;
      for (int i = 0; i < extra; ++i) block |= std::uint32_t{1} << pool[combo[i]];
      blocks.push_back(block);
      enumerate_partitions_rec(remaining & ~block, max_block, blocks, visit);
      blocks.pop_back();

      if (extra == 0) break;
      int i = extra - 1;
      while (i >= 0 && combo[i] == pool_size - extra + i) --i;
      if (i < 0) break;
      ++combo[i];
      for (int k = i + 1; k < extra; ++k) combo[k] = combo[k - 1] + 1;
    }
  }
}

}  // namespace detail

/// Number of set partitions of n labeled elements into blocks of size up to
/// max_block: a(n) = sum_{k=1..max_block} C(n-1, k-1) * a(n-k), a(0) = 1.
inline std::uint64_t count_partitions(int n, int max_block) {
  detail::check_partition_args(n, max_block);
  std::vector<std::uint64_t> a(static_cast<std::size_t>(n) + 1, 0);
  a[0] = 1;
  for (int m = 1; m <= n; ++m) {
    for (int k = 1; k <= std::min(max_block, m); ++k) {
      a[m] += detail::binomial(m - 1, k - 1) * a[m - k];
    }
  }
  return a[static_cast<std::size_t>(n)];
}

/// Visits every bounded-block partition of {0..n-1} exactly once, in canonical
/// order (blocks led by their smallest element, ordered by leader). Blocks are
/// passed as bitmasks; the span is only valid during the call.
template <typename Visitor>
void enumerate_partitions(int n, int max_block, Visitor&& visit) {
  detail::check_partition_args(n, max_block);
  std::vector<std::uint32_t> blocks;
  const std::uint32_t all = n == 0 ? 0u : (n == 32 ? ~0u : (std::uint32_t{1} << n) - 1);
  detail::enumerate_partitions_rec(all, max_block, blocks, visit);
}

/// Materialized form, for small n.
inline std::vector<std::vector<std::vector<int>>> list_partitions(int n, int max_block) {
  std::vector<std::vector<std::vector<int>>> out;
  enumerate_partitions(n, max_block, [&](std::span<const std::uint32_t> blocks) {
    std::vector<std::vector<int>> part;
    for (std::uint32_t mask : blocks) {
      std::vector<int> block;
      for (std::uint32_t bits = mask; bits != 0; bits &= bits - 1) {
        block.push_back(std::countr_zero(bits));
      }
      part.push_back(std::move(block));
    }
    out.push_back(std::move(part));
  });
  return out;
}

/// Exhaustive open-path TSP over the block (at most 4! = 24 stop orders).
/// Ties go to the lexicographically smallest destination sequence.
inline VehicleRoute best_route_for_block(int origin, const std::vector<RideRequest>& block,
                                         const DistanceMatrix& m) {
  if (block.empty() || static_cast<int>(block.size()) > kMaxVehicleCapacity) {
    throw input_error("best_route_for_block: block size must be in [1, " +
                      std::to_string(kMaxVehicleCapacity) + "]");
  }
  m.check_node(origin, "origin");
  for (const RideRequest& r : block) m.check_reachable(origin, r.destination);

  // Permute (destination, passenger) pairs in lexicographic order so that the
  // first strict minimum is the canonical winner.
  std::vector<std::pair<int, int>> order;
  order.reserve(block.size());
  for (const RideRequest& r : block) order.emplace_back(r.destination, r.passenger_id);
  std::sort(order.begin(), order.end());

  std::vector<std::pair<int, int>> best_order;
  double best_dist = kUnreachable;
  do {
    double d = 0.0;
    int prev = origin;
    bool ok = true;
    for (const auto& [dest, pid] : order) {
      if (!m.reachable(prev, dest)) {
        ok = false;
        break;
      }
      d += m.dist(prev, dest);
      prev = dest;
    }
    if (ok && d < best_dist) {
      best_dist = d;
      best_order = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));

  if (best_order.empty()) {
    // every destination is reachable from the origin, so some leg between
    // destinations must be broken
    throw routing_error("best_route_for_block: no feasible stop order");
  }

  VehicleRoute route;
  for (const RideRequest& r : block) route.passenger_ids.push_back(r.passenger_id);
  std::sort(route.passenger_ids.begin(), route.passenger_ids.end());

  int prev = origin;
  double cum_dist = 0.0, cum_time = 0.0;
  for (const auto& [dest, pid] : best_order) {
    const double leg_d = m.dist(prev, dest);
    const double leg_t = m.time(prev, dest);
    cum_dist += leg_d;
    cum_time += leg_t;
    route.visit_order.push_back(dest);
    route.legs.push_back({leg_d, leg_t});
    route.per_passenger[pid] = {cum_dist, cum_time};
    prev = dest;
  }
  route.total_distance_km = cum_dist;
  return route;
}

/// Globally distance-optimal grouping of passengers into capacity-bounded
/// vehicles: the best open-path route of every destination subset is memoised,
/// then every partition is scanned in canonical order.
inline Assignment optimal_assignment(int origin, const std::vector<RideRequest>& requests,
                                     int capacity, const DistanceMatrix& m) {
  const int n = static_cast<int>(requests.size());
  if (n < 1 || n > kMaxPassengers) {
    throw input_error("optimal_assignment: passenger count must be in [1, " +
                      std::to_string(kMaxPassengers) + "], got " + std::to_string(n));
  }
  if (capacity < 1 || capacity > kMaxVehicleCapacity) {
    throw input_error("optimal_assignment: capacity must be in [1, " +
                      std::to_string(kMaxVehicleCapacity) + "]");
  }
  {
    std::vector<int> ids;
    for (const RideRequest& r : requests) ids.push_back(r.passenger_id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw input_error("optimal_assignment: duplicate passenger ids");
    }
  }

  Assignment result;

  // Best route per passenger subset; C(n,1..4) <= 793 entries at n = 12.
  std::vector<VehicleRoute> memo(std::size_t{1} << n);
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    if (std::popcount(mask) > capacity) continue;
    std::vector<RideRequest> block;
    for (std::uint32_t bits = mask; bits != 0; bits &= bits - 1) {
      block.push_back(requests[static_cast<std::size_t>(std::countr_zero(bits))]);
    }
    memo[mask] = best_route_for_block(origin, block, m);
    ++result.stats.memo_entries;
  }

  std::vector<std::uint32_t> best_blocks;
  double best_objective = kUnreachable;
  enumerate_partitions(n, capacity, [&](std::span<const std::uint32_t> blocks) {
    ++result.stats.partitions_visited;
    double objective = 0.0;
    for (std::uint32_t mask : blocks) objective += memo[mask].total_distance_km;
    if (objective < best_objective) {
      best_objective = objective;
      best_blocks.assign(blocks.begin(), blocks.end());
    }
  });

  for (std::uint32_t mask : best_blocks) result.routes.push_back(memo[mask]);
  result.objective_km = best_objective;
  return result;
}

// requests CSV: header `passenger_id,destination_node`.
inline constexpr const char* kRequestsCsvHeader = "passenger_id,destination_node";

inline std::vector<RideRequest> load_requests(std::istream& in) {
  std::vector<RideRequest> reqs;
  read_csv(in, kRequestsCsvHeader, "requests", [&](int line_no, const std::vector<std::string>& f) {
    const std::string where = "requests line " + std::to_string(line_no);
    if (f.size() != 2) throw parse_error(where + ": expected 2 fields, got " + std::to_string(f.size()));
    RideRequest r;
    r.passenger_id = static_cast<int>(parse_int(f[0], where));
    r.destination = static_cast<int>(parse_int(f[1], where));
    reqs.push_back(r);
  });
  return reqs;
}

inline void save_requests(const std::vector<RideRequest>& reqs, std::ostream& out) {
  out << kRequestsCsvHeader << "\n";
  for (const RideRequest& r : reqs) out << r.passenger_id << ',' << r.destination << "\n";
}

}  // namespace rexlab
