#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <unordered_set>
#include <vector>

#include "rexlab/common.hpp"

namespace rexlab {

inline constexpr double kDefaultSpeedKmh = 30.0;
// O(V^3) all-pairs is the intended regime; refuse anything bigger.
inline constexpr int kMaxApspNodes = 2000;
// Sentinel for unreachable pairs: distinct from every finite distance and
// poisons any arithmetic that touches a disconnected pair.
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct Node {
  int id = 0;
  double x_km = 0.0;
  double y_km = 0.0;
};

struct Edge {
  int u = 0;
  int v = 0;
  double distance_km = 0.0;
  std::optional<double> time_min;  // derived from distance and speed when absent
};

/// Geometric road graph. Node ids are contiguous from 0.
struct RoadNetwork {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  bool directed = false;

  int node_count() const { return static_cast<int>(nodes.size()); }

  void validate() const {
    std::vector<bool> seen(nodes.size(), false);
    for (const Node& n : nodes) {
      if (n.id < 0 || n.id >= node_count()) {
        throw validation_error("node id " + std::to_string(n.id) +
                               " is not contiguous from 0 (node count " +
                               std::to_string(node_count()) + ")");
      }
      if (seen[static_cast<std::size_t>(n.id)]) {
        throw validation_error("duplicate node id " + std::to_string(n.id));
      }
      seen[static_cast<std::size_t>(n.id)] = true;
    }
    for (const Edge& e : edges) {
      if (e.u < 0 || e.u >= node_count() || e.v < 0 || e.v >= node_count()) {
        throw validation_error("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                               " references a missing node");
      }
      if (!(e.distance_km > 0.0)) {
        throw validation_error("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                               " has non-positive distance");
      }
      if (e.time_min && !(*e.time_min > 0.0)) {
        throw validation_error("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                               " has non-positive time");
      }
    }
  }
};

/// Dense all-pairs shortest distances/times with path reconstruction.
struct DistanceMatrix {
  int n = 0;
  std::vector<double> dist_km;   // n*n, row-major
  std::vector<double> time_min;  // follows the distance-shortest path
  std::vector<int> next_hop;     // -1 when unreachable

  double dist(int i, int j) const { return dist_km[idx(i, j)]; }
  double time(int i, int j) const { return time_min[idx(i, j)]; }
  bool reachable(int i, int j) const { return std::isfinite(dist(i, j)); }

  void check_node(int i, const char* what) const {
    if (i < 0 || i >= n) {
      throw input_error(std::string(what) + " node " + std::to_string(i) + " outside [0, " +
                        std::to_string(n) + ")");
    }
  }

  void check_reachable(int i, int j) const {
    check_node(i, "origin");
    check_node(j, "destination");
    if (!reachable(i, j)) {
      throw routing_error("node " + std::to_string(j) + " is unreachable from node " +
                          std::to_string(i));
    }
  }

  /// Node sequence i..j along a shortest path.
  std::vector<int> path(int i, int j) const {
    check_reachable(i, j);
    std::vector<int> p{i};
    int cur = i;
    while (cur != j) {
      cur = next_hop[idx(cur, j)];
      p.push_back(cur);
    }
    return p;
  }

  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n + j; }
};

/// Connected rows x cols grid with per-axis coordinate jitter. Edge length is
/// the Euclidean distance between the jittered endpoints.
inline RoadNetwork generate_grid(int rows, int cols, double spacing_km, double jitter_fraction,
                                 std::uint64_t seed) {
  if (rows < 2 || cols < 2) throw input_error("generate_grid: rows and cols must be >= 2");
  if (!(spacing_km > 0.0)) throw input_error("generate_grid: spacing must be positive");
  if (jitter_fraction < 0.0 || jitter_fraction > 0.4) {
    throw input_error("generate_grid: jitter_fraction must be in [0, 0.4]");
  }

  Rng rng = make_rng(seed);
  RoadNetwork net;
  net.nodes.reserve(static_cast<std::size_t>(rows) * cols);
  const double j = jitter_fraction * spacing_km;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int id = r * cols + c;
      double x = c * spacing_km;
      double y = r * spacing_km;
      if (jitter_fraction > 0.0) {
        x += uniform_real(rng, -j, j);
        y += uniform_real(rng, -j, j);
      }
      net.nodes.push_back({id, x, y});
    }
  }
  auto euclid = [&](int a, int b) {
    const double dx = net.nodes[a].x_km - net.nodes[b].x_km;
    const double dy = net.nodes[a].y_km - net.nodes[b].y_km;
    return std::sqrt(dx * dx + dy * dy);
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int id = r * cols + c;
      if (c + 1 < cols) net.edges.push_back({id, id + 1, euclid(id, id + 1), std::nullopt});
      if (r + 1 < rows) net.edges.push_back({id, id + cols, euclid(id, id + cols), std::nullopt});
    }
  }
  net.validate();
  return net;
}

// CSV layouts: nodes `node_id,x_km,y_km`; edges `u,v,distance_km,time_min`
// with time_min optionally empty.
inline constexpr const char* kNodesCsvHeader = "node_id,x_km,y_km";
inline constexpr const char* kEdgesCsvHeader = "u,v,distance_km,time_min";

inline RoadNetwork load_network(std::istream& nodes_in, std::istream& edges_in,
                                bool directed = false) {
  RoadNetwork net;
  net.directed = directed;
  read_csv(nodes_in, kNodesCsvHeader, "nodes", [&](int line_no, const std::vector<std::string>& f) {
    const std::string where = "nodes line " + std::to_string(line_no);
    if (f.size() != 3) throw parse_error(where + ": expected 3 fields, got " + std::to_string(f.size()));
    Node n;
    n.id = static_cast<int>(parse_int(f[0], where));
    n.x_km = parse_double(f[1], where);
    n.y_km = parse_double(f[2], where);
    net.nodes.push_back(n);
  });
  read_csv(edges_in, kEdgesCsvHeader, "edges", [&](int line_no, const std::vector<std::string>& f) {
    const std::string where = "edges line " + std::to_string(line_no);
    if (f.size() != 4) throw parse_error(where + ": expected 4 fields, got " + std::to_string(f.size()));
    Edge e;
    e.u = static_cast<int>(parse_int(f[0], where));
    e.v = static_cast<int>(parse_int(f[1], where));
    e.distance_km = parse_double(f[2], where);
    if (!f[3].empty()) e.time_min = parse_double(f[3], where);
    net.edges.push_back(e);
  });
  net.validate();
  return net;
}

inline void save_network(const RoadNetwork& net, std::ostream& nodes_out,
                         std::ostream& edges_out) {
  nodes_out << kNodesCsvHeader << "\n";
  for (const Node& n : net.nodes) {
    nodes_out << n.id << ',' << double_to_string(n.x_km) << ',' << double_to_string(n.y_km)
              << "\n";
  }
  edges_out << kEdgesCsvHeader << "\n";
  for (const Edge& e : net.edges) {
    edges_out << e.u << ',' << e.v << ',' << double_to_string(e.distance_km) << ',';
    if (e.time_min) edges_out << double_to_string(*e.time_min);
    edges_out << "\n";
  }
}

/// Floyd-Warshall over the whole network. Distances drive the relaxations;
/// times ride along the distance-shortest paths. speed_kmh applies only to
/// edges without an explicit time.
inline DistanceMatrix all_pairs_shortest_paths(const RoadNetwork& net,
                                               double speed_kmh = kDefaultSpeedKmh) {
  net.validate();
  if (!(speed_kmh > 0.0)) throw input_error("all_pairs_shortest_paths: speed must be positive");
  const int n = net.node_count();
  if (n > kMaxApspNodes) {
    throw input_error("all_pairs_shortest_paths: " + std::to_string(n) + " nodes exceeds cap of " +
                      std::to_string(kMaxApspNodes));
  }

  DistanceMatrix m;
  m.n = n;
  m.dist_km.assign(static_cast<std::size_t>(n) * n, kUnreachable);
  m.time_min.assign(static_cast<std::size_t>(n) * n, kUnreachable);
  m.next_hop.assign(static_cast<std::size_t>(n) * n, -1);
  for (int i = 0; i < n; ++i) {
    m.dist_km[m.idx(i, i)] = 0.0;
    m.time_min[m.idx(i, i)] = 0.0;
    m.next_hop[m.idx(i, i)] = i;
  }
  auto relax_edge = [&](int u, int v, double d, double t) {
    const std::size_t k = m.idx(u, v);
    if (d < m.dist_km[k]) {
      m.dist_km[k] = d;
      m.time_min[k] = t;
      m.next_hop[k] = v;
    }
  };
  for (const Edge& e : net.edges) {
    const double t = e.time_min ? *e.time_min : e.distance_km / speed_kmh * 60.0;
    relax_edge(e.u, e.v, e.distance_km, t);
    if (!net.directed) relax_edge(e.v, e.u, e.distance_km, t);
  }

  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const double d_ik = m.dist_km[m.idx(i, k)];
      if (!std::isfinite(d_ik)) continue;
      const double t_ik = m.time_min[m.idx(i, k)];
      const int hop_ik = m.next_hop[m.idx(i, k)];
      const std::size_t row_k = m.idx(k, 0);
      const std::size_t row_i = m.idx(i, 0);
      for (int j = 0; j < n; ++j) {
        const double cand = d_ik + m.dist_km[row_k + j];
        if (cand < m.dist_km[row_i + j]) {
          m.dist_km[row_i + j] = cand;
          m.time_min[row_i + j] = t_ik + m.time_min[row_k + j];
          m.next_hop[row_i + j] = hop_ik;
        }
      }
    }
  }
  return m;
}

}  // namespace rexlab
