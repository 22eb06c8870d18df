#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "hapsris/config.hpp"
#include "hapsris/rng.hpp"

namespace hapsris {

struct Position {
  double x = 0.0;
  double y = 0.0;
  double h = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

inline double distance_3d(const Position& a, const Position& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.h - b.h) * (a.h - b.h));
}

inline double distance_2d(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Topology {
  std::vector<Position> ues;
  std::vector<Position> bs_sites;
  Position haps_pos;
  Position cs_pos;
};

class PackingInfeasible : public std::runtime_error {
 public:
  PackingInfeasible() : std::runtime_error("packing infeasible") {}
};

inline constexpr std::size_t kMaxRejectionAttempts = 1'000'000;

/// Uniform UE drop over the square by rejection sampling against the minimum
/// horizontal separation. Gives up after kMaxRejectionAttempts draws in total.
inline std::vector<Position> generate_ues(const NetworkConfig& config, Rng& rng) {
  std::uniform_real_distribution<double> coord(0.0, config.area_side_m);
  const double min_sep2 = config.min_ue_separation_m * config.min_ue_separation_m;
  std::vector<Position> ues;
  ues.reserve(static_cast<std::size_t>(config.num_ues));
  std::size_t attempts = 0;
  while (ues.size() < static_cast<std::size_t>(config.num_ues)) {
    if (++attempts > kMaxRejectionAttempts) throw PackingInfeasible{};
    const Position cand{coord(rng), coord(rng), config.ue_height_m};
    bool ok = true;
    for (const auto& u : ues) {
      const double dx = u.x - cand.x, dy = u.y - cand.y;
      if (dx * dx + dy * dy < min_sep2) {
        ok = false;
        break;
      }
    }
    if (ok) ues.push_back(cand);
  }
  return ues;
}

struct LloydResult {
  std::vector<Position> centroids;  // height 0; caller assigns site height
  std::vector<int> assignment;
  std::vector<double> objective_history;  // sum of squared distances per iteration
  int iterations = 0;
};

namespace detail {

inline double sq_dist_2d(const Position& a, const Position& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline int nearest(const Position& p, std::span<const Position> centers) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = sq_dist_2d(p, centers[c]);
    if (d < best_d) {  // strict: lowest index wins ties
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

inline double kmeans_objective(std::span<const Position> pts, std::span<const Position> centers,
                               std::span<const int> assign) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) s += sq_dist_2d(pts[i], centers[static_cast<std::size_t>(assign[i])]);
  return s;
}

/// k-means++ style seeding: first centre uniform, the rest drawn with
/// probability proportional to squared distance to the nearest chosen centre.
inline std::vector<Position> seed_centers(std::span<const Position> pts, int k, Rng& rng) {
  std::vector<Position> centers;
  centers.reserve(static_cast<std::size_t>(k));
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  centers.push_back(pts[pick(rng)]);
  std::vector<double> d2(pts.size());
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) d2[i] = std::min(d2[i], sq_dist_2d(pts[i], c));
      total += d2[i];
    }
    std::size_t chosen = 0;
    if (total <= 0.0) {
      // All remaining points coincide with a centre.
      chosen = pick(rng);
    } else {
      double r = u01(rng) * total;
      chosen = pts.size() - 1;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        r -= d2[i];
        if (r < 0.0 && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
      while (d2[chosen] <= 0.0 && chosen > 0) --chosen;
    }
    centers.push_back(pts[chosen]);
  }
  return centers;
}

}  // namespace detail

/// Lloyd's algorithm on the horizontal UE coordinates.
///
/// Stops when the assignment no longer changes or every centroid moves less
/// than 1e-6 m. An emptied cluster is re-seeded at the UE farthest from its
/// current centroid, so exactly `k` sites always come back.
inline LloydResult lloyd_kmeans(std::span<const Position> pts, int k, Rng& rng, int max_iterations = 1000) {
  if (k < 1 || static_cast<std::size_t>(k) > pts.size())
    throw std::invalid_argument("lloyd_kmeans: need 1 <= k <= number of points");

  LloydResult res;
  res.centroids = detail::seed_centers(pts, k, rng);
  res.assignment.assign(pts.size(), -1);

  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const int c = detail::nearest(pts[i], res.centroids);
      if (c != res.assignment[i]) {
        res.assignment[i] = c;
        changed = true;
      }
    }

    std::vector<Position> next(static_cast<std::size_t>(k));
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto& n = next[static_cast<std::size_t>(res.assignment[i])];
      n.x += pts[i].x;
      n.y += pts[i].y;
      ++count[static_cast<std::size_t>(res.assignment[i])];
    }
    for (int c = 0; c < k; ++c) {
      auto& n = next[static_cast<std::size_t>(c)];
      const int m = count[static_cast<std::size_t>(c)];
      if (m > 0) {
        n.x /= m;
        n.y /= m;
        continue;
      }
      // Empty cluster repair.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = detail::sq_dist_2d(pts[i], res.centroids[static_cast<std::size_t>(res.assignment[i])]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      n = Position{pts[far].x, pts[far].y, 0.0};
      res.assignment[far] = c;
      changed = true;
    }

    double shift = 0.0;
    for (int c = 0; c < k; ++c)
      shift = std::max(shift, std::sqrt(detail::sq_dist_2d(next[static_cast<std::size_t>(c)],
                                                           res.centroids[static_cast<std::size_t>(c)])));
    res.centroids = std::move(next);
    res.iterations = it + 1;
    res.objective_history.push_back(detail::kmeans_objective(pts, res.centroids, res.assignment));
    if (!changed || shift < 1e-6) break;
  }
  for (auto& c : res.centroids) c.h = 0.0;
  return res;
}

/// BS sites at the converged k-means centroids, raised to the BS height.
inline std::vector<Position> place_bs_lloyd(std::span<const Position> ues, int num_bs, double bs_height_m, Rng& rng) {
  if (num_bs == 0) return {};
  auto res = lloyd_kmeans(ues, num_bs, rng);
  for (auto& c : res.centroids) c.h = bs_height_m;
  return res.centroids;
}

/// Full topology for (config, seed). Each stage draws from its own substream.
inline Topology generate_topology(const NetworkConfig& config, std::uint64_t seed) {
  Topology t;
  Rng ue_rng = make_stream(seed, {kStreamUes});
  t.ues = generate_ues(config, ue_rng);
  Rng bs_rng = make_stream(seed, {kStreamLloyd});
  t.bs_sites = place_bs_lloyd(t.ues, config.num_bs, config.bs_height_m, bs_rng);
  t.haps_pos = Position{config.area_side_m / 2.0, config.area_side_m / 2.0, config.haps_altitude_m};
  t.cs_pos = Position{config.cs_x(), config.cs_y(), config.cs_height_m};
  return t;
}

}  // namespace hapsris
