#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "fdqn/env.hpp"
#include "fdqn/grid.hpp"

namespace fdqn {

using Path = std::vector<Cell>;

// Shortest 4-connected path over Free cells, uniform edge cost. Unknown and
// Occupied cells are non-traversable. Expansion order (distance, row, col)
// keeps ties deterministic. Returns nullopt when no path exists.
inline std::optional<Path> plan(const OccupancyGrid& map, Cell from, Cell to) {
  if (!map.in_bounds(from) || map.at(from) != CellState::Free) {
    throw std::invalid_argument("plan: start cell must be Free");
  }
  if (!map.in_bounds(to)) return std::nullopt;
  if (map.at(to) != CellState::Free) return std::nullopt;
  if (from == to) return Path{from};

  const int w = map.width();
  const int h = map.height();
  const int n = w * h;
  std::vector<int> dist(n, std::numeric_limits<int>::max());
  std::vector<int> parent(n, -1);
  auto id = [w](Cell c) { return c.row * w + c.col; };

  using Node = std::tuple<int, int, int>;  // dist, row, col
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
  dist[id(from)] = 0;
  open.emplace(0, from.row, from.col);
  const int dr4[] = {-1, 0, 0, 1};
  const int dc4[] = {0, -1, 1, 0};
  while (!open.empty()) {
    auto [d, r, c] = open.top();
    open.pop();
    const int cur = r * w + c;
    if (d > dist[cur]) continue;
    if (r == to.row && c == to.col) break;
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr4[k];
      const int nc = c + dc4[k];
      if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
      if (map.at(nr, nc) != CellState::Free) continue;
      const int nid = nr * w + nc;
      if (d + 1 < dist[nid]) {
        dist[nid] = d + 1;
        parent[nid] = cur;
        open.emplace(d + 1, nr, nc);
      }
    }
  }
  if (dist[id(to)] == std::numeric_limits<int>::max()) return std::nullopt;

  Path path;
  for (int cur = id(to); cur != -1; cur = parent[cur]) {
    path.push_back(Cell{cur / w, cur % w});
  }
  std::reverse(path.begin(), path.end());
  return path;
}

struct EulerAngles {
  double roll = 0.0;   // about x
  double pitch = 0.0;  // about y
  double yaw = 0.0;    // about z
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

// Rz(yaw) * Ry(pitch) * Rx(roll).
inline Matrix3 euler_rotation(const EulerAngles& angles) {
  const double cr = std::cos(angles.roll), sr = std::sin(angles.roll);
  const double cp = std::cos(angles.pitch), sp = std::sin(angles.pitch);
  const double cy = std::cos(angles.yaw), sy = std::sin(angles.yaw);
  const Matrix3 rx{{{1, 0, 0}, {0, cr, -sr}, {0, sr, cr}}};
  const Matrix3 ry{{{cp, 0, sp}, {0, 1, 0}, {-sp, 0, cp}}};
  const Matrix3 rz{{{cy, -sy, 0}, {sy, cy, 0}, {0, 0, 1}}};
  auto mul = [](const Matrix3& a, const Matrix3& b) {
    Matrix3 out{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k) acc += a[i][k] * b[k][j];
        out[i][j] = acc;
      }
    }
    return out;
  };
  return mul(rz, mul(ry, rx));
}

enum class GoalOutcome { Reached, Resent, Unreachable };

struct DispatchResult {
  GoalOutcome outcome = GoalOutcome::Unreachable;
  long ticks = 0;
  int resends = 0;
  bool truncated = false;  // tick budget ran out mid-path
};

// Plans to the goal and walks the path. On a planning failure the goal is
// resent once when the robot still sits within 2.0 units of the position the
// plan started from; a second failure (or a distant robot) is Unreachable.
inline DispatchResult dispatch_goal(Environment& env, Cell goal,
                                    std::pair<double, double> initial_plan_position,
                                    long max_ticks = -1) {
  DispatchResult result;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::optional<Path> path = plan(env.map(), env.pose().cell(), goal);
    if (path) {
      const long wanted = static_cast<long>(path->size()) - 1;
      result.ticks = env.walk(*path, max_ticks);
      result.truncated = max_ticks >= 0 && result.ticks < wanted;
      result.outcome = attempt == 0 ? GoalOutcome::Reached : GoalOutcome::Resent;
      return result;
    }
    if (attempt == 1) break;
    const double d = euclidean_distance(env.pose().x, env.pose().y, initial_plan_position.first,
                                        initial_plan_position.second);
    if (d > 2.0) break;
    result.resends = 1;
  }
  result.outcome = GoalOutcome::Unreachable;
  return result;
}

}  // namespace fdqn
