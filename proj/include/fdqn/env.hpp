#pragma once

#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <vector>

#include "fdqn/grid.hpp"

namespace fdqn {

struct SensorConfig {
  int range = 6;      // cells
  int ray_count = 72;  // equally spaced rays

  void validate() const {
    if (range < 1) throw std::invalid_argument("sensor range must be >= 1");
    if (ray_count < 8) throw std::invalid_argument("sensor ray_count must be >= 8");
  }
};

// Perfect range sensor: casts ray_count rays from the pose, sampling the line
// every 0.25 cells. Traversed cells become Free in the robot map; the first
// occupied truth cell blocks the ray and is marked Occupied.
inline void sense(const OccupancyGrid& truth, OccupancyGrid& map, const RobotPose& pose,
                  const SensorConfig& cfg) {
  cfg.validate();
  const int steps = static_cast<int>(std::lround(cfg.range / 0.25));
  for (int k = 0; k < cfg.ray_count; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / cfg.ray_count;
    const double dx = std::cos(theta);
    const double dy = std::sin(theta);
    for (int i = 0; i <= steps; ++i) {
      const double t = 0.25 * i;
      const int col = static_cast<int>(std::lround(pose.x + t * dx));
      const int row = static_cast<int>(std::lround(pose.y + t * dy));
      if (!truth.in_bounds(row, col)) break;
      if (truth.at(row, col) == CellState::Occupied) {
        map.set(row, col, CellState::Occupied);
        break;
      }
      map.set(row, col, CellState::Free);
    }
  }
}

struct StepResult {
  RobotPose pose;
  long ticks = 0;
};

// Advances one cell per tick along a 4-adjacent path of map-Free cells,
// sensing after every tick. Walking into an occupied truth cell is a
// collision. max_ticks < 0 means unlimited.
inline StepResult step_along(const OccupancyGrid& truth, OccupancyGrid& map,
                             const SensorConfig& cfg, const std::vector<Cell>& path,
                             RobotPose pose, long max_ticks = -1) {
  if (path.empty()) throw std::invalid_argument("path must be nonempty");
  if (path.front() != pose.cell()) {
    throw std::invalid_argument("path must start at the current cell");
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!map.in_bounds(path[i])) throw std::invalid_argument("path leaves the grid");
    if (map.at(path[i]) != CellState::Free) {
      throw std::invalid_argument("path cell is not Free in the robot map");
    }
    if (i > 0) {
      const int dr = std::abs(path[i].row - path[i - 1].row);
      const int dc = std::abs(path[i].col - path[i - 1].col);
      if (dr + dc != 1) throw std::invalid_argument("path cells must be 4-adjacent");
    }
  }

  long ticks = 0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (max_ticks >= 0 && ticks >= max_ticks) break;
    const Cell from = path[i - 1];
    const Cell to = path[i];
    if (truth.at(to) == CellState::Occupied) {
      throw std::runtime_error("collision: path enters an occupied cell");
    }
    const double yaw = std::atan2(static_cast<double>(to.row - from.row),
                                  static_cast<double>(to.col - from.col));
    pose.x = static_cast<double>(to.col);
    pose.y = static_cast<double>(to.row);
    pose.orientation = quaternion_from_yaw(yaw);
    ++ticks;
    sense(truth, map, pose, cfg);
  }
  return StepResult{pose, ticks};
}

// Known-cell ratio over the cells that matter: truth-free cells reachable
// from the seed by 4-connected moves, plus occupied cells touching that
// region (8-adjacency, since rays can strike walls diagonally).
inline double coverage(const OccupancyGrid& map, const OccupancyGrid& truth, Cell seed) {
  if (map.width() != truth.width() || map.height() != truth.height()) {
    throw std::invalid_argument("coverage: grid dimensions differ");
  }
  if (!truth.in_bounds(seed) || truth.at(seed) != CellState::Free) {
    throw std::invalid_argument("coverage: seed must be a free truth cell");
  }

  std::vector<char> reachable(truth.size(), 0);
  std::queue<Cell> frontier;
  frontier.push(seed);
  reachable[static_cast<std::size_t>(seed.row) * truth.width() + seed.col] = 1;
  const int dr4[] = {-1, 1, 0, 0};
  const int dc4[] = {0, 0, -1, 1};
  while (!frontier.empty()) {
    const Cell cur = frontier.front();
    frontier.pop();
    for (int d = 0; d < 4; ++d) {
      const int r = cur.row + dr4[d];
      const int c = cur.col + dc4[d];
      if (!truth.in_bounds(r, c) || truth.at(r, c) != CellState::Free) continue;
      std::size_t idx = static_cast<std::size_t>(r) * truth.width() + c;
      if (!reachable[idx]) {
        reachable[idx] = 1;
        frontier.push(Cell{r, c});
      }
    }
  }

  long counted = 0;
  long known = 0;
  for (int r = 0; r < truth.height(); ++r) {
    for (int c = 0; c < truth.width(); ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * truth.width() + c;
      bool in_set = false;
      if (truth.at(r, c) == CellState::Free) {
        in_set = reachable[idx] != 0;
      } else {
        for (int dr = -1; dr <= 1 && !in_set; ++dr) {
          for (int dc = -1; dc <= 1 && !in_set; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const int nr = r + dr;
            const int nc = c + dc;
            if (truth.in_bounds(nr, nc) && truth.at(nr, nc) == CellState::Free &&
                reachable[static_cast<std::size_t>(nr) * truth.width() + nc]) {
              in_set = true;
            }
          }
        }
      }
      if (in_set) {
        ++counted;
        if (map.at(r, c) != CellState::Unknown) ++known;
      }
    }
  }
  if (counted == 0) return 0.0;
  return static_cast<double>(known) / static_cast<double>(counted);
}

// Owns the ground truth, the robot's evolving map and pose, and the tick
// counter. One instance per episode; not safe for concurrent mutation.
class Environment {
 public:
  Environment(LoadedMap loaded, SensorConfig cfg = {})
      : truth_(std::move(loaded.truth)),
        map_(truth_.width(), truth_.height(), CellState::Unknown),
        pose_(loaded.start),
        sensor_(cfg),
        start_(loaded.start.cell()) {
    sensor_.validate();
    if (!truth_.in_bounds(start_) || truth_.at(start_) != CellState::Free) {
      throw std::invalid_argument("start pose must sit on a free truth cell");
    }
  }

  const OccupancyGrid& truth() const { return truth_; }
  const OccupancyGrid& map() const { return map_; }
  OccupancyGrid& map() { return map_; }
  const RobotPose& pose() const { return pose_; }
  const SensorConfig& sensor() const { return sensor_; }
  Cell start() const { return start_; }
  long ticks() const { return ticks_; }

  void sense_now() { sense(truth_, map_, pose_, sensor_); }

  long walk(const std::vector<Cell>& path, long max_ticks = -1) {
    StepResult r = step_along(truth_, map_, sensor_, path, pose_, max_ticks);
    pose_ = r.pose;
    ticks_ += r.ticks;
    return r.ticks;
  }

  double coverage() const { return fdqn::coverage(map_, truth_, start_); }

 private:
  OccupancyGrid truth_;
  OccupancyGrid map_;
  RobotPose pose_;
  SensorConfig sensor_;
  Cell start_;
  long ticks_ = 0;
};

}  // namespace fdqn
