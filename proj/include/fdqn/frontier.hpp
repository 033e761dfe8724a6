#pragma once

#include <algorithm>
#include <array>
#include <set>
#include <utility>
#include <vector>

#include "fdqn/grid.hpp"

namespace fdqn {

inline constexpr int kRecordSlots = 10;

// Free cells with at least one Unknown 8-neighbour, in row-major order.
inline std::vector<Cell> detect_frontiers(const OccupancyGrid& map) {
  std::vector<Cell> out;
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      if (map.at(r, c) != CellState::Free) continue;
      bool frontier = false;
      for (int dr = -1; dr <= 1 && !frontier; ++dr) {
        for (int dc = -1; dc <= 1 && !frontier; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (map.in_bounds(r + dr, c + dc) && map.at(r + dr, c + dc) == CellState::Unknown) {
            frontier = true;
          }
        }
      }
      if (frontier) out.push_back(Cell{r, c});
    }
  }
  return out;
}

struct FrontierCluster {
  std::vector<Cell> cells;  // sorted
  Cell centroid;            // mean position snapped to the nearest member
};

// Partition into 8-connected components. Centroid = arithmetic mean of
// member coordinates snapped to the closest member cell; distance ties go to
// the lowest row, then lowest column.
inline std::vector<FrontierCluster> cluster(const std::vector<Cell>& frontiers) {
  std::set<Cell> pending(frontiers.begin(), frontiers.end());
  std::vector<FrontierCluster> out;
  while (!pending.empty()) {
    FrontierCluster cl;
    std::vector<Cell> stack{*pending.begin()};
    pending.erase(pending.begin());
    while (!stack.empty()) {
      const Cell cur = stack.back();
      stack.pop_back();
      cl.cells.push_back(cur);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          auto it = pending.find(Cell{cur.row + dr, cur.col + dc});
          if (it != pending.end()) {
            stack.push_back(*it);
            pending.erase(it);
          }
        }
      }
    }
    std::sort(cl.cells.begin(), cl.cells.end());

    double mean_row = 0.0, mean_col = 0.0;
    for (const Cell& c : cl.cells) {
      mean_row += c.row;
      mean_col += c.col;
    }
    mean_row /= cl.cells.size();
    mean_col /= cl.cells.size();
    Cell best = cl.cells.front();
    double best_d = -1.0;
    for (const Cell& c : cl.cells) {
      const double d = (c.row - mean_row) * (c.row - mean_row) +
                       (c.col - mean_col) * (c.col - mean_col);
      if (best_d < 0.0 || d < best_d ||
          (d == best_d && (c.row < best.row || (c.row == best.row && c.col < best.col)))) {
        best_d = d;
        best = c;
      }
    }
    cl.centroid = best;
    out.push_back(std::move(cl));
  }
  return out;
}

// Fraction of Unknown cells within Euclidean distance <= radius of the
// centroid, over the in-bounds cells of that disc.
inline double information_gain(const OccupancyGrid& map, Cell centroid, int radius) {
  if (radius < 1) throw std::invalid_argument("information_gain radius must be >= 1");
  long total = 0;
  long unknown = 0;
  for (int r = centroid.row - radius; r <= centroid.row + radius; ++r) {
    for (int c = centroid.col - radius; c <= centroid.col + radius; ++c) {
      if (!map.in_bounds(r, c)) continue;
      const long dr = r - centroid.row;
      const long dc = c - centroid.col;
      if (dr * dr + dc * dc > static_cast<long>(radius) * radius) continue;
      ++total;
      if (map.at(r, c) == CellState::Unknown) ++unknown;
    }
  }
  if (total == 0) return 0.0;
  return static_cast<double>(unknown) / static_cast<double>(total);
}

// Fixed 10-slot record of candidate goals. Coordinates are normalised to
// [0,1]; unused slots hold the (0,0) zero-centroid sentinel with gain 0.
struct CentroidRecord {
  std::array<std::pair<double, double>, kRecordSlots> centroids{};
  std::array<double, kRecordSlots> gains{};

  bool slot_used(int i) const {
    return centroids[i].first != 0.0 || centroids[i].second != 0.0;
  }
  int used_count() const {
    int n = 0;
    for (int i = 0; i < kRecordSlots; ++i) n += slot_used(i) ? 1 : 0;
    return n;
  }
};

// Top clusters by gain (ties: lower centroid row, then column) fill the
// slots in descending gain order; the rest are zero-padded.
inline CentroidRecord build_record(const std::vector<FrontierCluster>& clusters,
                                   const OccupancyGrid& map, int radius) {
  struct Entry {
    double gain;
    Cell centroid;
  };
  std::vector<Entry> entries;
  entries.reserve(clusters.size());
  for (const FrontierCluster& cl : clusters) {
    entries.push_back(Entry{information_gain(map, cl.centroid, radius), cl.centroid});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain > b.gain;
    if (a.centroid.row != b.centroid.row) return a.centroid.row < b.centroid.row;
    return a.centroid.col < b.centroid.col;
  });

  const double col_denom = map.width() > 1 ? map.width() - 1.0 : 1.0;
  const double row_denom = map.height() > 1 ? map.height() - 1.0 : 1.0;
  CentroidRecord record;
  const int n = std::min<int>(kRecordSlots, static_cast<int>(entries.size()));
  for (int i = 0; i < n; ++i) {
    record.centroids[i] = {entries[i].centroid.col / col_denom,
                           entries[i].centroid.row / row_denom};
    record.gains[i] = entries[i].gain;
  }
  return record;
}

// Maps a slot's normalised coordinates back to the grid cell they came from.
inline Cell denormalize_centroid(const std::pair<double, double>& centroid,
                                 const OccupancyGrid& map) {
  const double col_denom = map.width() > 1 ? map.width() - 1.0 : 1.0;
  const double row_denom = map.height() > 1 ? map.height() - 1.0 : 1.0;
  return Cell{static_cast<int>(std::lround(centroid.second * row_denom)),
              static_cast<int>(std::lround(centroid.first * col_denom))};
}

}  // namespace fdqn
