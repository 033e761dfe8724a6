#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdqn {

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Row-major lattice of tri-state cells. Ground-truth grids contain only
// Free/Occupied; robot maps start all-Unknown and fill in while sensing.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;

  OccupancyGrid(int width, int height, CellState fill = CellState::Unknown) {
    if (width < 1 || height < 1) {
      throw std::invalid_argument("grid dimensions must be at least 1x1");
    }
    width_ = width;
    height_ = height;
    cells_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  bool in_bounds(Cell c) const { return in_bounds(c.row, c.col); }

  CellState at(int row, int col) const { return cells_[index(row, col)]; }
  CellState at(Cell c) const { return at(c.row, c.col); }
  void set(int row, int col, CellState s) { cells_[index(row, col)] = s; }
  void set(Cell c, CellState s) { set(c.row, c.col, s); }

  const std::vector<CellState>& cells() const { return cells_; }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<CellState> cells_;
};

struct Quaternion {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z + w * w); }
  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

// Yaw about the vertical axis; the planar x/y components stay zero.
inline Quaternion quaternion_from_yaw(double yaw) {
  return Quaternion{0.0, 0.0, std::sin(yaw / 2.0), std::cos(yaw / 2.0)};
}

// Position is continuous in cell units: integer (x, y) is the centre of the
// cell at column x, row y.
struct RobotPose {
  double x = 0.0;
  double y = 0.0;
  Quaternion orientation;

  Cell cell() const {
    return Cell{static_cast<int>(std::lround(y)), static_cast<int>(std::lround(x))};
  }
};

inline double euclidean_distance(double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  return std::sqrt(dx * dx + dy * dy);
}

struct LoadedMap {
  OccupancyGrid truth;
  RobotPose start;
};

// Map text: one row per line, '#' occupied, '.' free, 'S' start (free).
// A start marker is required unless require_start is false (similarity
// inputs may be plain maps without one).
inline OccupancyGrid parse_map_text(const std::string& text, Cell* start_out,
                                    bool require_start = true) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    rows.push_back(line);
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw std::invalid_argument("map text is empty");

  const int height = static_cast<int>(rows.size());
  const int width = static_cast<int>(rows[0].size());
  if (width == 0) throw std::invalid_argument("map text is empty");

  OccupancyGrid grid(width, height, CellState::Free);
  int starts = 0;
  Cell start{};
  for (int r = 0; r < height; ++r) {
    if (static_cast<int>(rows[r].size()) != width) {
      throw std::invalid_argument("map rows have unequal length (row " + std::to_string(r) + ")");
    }
    for (int c = 0; c < width; ++c) {
      switch (rows[r][c]) {
        case '#': grid.set(r, c, CellState::Occupied); break;
        case '.': grid.set(r, c, CellState::Free); break;
        case 'S':
          grid.set(r, c, CellState::Free);
          start = Cell{r, c};
          ++starts;
          break;
        default:
          throw std::invalid_argument(std::string("invalid map character '") + rows[r][c] + "'");
      }
    }
  }
  if (require_start) {
    if (starts == 0) throw std::invalid_argument("map has no start marker");
    if (starts > 1) throw std::invalid_argument("map has multiple start markers");
    if (start_out) *start_out = start;
  } else if (start_out && starts == 1) {
    *start_out = start;
  }
  return grid;
}

inline LoadedMap load_map(const std::string& text) {
  Cell start{};
  OccupancyGrid truth = parse_map_text(text, &start, true);
  RobotPose pose;
  pose.x = static_cast<double>(start.col);
  pose.y = static_cast<double>(start.row);
  pose.orientation = Quaternion{};
  return LoadedMap{std::move(truth), pose};
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// PGM "P2": Unknown=128, Free=255, Occupied=0, one value per cell.
inline std::string to_pgm(const OccupancyGrid& grid) {
  std::ostringstream out;
  out << "P2\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      int v = 128;
      if (grid.at(r, c) == CellState::Free) v = 255;
      if (grid.at(r, c) == CellState::Occupied) v = 0;
      out << v << (c + 1 == grid.width() ? '\n' : ' ');
    }
  }
  return out.str();
}

inline void write_pgm_file(const std::string& path, const OccupancyGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << to_pgm(grid);
}

inline OccupancyGrid parse_pgm(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  in >> magic;
  if (magic != "P2") throw std::invalid_argument("not a P2 PGM file");
  int width = 0, height = 0, maxval = 0;
  in >> width >> height >> maxval;
  if (!in || width < 1 || height < 1) throw std::invalid_argument("bad PGM header");
  OccupancyGrid grid(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      int v = -1;
      in >> v;
      if (!in) throw std::invalid_argument("PGM truncated");
      CellState s;
      if (v == 255) s = CellState::Free;
      else if (v == 0) s = CellState::Occupied;
      else if (v == 128) s = CellState::Unknown;
      else throw std::invalid_argument("unexpected PGM value " + std::to_string(v));
      grid.set(r, c, s);
    }
  }
  return grid;
}

// Accepts either a PGM render or map text ('S' allowed, not required).
inline OccupancyGrid load_grid_file(const std::string& path) {
  const std::string text = read_text_file(path);
  if (text.rfind("P2", 0) == 0) return parse_pgm(text);
  return parse_map_text(text, nullptr, false);
}

}  // namespace fdqn
