#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fdqn/planner.hpp"
#include "oracles.hpp"

using namespace fdqn;

TEST_CASE("plan finds shortest 4-connected paths over free cells") {
  SECTION("trivial path to the same cell") {
    OccupancyGrid map(5, 5, CellState::Free);
    const auto path = plan(map, Cell{2, 2}, Cell{2, 2});
    REQUIRE(path.has_value());
    REQUIRE(*path == Path{Cell{2, 2}});
  }

  SECTION("straight corridor") {
    OccupancyGrid map(7, 3, CellState::Occupied);
    for (int c = 1; c <= 5; ++c) map.set(1, c, CellState::Free);
    const auto path = plan(map, Cell{1, 1}, Cell{1, 5});
    REQUIRE(path.has_value());
    REQUIRE(path->size() == 5);
    REQUIRE(path->front() == Cell{1, 1});
    REQUIRE(path->back() == Cell{1, 5});
  }

  SECTION("sealed goal is a failure, not an error") {
    OccupancyGrid map(5, 5, CellState::Free);
    for (int r = 0; r < 5; ++r) map.set(r, 2, CellState::Occupied);
    REQUIRE_FALSE(plan(map, Cell{0, 0}, Cell{0, 4}).has_value());
  }

  SECTION("unknown cells are not traversable") {
    OccupancyGrid map(5, 1, CellState::Free);
    map.set(0, 2, CellState::Unknown);
    REQUIRE_FALSE(plan(map, Cell{0, 0}, Cell{0, 4}).has_value());
  }

  SECTION("occupied start is an input error") {
    OccupancyGrid map(3, 3, CellState::Occupied);
    REQUIRE_THROWS_AS(plan(map, Cell{0, 0}, Cell{2, 2}), std::invalid_argument);
  }
}

TEST_CASE("plan length matches the BFS oracle on random maps") {
  Rng rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const OccupancyGrid map = oracle::random_map(rng, 12, 12);
    std::vector<Cell> free;
    for (int r = 0; r < 12; ++r) {
      for (int c = 0; c < 12; ++c) {
        if (map.at(r, c) == CellState::Free) free.push_back(Cell{r, c});
      }
    }
    if (free.size() < 2) continue;
    const Cell from = free[rng.uniform_int(0, int(free.size()) - 1)];
    const Cell to = free[rng.uniform_int(0, int(free.size()) - 1)];
    const auto path = plan(map, from, to);
    const auto dist = oracle::bfs_distance(map, from, to);
    REQUIRE(path.has_value() == dist.has_value());
    if (path) {
      REQUIRE(long(path->size()) - 1 == *dist);
      for (std::size_t i = 1; i < path->size(); ++i) {
        const int dr = std::abs((*path)[i].row - (*path)[i - 1].row);
        const int dc = std::abs((*path)[i].col - (*path)[i - 1].col);
        REQUIRE(dr + dc == 1);
        REQUIRE(map.at((*path)[i]) == CellState::Free);
      }
      ++compared;
    }
  }
  REQUIRE(compared > 50);
}

TEST_CASE("quaternion_from_yaw half-angle values") {
  const double s2 = std::sqrt(2.0) / 2.0;
  const Quaternion q0 = quaternion_from_yaw(0.0);
  REQUIRE(q0 == Quaternion{0, 0, 0, 1});
  const Quaternion qpi = quaternion_from_yaw(std::numbers::pi);
  REQUIRE(qpi.z == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(qpi.w == Catch::Approx(0.0).margin(1e-12));
  const Quaternion qhalf = quaternion_from_yaw(std::numbers::pi / 2.0);
  REQUIRE(qhalf.z == Catch::Approx(s2).margin(1e-12));
  REQUIRE(qhalf.w == Catch::Approx(s2).margin(1e-12));
}

TEST_CASE("composing yaw quaternions adds the angles") {
  Rng rng(3);
  auto mul_z = [](const Quaternion& a, const Quaternion& b) {
    // both quaternions are pure z-rotations
    return Quaternion{0.0, 0.0, a.w * b.z + a.z * b.w, a.w * b.w - a.z * b.z};
  };
  for (int i = 0; i < 50; ++i) {
    const double a = rng.uniform_real(-3.0, 3.0);
    const double b = rng.uniform_real(-3.0, 3.0);
    const Quaternion got = mul_z(quaternion_from_yaw(a), quaternion_from_yaw(b));
    const Quaternion want = quaternion_from_yaw(a + b);
    REQUIRE(got.z == Catch::Approx(want.z).margin(1e-9));
    REQUIRE(got.w == Catch::Approx(want.w).margin(1e-9));
  }
}

TEST_CASE("euler_rotation composes the elementary rotations") {
  SECTION("zero angles give the identity") {
    const Matrix3 r = euler_rotation(EulerAngles{});
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) REQUIRE(r[i][j] == (i == j ? 1.0 : 0.0));
    }
  }

  SECTION("pure yaw of a quarter turn maps x to y") {
    const Matrix3 r = euler_rotation(EulerAngles{0.0, 0.0, std::numbers::pi / 2.0});
    // column 0 is the image of the x axis
    REQUIRE(r[0][0] == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(r[1][0] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(r[2][0] == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("orthonormal with determinant one for random angles") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const Matrix3 r = euler_rotation(
          EulerAngles{rng.uniform_real(-3, 3), rng.uniform_real(-3, 3), rng.uniform_real(-3, 3)});
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          double dot = 0.0;
          for (int k = 0; k < 3; ++k) dot += r[k][i] * r[k][j];
          REQUIRE(dot == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-9));
        }
      }
      const double det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
                         r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
                         r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
      REQUIRE(det == Catch::Approx(1.0).margin(1e-9));
    }
  }
}

TEST_CASE("euclidean distance matches the 3-4-5 triangle") {
  REQUIRE(euclidean_distance(0, 0, 3, 4) == 5.0);
  REQUIRE(euclidean_distance(0, 0, 1, 1) == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
}

TEST_CASE("dispatch_goal walks to reachable goals") {
  const LoadedMap lm = load_map(
      "#######\n"
      "#S....#\n"
      "#.....#\n"
      "#######\n");
  Environment env(lm);
  env.sense_now();
  const DispatchResult res = dispatch_goal(env, Cell{2, 5}, {env.pose().x, env.pose().y});
  REQUIRE(res.outcome == GoalOutcome::Reached);
  REQUIRE(res.ticks == 5);
  REQUIRE(res.resends == 0);
  REQUIRE(env.pose().cell() == Cell{2, 5});
}

TEST_CASE("dispatch_goal resends once near the plan origin, then gives up") {
  // the right chamber is visible through the diagonal gap but not walkable
  const LoadedMap lm = load_map(
      "########\n"
      "#S..#..#\n"
      "#...#..#\n"
      "####...#\n"  // no 4-connected opening
      "########\n");
  Environment env(lm);
  env.sense_now();

  SECTION("robot at the plan origin resends exactly once") {
    const DispatchResult res = dispatch_goal(env, Cell{1, 5}, {env.pose().x, env.pose().y});
    REQUIRE(res.outcome == GoalOutcome::Unreachable);
    REQUIRE(res.resends == 1);  // d = 0 <= 2.0
  }

  SECTION("robot far from the plan origin does not resend") {
    const DispatchResult res = dispatch_goal(env, Cell{1, 5}, {env.pose().x + 3.0, env.pose().y + 4.0});
    REQUIRE(res.outcome == GoalOutcome::Unreachable);
    REQUIRE(res.resends == 0);  // d = 5 > 2.0
  }
}
