// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Usage: acceptance <cli-binary> <maps-dir>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fdqn/agent.hpp"
#include "fdqn/env.hpp"
#include "fdqn/evaluation.hpp"
#include "fdqn/planner.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace fdqn;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

std::array<double, kInputDim> random_state(Rng& rng) {
  std::array<double, kInputDim> s{};
  for (double& v : s) v = rng.uniform_real(-1.0, 1.0);
  return s;
}

double batch_loss(const NetworkParams& params, const std::vector<TrainSample>& batch) {
  double loss = 0.0;
  for (const TrainSample& s : batch) {
    const double d = forward(params, s.state).q[s.action] - s.target;
    loss += d * d;
  }
  return loss / batch.size();
}

// Gradient of one SGD step recovered from the parameter delta at lr = 1.
NetworkParams analytic_gradient(const NetworkParams& params,
                                const std::vector<TrainSample>& batch) {
  NetworkParams stepped = params;
  backward_and_step(stepped, batch, 1.0);
  NetworkParams grad = params;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for (std::size_t i = 0; i < params.layers[l].w.size(); ++i) {
      grad.layers[l].w[i] = params.layers[l].w[i] - stepped.layers[l].w[i];
    }
    for (std::size_t i = 0; i < params.layers[l].b.size(); ++i) {
      grad.layers[l].b[i] = params.layers[l].b[i] - stepped.layers[l].b[i];
    }
  }
  return grad;
}

double max_fd_error(NetworkParams& params, const std::vector<TrainSample>& batch) {
  const NetworkParams grad = analytic_gradient(params, batch);
  const double h = 1e-5;
  double worst = 0.0;
  auto check = [&](double* slot, double analytic) {
    const double orig = *slot;
    *slot = orig + h;
    const double up = batch_loss(params, batch);
    *slot = orig - h;
    const double down = batch_loss(params, batch);
    *slot = orig;
    const double fd = (up - down) / (2.0 * h);
    const double err = std::abs(analytic - fd) / std::max({0.1, std::abs(analytic), std::abs(fd)});
    worst = std::max(worst, err);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for (std::size_t i = 0; i < params.layers[l].w.size(); ++i) {
      check(&params.layers[l].w[i], grad.layers[l].w[i]);
    }
    for (std::size_t i = 0; i < params.layers[l].b.size(); ++i) {
      check(&params.layers[l].b[i], grad.layers[l].b[i]);
    }
  }
  return worst;
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <cli-binary> <maps-dir>\n");
    return 2;
  }
  const std::string cli = argv[1];
  const std::string maps = argv[2];
  const fs::path scratch = fs::temp_directory_path() / "fdqn_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  const LoadedMap house = load_map(read_text_file(maps + "/house20.txt"));

  // Shared fixture: baseline dataset and one trained model per variant
  // (criteria 8-11 reuse these).
  std::vector<Transition> dataset;
  std::vector<EpisodeMetrics> baseline_metrics;
  OccupancyGrid baseline_final_map(1, 1);
  for (int i = 0; i < 15; ++i) {
    Environment env(house);
    Rng rng(1 + i);
    baseline_metrics.push_back(run_episode(env, nullptr, EpisodeOptions{}, rng, &dataset));
    baseline_final_map = env.map();
  }

  const std::vector<AlgoVariant> variants{AlgoVariant::dqn, AlgoVariant::ddqn,
                                          AlgoVariant::dueling_dqn, AlgoVariant::dueling_ddqn};
  std::vector<TrainResult> trained;
  const auto train_t0 = Clock::now();
  for (AlgoVariant v : variants) {
    TrainConfig cfg;
    cfg.seed = 1;
    trained.push_back(train(dataset, cfg, v));
  }
  const double train_seconds = seconds_since(train_t0);

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;

  criteria.emplace_back("gradient correctness vs finite differences", [&]() -> Outcome {
    const auto t0 = Clock::now();
    Rng rng(100);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Topology topo = i % 2 == 0 ? Topology::Standard : Topology::Dueling;
      NetworkParams p = init_network(topo, rng);
      const TrainSample sample{random_state(rng), rng.uniform_int(0, kOutputDim - 1),
                               rng.uniform_real(-2.0, 2.0)};
      worst = std::max(worst, max_fd_error(p, {sample}));
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && secs < 10.0, fmt("max_rel_err=%.3g, %.1fs", worst, secs)};
  });

  criteria.emplace_back("dueling identity mean_a Q = V", [&]() -> Outcome {
    Rng rng(101);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const NetworkParams p = init_network(Topology::Dueling, rng);
      const ForwardCache c = forward(p, random_state(rng));
      double mean = 0.0;
      for (double q : c.q) mean += q;
      mean /= c.q.size();
      worst = std::max(worst, std::abs(mean - c.value));
    }
    return {worst < 1e-9, fmt("max_dev=%.3g", worst)};
  });

  criteria.emplace_back("dqn and ddqn targets coincide for identical nets", [&]() -> Outcome {
    Rng rng(102);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const NetworkParams net = init_network(i % 2 ? Topology::Dueling : Topology::Standard, rng);
      const auto state = random_state(rng);
      const auto next = random_state(rng);
      const std::vector<double> q_next = q_values(net, next);
      const int argmax = argmax_index(q_next);
      bool unique = true;
      for (int a = 0; a < kOutputDim; ++a) {
        if (a != argmax && q_next[a] == q_next[argmax]) unique = false;
      }
      if (!unique) continue;
      const double reward = rng.uniform_real(-1.0, 1.0);
      const double gamma = rng.uniform_real(0.1, 1.0);
      const double q_sa = q_values(net, state)[rng.uniform_int(0, kOutputDim - 1)];
      const double a_side = dqn_target(q_sa, reward, gamma, 1.0, q_next[argmax]);
      const double b_side = ddqn_target(reward, gamma, 0, q_next, q_next);
      worst = std::max(worst, std::abs(a_side - b_side));
    }
    return {worst < 1e-12, fmt("max_diff=%.3g", worst)};
  });

  criteria.emplace_back("epsilon schedule follows max(eps_min, eps0*decay^k)", [&]() -> Outcome {
    double eps = 1.0;
    double expected = 1.0;
    for (int k = 1; k <= 1000; ++k) {
      eps = decay_epsilon(eps, 0.1, 0.995);
      expected = std::max(0.1, expected * 0.995);
      if (eps != expected) return {false, fmt("mismatch at k=%d", k)};
    }
    return {eps == 0.1, "exact over k=0..1000"};
  });

  criteria.emplace_back("replay buffer eviction and uniform sampling", [&]() -> Outcome {
    Rng rng(103);
    const std::size_t capacity = 64;
    ReplayBuffer buf(capacity);
    for (std::size_t i = 0; i < capacity + 1; ++i) {
      Transition t;
      t.action = int(i % kRecordSlots);
      t.reward = double(i);
      buf.push(t);
    }
    const auto contents = buf.contents();
    if (buf.size() != capacity) return {false, "size grew past capacity"};
    if (contents.front().reward != 1.0 || contents.back().reward != double(capacity)) {
      return {false, "did not evict exactly the first element"};
    }

    ReplayBuffer small(10);
    for (int i = 0; i < 10; ++i) {
      Transition t;
      t.action = i;
      small.push(t);
    }
    std::vector<long> counts(10, 0);
    const long draws = 100000;
    for (long i = 0; i < draws; ++i) counts[small.sample(rng, 1)[0].action] += 1;
    const double chi2 = oracle::chi_square_uniform(counts, draws);
    return {chi2 < 21.666, fmt("chi2=%.2f (crit 21.666 at p=0.01, 9 dof)", chi2)};
  });

  criteria.emplace_back("masking never selects a padded slot", [&]() -> Outcome {
    Rng rng(104);
    NetworkParams net = init_network(Topology::Standard, rng);
    long checked = 0;
    for (int i = 0; i < 10000; ++i) {
      if (i % 100 == 0) net = init_network(Topology::Standard, rng);
      CentroidRecord rec;
      const int used = rng.uniform_int(1, kRecordSlots);
      for (int s = 0; s < used; ++s) {
        rec.centroids[s] = {0.05 + 0.09 * rng.uniform_int(1, 9),
                            0.05 + 0.09 * rng.uniform_int(1, 9)};
        rec.gains[s] = rng.uniform_real(0.0, 1.0);
      }
      const StateVector state = prepare_input(
          RobotPose{double(rng.uniform_int(0, 19)), double(rng.uniform_int(0, 19)), {}}, rec, 20,
          20);
      for (double q : q_values(net, state)) {
        if (std::abs(q) >= 5.0) return {false, "random net exceeded |Q| < 5"};
      }
      const int action = select_action(net, state, rec, 0.0, 10.0, rng);
      if (action >= used) return {false, fmt("padded slot %d chosen of %d used", action, used)};
      ++checked;
    }
    return {true, fmt("%ld exploit selections, all valid", checked)};
  });

  criteria.emplace_back("frontier, gain and plan match brute-force oracles", [&]() -> Outcome {
    Rng rng(105);
    for (int trial = 0; trial < 100; ++trial) {
      const OccupancyGrid map = oracle::random_map(rng, 16, 16);
      const std::vector<Cell> got = detect_frontiers(map);
      if (std::set<Cell>(got.begin(), got.end()) != oracle::frontiers_brute_force(map)) {
        return {false, fmt("frontier mismatch on trial %d", trial)};
      }
      const Cell centroid{rng.uniform_int(0, 15), rng.uniform_int(0, 15)};
      const int radius = rng.uniform_int(1, 6);
      if (information_gain(map, centroid, radius) !=
          oracle::gain_brute_force(map, centroid, radius)) {
        return {false, fmt("gain mismatch on trial %d", trial)};
      }
      std::vector<Cell> free;
      for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) {
          if (map.at(r, c) == CellState::Free) free.push_back(Cell{r, c});
        }
      }
      if (free.size() < 2) continue;
      const Cell from = free[rng.uniform_int(0, int(free.size()) - 1)];
      const Cell to = free[rng.uniform_int(0, int(free.size()) - 1)];
      const auto path = plan(map, from, to);
      const auto dist = oracle::bfs_distance(map, from, to);
      if (path.has_value() != dist.has_value()) {
        return {false, fmt("plan reachability mismatch on trial %d", trial)};
      }
      if (path && long(path->size()) - 1 != *dist) {
        return {false, fmt("plan length mismatch on trial %d", trial)};
      }
    }
    return {true, "100 random 16x16 maps"};
  });

  criteria.emplace_back("training trend: MSE falls, mean in [0,1], 4 variants < 120s",
                        [&]() -> Outcome {
    if (dataset.size() < 200) {
      return {false, fmt("dataset has only %zu transitions", dataset.size())};
    }
    for (std::size_t i = 0; i < variants.size(); ++i) {
      const SeriesStats st = mse_series_stats(trained[i].epoch_mse);
      if (trained[i].epoch_mse.size() != 100) {
        return {false, fmt("%s ran %zu epochs", algo_name(variants[i]),
                           trained[i].epoch_mse.size())};
      }
      if (!(st.last < st.first)) {
        return {false, fmt("%s MSE did not fall (%.4f -> %.4f)", algo_name(variants[i]), st.first,
                           st.last)};
      }
      if (st.mean < 0.0 || st.mean > 1.0) {
        return {false, fmt("%s mean MSE %.4f outside [0,1]", algo_name(variants[i]), st.mean)};
      }
    }
    return {train_seconds < 120.0,
            fmt("%zu transitions, total training %.1fs", dataset.size(), train_seconds)};
  });

  criteria.emplace_back("imitation accuracy >= 90% against the gain argmax", [&]() -> Outcome {
    std::string detail;
    for (std::size_t i = 0; i < variants.size(); ++i) {
      Rng rng(200);
      long agree = 0;
      for (const Transition& t : dataset) {
        const CentroidRecord rec = record_from_state(t.state);
        // independent oracle: first index of the maximal gain
        int best = 0;
        for (int s = 1; s < kRecordSlots; ++s) {
          if (rec.gains[s] > rec.gains[best]) best = s;
        }
        const int chosen = select_action(trained[i].params, t.state, rec, 0.0, 10.0, rng);
        agree += chosen == best;
      }
      const double rate = double(agree) / dataset.size();
      detail += fmt("%s=%.3f ", algo_name(variants[i]), rate);
      if (rate < 0.90) return {false, detail};
    }
    return {true, detail};
  });

  std::vector<OccupancyGrid> trained_final_maps;
  criteria.emplace_back("exploration completes: baseline 5/5, variants >= 4/5",
                        [&]() -> Outcome {
    int baseline_completed = 0;
    for (int i = 0; i < 5; ++i) baseline_completed += baseline_metrics[i].completed;
    if (baseline_completed != 5) {
      return {false, fmt("baseline completed %d/5", baseline_completed)};
    }
    std::string detail = "baseline=5/5 ";
    for (std::size_t i = 0; i < variants.size(); ++i) {
      int completed = 0;
      OccupancyGrid final_map(1, 1);
      for (int s = 1; s <= 5; ++s) {
        Environment env(house);
        Rng rng(s);
        const EpisodeMetrics m = run_episode(env, &trained[i].params, EpisodeOptions{}, rng);
        completed += m.completed;
        final_map = env.map();
      }
      trained_final_maps.push_back(final_map);
      detail += fmt("%s=%d/5 ", algo_name(variants[i]), completed);
      if (completed < 4) return {false, detail};
    }
    return {true, detail};
  });

  criteria.emplace_back("similarity gates at 75%", [&]() -> Outcome {
    if (trained_final_maps.empty()) return {false, "no trained maps (criterion 10 failed)"};
    const SimilarityResult self = map_similarity(trained_final_maps[0], trained_final_maps[0]);
    if (self.score != 1.0) return {false, fmt("self similarity %.6f != 1", self.score)};
    std::string detail = "self=1.0 ";
    for (std::size_t i = 0; i < trained_final_maps.size(); ++i) {
      const SimilarityResult vs = map_similarity(baseline_final_map, trained_final_maps[i]);
      detail += fmt("%s=%.3f ", algo_name(variants[i]), vs.score);
      if (!(vs.score >= 0.75)) return {false, detail};
    }
    // the fully explored map against a fresh all-unknown map fails the gate
    const OccupancyGrid unknown(house.truth.width(), house.truth.height(), CellState::Unknown);
    const SimilarityResult vs_unknown = map_similarity(house.truth, unknown);
    detail += fmt("explored-vs-unknown=%.3f", vs_unknown.score);
    return {vs_unknown.score < 0.75, detail};
  });

  criteria.emplace_back("fixed seeds give bit-identical CLI artifacts", [&]() -> Outcome {
    const std::string map_file = maps + "/house20.txt";
    const fs::path c = scratch / "collect";
    if (run_cli(cli, "collect --map " + map_file + " --runs 2 --seed 1 --out " + c.string()) != 0) {
      return {false, "collect failed"};
    }
    const std::string ds = (c / "dataset.txt").string();
    const fs::path t1 = scratch / "t1", t2 = scratch / "t2";
    const std::string targs = "train --algo dueling_ddqn --dataset " + ds +
                              " --epochs 5 --seed 7 --out ";
    if (run_cli(cli, targs + t1.string()) != 0) return {false, "train run 1 failed"};
    if (run_cli(cli, targs + t2.string()) != 0) return {false, "train run 2 failed"};
    if (slurp(t1 / "checkpoint.txt") != slurp(t2 / "checkpoint.txt")) {
      return {false, "checkpoints differ"};
    }
    if (slurp(t1 / "mse.csv") != slurp(t2 / "mse.csv")) return {false, "mse series differ"};
    const fs::path r1 = scratch / "r1", r2 = scratch / "r2";
    const std::string rargs = "test --model " + (t1 / "checkpoint.txt").string() + " --map " +
                              map_file + " --episodes 2 --seed 3 --out ";
    if (run_cli(cli, rargs + r1.string()) != 0) return {false, "test run 1 failed"};
    if (run_cli(cli, rargs + r2.string()) != 0) return {false, "test run 2 failed"};
    if (slurp(r1 / "metrics.csv") != slurp(r2 / "metrics.csv")) return {false, "metrics differ"};
    if (slurp(r1 / "episode_0.pgm") != slurp(r2 / "episode_0.pgm")) return {false, "maps differ"};
    return {true, "train and test artifacts byte-identical"};
  });

  criteria.emplace_back("math utilities", [&]() -> Outcome {
    Rng rng(300);
    for (int i = 0; i < 200; ++i) {
      std::vector<double> z(1 + rng.uniform_int(0, 9));
      for (double& v : z) v = rng.uniform_real(-20.0, 20.0);
      const std::vector<double> p = softmax(z);
      double sum = 0.0;
      for (double v : p) sum += v;
      if (std::abs(sum - 1.0) > 1e-12) return {false, "softmax sum off"};
      std::vector<double> shifted = z;
      for (double& v : shifted) v += 13.5;
      const std::vector<double> q = softmax(shifted);
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (std::abs(p[k] - q[k]) > 1e-12) return {false, "softmax not shift invariant"};
      }
    }
    if (quaternion_from_yaw(0.0) != Quaternion{0, 0, 0, 1}) return {false, "identity quaternion"};
    if (euclidean_distance(0, 0, 3, 4) != 5.0) return {false, "3-4-5 distance"};
    if (pool_output_size(299, 2, 2) != 149) return {false, "pool size formula"};
    return {true, "softmax, quaternion, distance, pooling"};
  });

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %2zu %s (%s)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  std::printf("ACCEPTANCE: %zu/%zu criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
