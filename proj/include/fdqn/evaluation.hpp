#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdqn/agent.hpp"
#include "fdqn/env.hpp"
#include "fdqn/frontier.hpp"
#include "fdqn/planner.hpp"

namespace fdqn {

struct EpisodeMetrics {
  int episode = 0;
  std::uint64_t seed = 0;
  std::string policy;   // "baseline" or "trained"
  std::string variant;  // algorithm name, or "baseline"
  long ticks = 0;
  double coverage = 0.0;
  bool completed = false;
  double cumulative_reward = 0.0;
  int centroids_visited = 0;
};

struct EpisodeOptions {
  long budget = 2000;
  double threshold = 0.95;
  double penalty = 10.0;
};

// One exploration episode: sense, build the centroid record, pick a slot
// (highest gain for the baseline, masked argmax-Q for a trained net),
// dispatch, repeat until the frontiers run out or the tick budget does.
// Unreachable centroids are blacklisted until the robot next moves. When
// transitions_out is given, the decision sequence is recorded as training
// data with done=1 on the final transition.
inline EpisodeMetrics run_episode(Environment& env, const NetworkParams* policy_net,
                                  const EpisodeOptions& opts, Rng& rng,
                                  std::vector<Transition>* transitions_out = nullptr) {
  if (opts.budget < 1) throw std::invalid_argument("run_episode: budget must be >= 1");
  EpisodeMetrics m;
  env.sense_now();

  std::set<Cell> blacklist;
  bool have_pending = false;
  Transition pending;
  int truncations = 0;

  auto current_state = [&](const CentroidRecord& record) {
    return prepare_input(env.pose(), record, env.map().width(), env.map().height());
  };

  while (env.ticks() < opts.budget) {
    const CentroidRecord record =
        build_record(cluster(detect_frontiers(env.map())), env.map(), env.sensor().range);
    const StateVector state = current_state(record);

    std::vector<int> valid;
    for (int i = 0; i < kRecordSlots; ++i) {
      if (!record.slot_used(i)) continue;
      if (blacklist.count(denormalize_centroid(record.centroids[i], env.map()))) continue;
      valid.push_back(i);
    }
    if (valid.empty()) break;

    int slot;
    if (policy_net == nullptr) {
      slot = valid.front();
      for (int i : valid) {
        if (record.gains[i] > record.gains[slot]) slot = i;
      }
    } else {
      std::vector<double> q = q_values(*policy_net, state);
      for (int i = 0; i < kRecordSlots; ++i) {
        if (std::find(valid.begin(), valid.end(), i) == valid.end()) q[i] = -opts.penalty;
      }
      slot = argmax_index(q);
    }

    const Cell goal = denormalize_centroid(record.centroids[slot], env.map());
    const long remaining = opts.budget - env.ticks();
    const DispatchResult res =
        dispatch_goal(env, goal, {env.pose().x, env.pose().y}, remaining);

    if (res.outcome == GoalOutcome::Unreachable) {
      blacklist.insert(goal);
      continue;
    }
    blacklist.clear();
    if (res.truncated) {
      ++truncations;
      break;  // budget spent mid-path
    }

    const double reward =
        compute_reward(record.centroids[slot], target_centroid(record), opts.penalty);
    m.cumulative_reward += reward;
    ++m.centroids_visited;
    if (transitions_out) {
      if (have_pending) {
        pending.next_state = state;
        pending.done = 0;
        transitions_out->push_back(pending);
      }
      pending = Transition{state, slot, reward, {}, 1};
      have_pending = true;
    }
  }

  if (transitions_out && have_pending) {
    const CentroidRecord final_record =
        build_record(cluster(detect_frontiers(env.map())), env.map(), env.sensor().range);
    pending.next_state = current_state(final_record);
    pending.done = 1;
    transitions_out->push_back(pending);
  }

  m.ticks = env.ticks();
  m.coverage = env.coverage();
  m.completed = m.coverage >= opts.threshold;
  (void)truncations;
  return m;
}

struct SeriesStats {
  double first = 0.0;
  double last = 0.0;
  double mean = 0.0;
  double slope = 0.0;  // least-squares fit over epoch index
};

inline SeriesStats mse_series_stats(const std::vector<double>& series) {
  if (series.empty()) throw std::invalid_argument("mse_series_stats: empty series");
  SeriesStats s;
  s.first = series.front();
  s.last = series.back();
  double sum = 0.0;
  for (double v : series) sum += v;
  s.mean = sum / series.size();
  const double n = static_cast<double>(series.size());
  if (series.size() > 1) {
    const double mean_x = (n - 1.0) / 2.0;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
      num += (i - mean_x) * (series[i] - s.mean);
      den += (i - mean_x) * (i - mean_x);
    }
    s.slope = num / den;
  }
  return s;
}

// floor((input - pool) / stride) + 1
inline int pool_output_size(int input, int pool, int stride) {
  if (pool < 1 || stride < 1) throw std::invalid_argument("pool and stride must be >= 1");
  if (pool > input) throw std::invalid_argument("pool size exceeds input size");
  return (input - pool) / stride + 1;
}

inline double cell_intensity(CellState s) {
  switch (s) {
    case CellState::Unknown: return 0.5;
    case CellState::Free: return 1.0;
    case CellState::Occupied: return 0.0;
  }
  return 0.5;
}

// Multi-scale average pooling over the encoded map, pool/stride pairs (2,2),
// (4,4), (8,8), flattened and concatenated. Scales larger than the grid are
// skipped.
inline std::vector<double> extract_features(const OccupancyGrid& map) {
  std::vector<double> features;
  const int scales[][2] = {{2, 2}, {4, 4}, {8, 8}};
  for (const auto& [pool, stride] : scales) {
    if (pool > map.width() || pool > map.height()) continue;
    const int out_h = pool_output_size(map.height(), pool, stride);
    const int out_w = pool_output_size(map.width(), pool, stride);
    for (int orow = 0; orow < out_h; ++orow) {
      for (int ocol = 0; ocol < out_w; ++ocol) {
        double sum = 0.0;
        for (int dr = 0; dr < pool; ++dr) {
          for (int dc = 0; dc < pool; ++dc) {
            sum += cell_intensity(map.at(orow * stride + dr, ocol * stride + dc));
          }
        }
        features.push_back(sum / (pool * pool));
      }
    }
  }
  return features;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double magnitude(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
  const double ma = magnitude(a);
  const double mb = magnitude(b);
  if (ma == 0.0 || mb == 0.0) {
    throw std::invalid_argument("cosine_similarity: zero-magnitude vector");
  }
  if (a == b) return 1.0;  // keep self-similarity exact
  const double c = dot(a, b) / (ma * mb);
  return std::clamp(c, -1.0, 1.0);
}

struct SimilarityResult {
  double score = 0.0;
  bool pass = false;
};

inline SimilarityResult map_similarity(const OccupancyGrid& reference,
                                       const OccupancyGrid& candidate) {
  if (reference.width() != candidate.width() || reference.height() != candidate.height()) {
    throw std::invalid_argument("map_similarity: grid dimensions differ");
  }
  const double score = cosine_similarity(extract_features(reference), extract_features(candidate));
  return SimilarityResult{score, score >= 0.75};
}

struct AggregateRow {
  std::string policy;
  std::string variant;
  int runs = 0;
  double avg_ticks = 0.0;
  double avg_coverage = 0.0;
  int completed = 0;
  int not_completed = 0;
};

inline std::vector<AggregateRow> aggregate(const std::vector<EpisodeMetrics>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  std::map<std::pair<std::string, std::string>, AggregateRow> groups;
  for (const EpisodeMetrics& m : runs) {
    AggregateRow& row = groups[{m.policy, m.variant}];
    row.policy = m.policy;
    row.variant = m.variant;
    row.runs += 1;
    row.avg_ticks += m.ticks;
    row.avg_coverage += m.coverage;
    if (m.completed) row.completed += 1;
    else row.not_completed += 1;
  }
  std::vector<AggregateRow> out;
  for (auto& [key, row] : groups) {
    row.avg_ticks /= row.runs;
    row.avg_coverage /= row.runs;
    out.push_back(row);
  }
  return out;
}

inline std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string metrics_csv(const std::vector<EpisodeMetrics>& rows) {
  std::ostringstream out;
  out << "episode,seed,policy,variant,ticks,coverage,completed,cumulative_reward,"
         "centroids_visited\n";
  for (const EpisodeMetrics& m : rows) {
    out << m.episode << ',' << m.seed << ',' << m.policy << ',' << m.variant << ',' << m.ticks
        << ',' << format_fixed6(m.coverage) << ',' << (m.completed ? 1 : 0) << ','
        << format_fixed6(m.cumulative_reward) << ',' << m.centroids_visited << '\n';
  }
  return out.str();
}

inline std::string mse_csv(const std::vector<double>& series) {
  std::ostringstream out;
  out << "epoch,mse\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << (i + 1) << ',' << format_double(series[i]) << '\n';
  }
  return out.str();
}

}  // namespace fdqn
