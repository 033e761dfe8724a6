#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdqn/frontier.hpp"
#include "fdqn/grid.hpp"
#include "fdqn/neural.hpp"
#include "fdqn/rng.hpp"

namespace fdqn {

// Layout: [x, y] normalised position, [qx, qy, qz, qw], 10 centroid pairs,
// 10 gains. Padded slots contribute exact zeros.
using StateVector = std::array<double, kInputDim>;

struct Transition {
  StateVector state{};
  int action = 0;
  double reward = 0.0;
  StateVector next_state{};
  int done = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

enum class AlgoVariant { dqn, ddqn, dueling_dqn, dueling_ddqn };

inline const char* algo_name(AlgoVariant v) {
  switch (v) {
    case AlgoVariant::dqn: return "dqn";
    case AlgoVariant::ddqn: return "ddqn";
    case AlgoVariant::dueling_dqn: return "dueling_dqn";
    case AlgoVariant::dueling_ddqn: return "dueling_ddqn";
  }
  return "dqn";
}

inline AlgoVariant parse_algo(const std::string& name) {
  if (name == "dqn") return AlgoVariant::dqn;
  if (name == "ddqn") return AlgoVariant::ddqn;
  if (name == "dueling_dqn") return AlgoVariant::dueling_dqn;
  if (name == "dueling_ddqn") return AlgoVariant::dueling_ddqn;
  throw std::invalid_argument("unknown algorithm: " + name);
}

inline Topology topology_of(AlgoVariant v) {
  return (v == AlgoVariant::dueling_dqn || v == AlgoVariant::dueling_ddqn) ? Topology::Dueling
                                                                           : Topology::Standard;
}

inline bool uses_double_target(AlgoVariant v) {
  return v == AlgoVariant::ddqn || v == AlgoVariant::dueling_ddqn;
}

struct TrainConfig {
  double gamma = 0.9;
  double learning_rate = 0.001;
  double epsilon = 1.0;
  double epsilon_min = 0.1;
  double epsilon_decay = 0.995;
  int epochs = 100;
  int save_interval = 10;
  int batch_size = 32;
  double penalty = 10.0;
  // Learning-rate factor inside the one-step Q target; 1.0 recovers the
  // plain Bellman target.
  double target_alpha = 1.0;
  std::uint64_t seed = 0;
};

inline StateVector prepare_input(const RobotPose& pose, const CentroidRecord& record, int width,
                                 int height) {
  StateVector s{};
  const double col_denom = width > 1 ? width - 1.0 : 1.0;
  const double row_denom = height > 1 ? height - 1.0 : 1.0;
  s[0] = pose.x / col_denom;
  s[1] = pose.y / row_denom;
  s[2] = pose.orientation.x;
  s[3] = pose.orientation.y;
  s[4] = pose.orientation.z;
  s[5] = pose.orientation.w;
  for (int i = 0; i < kRecordSlots; ++i) {
    s[6 + 2 * i] = record.centroids[i].first;
    s[7 + 2 * i] = record.centroids[i].second;
    s[26 + i] = record.gains[i];
  }
  return s;
}

// Recovers the centroid record embedded in a state vector.
inline CentroidRecord record_from_state(const StateVector& state) {
  CentroidRecord record;
  for (int i = 0; i < kRecordSlots; ++i) {
    record.centroids[i] = {state[6 + 2 * i], state[7 + 2 * i]};
    record.gains[i] = state[26 + i];
  }
  return record;
}

// Overwrites the Q-value of every zero-centroid slot with -penalty.
inline void apply_zero_centroid_mask(std::vector<double>& q, const CentroidRecord& record,
                                     double penalty) {
  for (int i = 0; i < kRecordSlots; ++i) {
    if (!record.slot_used(i)) q[i] = -penalty;
  }
}

inline int argmax_index(const std::vector<double>& q) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(q.size()); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

// Epsilon branch picks uniformly over all 10 slots (unmasked); exploitation
// masks zero-centroid slots before the argmax. Ties go to the lowest index.
inline int select_action(const NetworkParams& net, const StateVector& state,
                         const CentroidRecord& record, double epsilon, double penalty, Rng& rng) {
  if (rng.uniform_real() < epsilon) {
    return rng.uniform_int(0, kRecordSlots - 1);
  }
  std::vector<double> q = q_values(net, state);
  apply_zero_centroid_mask(q, record, penalty);
  return argmax_index(q);
}

inline double decay_epsilon(double epsilon, double epsilon_min, double epsilon_decay) {
  if (epsilon > epsilon_min) {
    return std::max(epsilon_min, epsilon * epsilon_decay);
  }
  return epsilon;
}

// -penalty for the zero centroid, 1 for an exact match with the target
// centroid, 0 otherwise. Exact float comparison is intended: both points are
// copied from the same record.
inline double compute_reward(std::pair<double, double> predicted,
                             std::pair<double, double> target, double penalty) {
  if (predicted.first == 0.0 && predicted.second == 0.0) return -penalty;
  if (predicted.first == target.first && predicted.second == target.second) return 1.0;
  return 0.0;
}

// Runs the target network, masks the zero-centroid slots, and returns the
// centroid of the winning slot.
inline std::pair<double, double> predicted_centroid(const NetworkParams& target_net,
                                                    const StateVector& state,
                                                    const CentroidRecord& record, double penalty) {
  std::vector<double> q = q_values(target_net, state);
  apply_zero_centroid_mask(q, record, penalty);
  return record.centroids[argmax_index(q)];
}

// Centroid of the highest-gain slot (ties to the lowest index); (0,0) when
// the record is fully padded.
inline std::pair<double, double> target_centroid(const CentroidRecord& record) {
  int best = 0;
  for (int i = 1; i < kRecordSlots; ++i) {
    if (record.gains[i] > record.gains[best]) best = i;
  }
  return record.centroids[best];
}

inline int target_centroid_slot(const CentroidRecord& record) {
  int best = 0;
  for (int i = 1; i < kRecordSlots; ++i) {
    if (record.gains[i] > record.gains[best]) best = i;
  }
  return best;
}

// Q(S,A) + alpha * (R + gamma * max Q(S',a) - Q(S,A)); alpha = 1 collapses
// to the plain Bellman target.
inline double dqn_target(double q_sa, double reward, double gamma, double alpha,
                         double max_q_next) {
  return q_sa + alpha * (reward + gamma * max_q_next - q_sa);
}

// Double-Q target: the online network picks the next action, the target
// network values it, and done zeroes the future term.
inline double ddqn_target(double reward, double gamma, int done,
                          const std::vector<double>& q_target_next,
                          const std::vector<double>& q_online_next) {
  const int a_star = argmax_index(q_online_next);
  return reward + gamma * q_target_next[a_star] * (1.0 - done);
}

// Fixed-capacity ring; push evicts the oldest entry once full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("replay buffer capacity must be >= 1");
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  // Oldest first.
  std::vector<Transition> contents() const {
    std::vector<Transition> out;
    out.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
      out.push_back(items_[(head_ + i) % items_.size()]);
    }
    return out;
  }

  // k draws, uniform without replacement; k > size returns everything in a
  // random order.
  std::vector<Transition> sample(Rng& rng, std::size_t k) const {
    if (items_.empty()) throw std::runtime_error("cannot sample from an empty replay buffer");
    k = std::min(k, items_.size());
    std::vector<std::size_t> idx(items_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<Transition> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(idx.size() - i - 1)));
      std::swap(idx[i], idx[j]);
      out.push_back(items_[idx[i]]);
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // oldest element once the buffer is full
  std::vector<Transition> items_;
};

struct TrainResult {
  NetworkParams params;
  std::vector<double> epoch_mse;
};

// Offline training over a recorded dataset. Each epoch passes over the
// dataset once: re-select an action epsilon-greedily for every recorded
// state, reward it against the record's best-gain centroid, push the
// transition, then sample a batch and take one gradient step. Epsilon
// decays after each epoch; the target network syncs every save_interval
// epochs. Fully deterministic for a fixed seed.
//
// The reported per-epoch MSE is the mean squared error between the selected
// and best-gain centroid coordinates, so it lives in [0, 1]; the Q-value
// regression loss driving the gradient steps stays internal.
inline TrainResult train(const std::vector<Transition>& dataset, const TrainConfig& cfg,
                         AlgoVariant variant) {
  if (dataset.empty()) throw std::invalid_argument("train: dataset is empty");
  Rng rng(cfg.seed);
  NetworkParams online = init_network(topology_of(variant), rng);
  NetworkParams target = clone(online);
  ReplayBuffer buffer(10000);
  for (const Transition& t : dataset) buffer.push(t);

  double epsilon = cfg.epsilon;
  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double mse_sum = 0.0;
    long steps = 0;
    for (const Transition& rec : dataset) {
      const CentroidRecord record = record_from_state(rec.state);
      const int action = select_action(online, rec.state, record, epsilon, cfg.penalty, rng);
      const std::pair<double, double> chosen = record.centroids[action];
      const std::pair<double, double> best = target_centroid(record);
      const double reward = compute_reward(chosen, best, cfg.penalty);
      buffer.push(Transition{rec.state, action, reward, rec.next_state, rec.done});
      mse_sum += mse_loss({chosen.first, chosen.second}, {best.first, best.second}).loss;

      const std::vector<Transition> batch =
          buffer.sample(rng, static_cast<std::size_t>(cfg.batch_size));
      std::vector<TrainSample> samples;
      samples.reserve(batch.size());
      for (const Transition& t : batch) {
        const CentroidRecord next_record = record_from_state(t.next_state);
        std::vector<double> q_next_target = q_values(target, t.next_state);
        apply_zero_centroid_mask(q_next_target, next_record, cfg.penalty);
        double y;
        if (uses_double_target(variant)) {
          std::vector<double> q_next_online = q_values(online, t.next_state);
          apply_zero_centroid_mask(q_next_online, next_record, cfg.penalty);
          y = ddqn_target(t.reward, cfg.gamma, t.done, q_next_target, q_next_online);
        } else {
          const double q_sa = q_values(online, t.state)[t.action];
          const double max_q_next = *std::max_element(q_next_target.begin(), q_next_target.end());
          y = dqn_target(q_sa, t.reward, cfg.gamma, cfg.target_alpha, max_q_next);
        }
        samples.push_back(TrainSample{t.state, t.action, y});
      }
      backward_and_step(online, samples, cfg.learning_rate);
      ++steps;
    }
    epsilon = decay_epsilon(epsilon, cfg.epsilon_min, cfg.epsilon_decay);
    if (cfg.save_interval > 0 && epoch % cfg.save_interval == 0) target = clone(online);
    result.epoch_mse.push_back(mse_sum / steps);
  }
  result.params = std::move(online);
  return result;
}

// ---------------------------------------------------------------------------
// Dataset file: one transition per line, "#" comments allowed.
// 36 state floats, action, reward, 36 next-state floats, done.

inline std::string dataset_to_string(const std::vector<Transition>& transitions) {
  std::ostringstream out;
  for (const Transition& t : transitions) {
    for (double v : t.state) out << format_double(v) << ' ';
    out << t.action << ' ' << format_double(t.reward);
    for (double v : t.next_state) out << ' ' << format_double(v);
    out << ' ' << t.done << '\n';
  }
  return out.str();
}

inline void save_dataset(const std::string& path, const std::vector<Transition>& transitions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  out << dataset_to_string(transitions);
}

inline std::vector<Transition> parse_dataset(const std::string& text) {
  std::vector<Transition> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    Transition t;
    bool ok = true;
    for (double& v : t.state) ok = ok && static_cast<bool>(row >> v);
    ok = ok && static_cast<bool>(row >> t.action >> t.reward);
    for (double& v : t.next_state) ok = ok && static_cast<bool>(row >> v);
    ok = ok && static_cast<bool>(row >> t.done);
    if (!ok || t.action < 0 || t.action >= kRecordSlots || (t.done != 0 && t.done != 1)) {
      throw std::runtime_error("bad dataset line " + std::to_string(lineno));
    }
    out.push_back(t);
  }
  return out;
}

inline std::vector<Transition> load_dataset(const std::string& path) {
  return parse_dataset(read_text_file(path));
}

}  // namespace fdqn
