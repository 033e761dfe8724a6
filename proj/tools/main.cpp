// Command-line front end: collect exploration data, train the Q-network
// variants, test trained policies, and score map similarity.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fdqn/agent.hpp"
#include "fdqn/env.hpp"
#include "fdqn/evaluation.hpp"
#include "fdqn/grid.hpp"
#include "fdqn/neural.hpp"

namespace fs = std::filesystem;
using namespace fdqn;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

void print_summary(const std::vector<EpisodeMetrics>& rows) {
  if (rows.empty()) return;
  for (const AggregateRow& row : aggregate(rows)) {
    std::printf("%s/%s: runs=%d avg_ticks=%.1f avg_coverage=%.3f completed=%d not_completed=%d\n",
                row.policy.c_str(), row.variant.c_str(), row.runs, row.avg_ticks,
                row.avg_coverage, row.completed, row.not_completed);
  }
}

int run_collect(const std::string& map_path, int runs, std::uint64_t seed,
                const std::string& out_dir) {
  const LoadedMap loaded = load_map(read_text_file(map_path));
  fs::create_directories(out_dir);

  std::vector<Transition> dataset;
  std::vector<EpisodeMetrics> metrics;
  for (int i = 0; i < runs; ++i) {
    Environment env(loaded);
    Rng rng(seed + static_cast<std::uint64_t>(i));
    EpisodeMetrics m = run_episode(env, nullptr, EpisodeOptions{}, rng, &dataset);
    m.episode = i;
    m.seed = seed + static_cast<std::uint64_t>(i);
    m.policy = "baseline";
    m.variant = "baseline";
    metrics.push_back(m);
  }
  save_dataset((fs::path(out_dir) / "dataset.txt").string(), dataset);
  write_file((fs::path(out_dir) / "metrics.csv").string(), metrics_csv(metrics));
  std::printf("collected %zu transitions over %d runs\n", dataset.size(), runs);
  print_summary(metrics);
  return 0;
}

int run_train(const std::string& algo_str, const std::string& dataset_path,
              const TrainConfig& cfg, const std::string& out_dir) {
  const AlgoVariant algo = parse_algo(algo_str);
  const std::vector<Transition> dataset = load_dataset(dataset_path);
  if (dataset.empty()) throw std::runtime_error("dataset is empty: " + dataset_path);
  fs::create_directories(out_dir);

  TrainResult result = train(dataset, cfg, algo);
  save_checkpoint((fs::path(out_dir) / "checkpoint.txt").string(), result.params, algo_str);
  write_file((fs::path(out_dir) / "mse.csv").string(), mse_csv(result.epoch_mse));
  if (!result.epoch_mse.empty()) {
    std::printf("first_mse=%s last_mse=%s\n", format_double(result.epoch_mse.front()).c_str(),
                format_double(result.epoch_mse.back()).c_str());
  } else {
    std::printf("no epochs run; checkpoint holds the initial parameters\n");
  }
  return 0;
}

int run_test(const std::string& model_path, const std::string& map_path, int episodes,
             long budget, std::uint64_t seed, const std::string& out_dir) {
  const Checkpoint ck = load_checkpoint(model_path);
  const AlgoVariant algo = parse_algo(ck.algo);
  if (topology_of(algo) != ck.params.topology) {
    throw std::runtime_error("checkpoint topology does not match algorithm '" + ck.algo + "'");
  }
  const LoadedMap loaded = load_map(read_text_file(map_path));
  fs::create_directories(out_dir);

  EpisodeOptions opts;
  opts.budget = budget;
  std::vector<EpisodeMetrics> metrics;
  for (int i = 0; i < episodes; ++i) {
    Environment env(loaded);
    Rng rng(seed + static_cast<std::uint64_t>(i));
    EpisodeMetrics m = run_episode(env, &ck.params, opts, rng);
    m.episode = i;
    m.seed = seed + static_cast<std::uint64_t>(i);
    m.policy = "trained";
    m.variant = ck.algo;
    metrics.push_back(m);
    write_pgm_file((fs::path(out_dir) / ("episode_" + std::to_string(i) + ".pgm")).string(),
                   env.map());
  }
  write_file((fs::path(out_dir) / "metrics.csv").string(), metrics_csv(metrics));
  print_summary(metrics);
  return 0;
}

int run_similarity(const std::string& ref_path, const std::string& cand_path) {
  const OccupancyGrid ref = load_grid_file(ref_path);
  const OccupancyGrid cand = load_grid_file(cand_path);
  const SimilarityResult res = map_similarity(ref, cand);
  std::printf("similarity=%.6f pass=%s\n", res.score, res.pass ? "true" : "false");
  return res.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frontier exploration lab: data collection, DQN training, testing, similarity"};
  app.require_subcommand(1);

  // collect
  auto* collect = app.add_subcommand("collect", "Run the greedy baseline and record a dataset");
  std::string collect_map, collect_out;
  int collect_runs = 5;
  std::uint64_t collect_seed = 1;
  collect->add_option("--map", collect_map, "Map text file")->required();
  collect->add_option("--runs", collect_runs, "Number of baseline episodes");
  collect->add_option("--seed", collect_seed, "Base seed; run i uses seed+i");
  collect->add_option("--out", collect_out, "Output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a DQN variant on a recorded dataset");
  std::string train_algo, train_dataset, train_out;
  TrainConfig cfg;
  cfg.seed = 1;
  train_cmd->add_option("--algo", train_algo, "dqn, ddqn, dueling_dqn or dueling_ddqn")
      ->required();
  train_cmd->add_option("--dataset", train_dataset, "Dataset file")->required();
  train_cmd->add_option("--epochs", cfg.epochs, "Dataset passes");
  train_cmd->add_option("--gamma", cfg.gamma, "Discount factor");
  train_cmd->add_option("--learning-rate", cfg.learning_rate, "Gradient step size");
  train_cmd->add_option("--epsilon", cfg.epsilon, "Initial exploration rate");
  train_cmd->add_option("--epsilon-min", cfg.epsilon_min, "Exploration floor");
  train_cmd->add_option("--epsilon-decay", cfg.epsilon_decay, "Per-epoch decay factor");
  train_cmd->add_option("--save-interval", cfg.save_interval, "Epochs between target syncs");
  train_cmd->add_option("--batch-size", cfg.batch_size, "Replay batch size");
  train_cmd->add_option("--penalty", cfg.penalty, "Zero-centroid penalty");
  train_cmd->add_option("--target-alpha", cfg.target_alpha,
                        "Learning-rate factor inside the Q target");
  train_cmd->add_option("--seed", cfg.seed, "RNG seed");
  train_cmd->add_option("--out", train_out, "Output directory")->required();

  // test
  auto* test_cmd = app.add_subcommand("test", "Run a trained policy and write metrics + maps");
  std::string test_model, test_map, test_out;
  int test_episodes = 5;
  long test_budget = 2000;
  std::uint64_t test_seed = 1;
  test_cmd->add_option("--model", test_model, "Checkpoint file")->required();
  test_cmd->add_option("--map", test_map, "Map text file")->required();
  test_cmd->add_option("--episodes", test_episodes, "Number of episodes");
  test_cmd->add_option("--budget", test_budget, "Tick budget per episode");
  test_cmd->add_option("--seed", test_seed, "Base seed; episode i uses seed+i");
  test_cmd->add_option("--out", test_out, "Output directory")->required();

  // similarity
  auto* sim_cmd = app.add_subcommand("similarity", "Score two maps against the 75% gate");
  std::string sim_ref, sim_cand;
  sim_cmd->add_option("--ref", sim_ref, "Reference map (PGM or map text)")->required();
  sim_cmd->add_option("--cand", sim_cand, "Candidate map (PGM or map text)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(collect)) {
      return run_collect(collect_map, collect_runs, collect_seed, collect_out);
    }
    if (app.got_subcommand(train_cmd)) {
      return run_train(train_algo, train_dataset, cfg, train_out);
    }
    if (app.got_subcommand(test_cmd)) {
      return run_test(test_model, test_map, test_episodes, test_budget, test_seed, test_out);
    }
    if (app.got_subcommand(sim_cmd)) {
      return run_similarity(sim_ref, sim_cand);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
