#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpp/cpp_planner.hpp"
#include "dpp/gridworld_io.hpp"
#include "dpp/lp_planner.hpp"
#include "dpp/objectives.hpp"
#include "dpp/observer.hpp"

namespace dpp {

// Everything the episode protocol shares across planners: the MDP, the
// observer model, the intervention cost matrix, and the shortest-path
// normalizer. Building it performs exactly |G| + |I|*|G| softmax VI solves.
struct World {
  GridWorld grid;
  ExperimentConfig config;
  std::vector<ValueTable> base_tables;
  BeliefTable beliefs;
  CostMatrix matrix;
  std::vector<int> hops;
  PathResult shortest;  // unintervened start -> true goal

  const Mdp& mdp() const { return grid.mdp; }
};

World build_world(const GridSpec& spec, const ExperimentConfig& config);

// One planner ready to roll episodes: either an LP policy (per gamma_a) or
// the shared conservative game solution.
struct PlannerArtifact {
  std::string label;
  double gamma_a = 1.0;
  bool is_cpp = false;
  Policy policy;                         // LP planners
  std::shared_ptr<const GameValue> game;  // cpp
  DeceptionCostField field;              // LP planners; raw/discounted exports
};

PlannerArtifact make_lp_artifact(const World& world, DeceptionKind kind, double gamma_a);
PlannerArtifact make_cpp_artifact(const World& world,
                                  std::shared_ptr<const GameValue> game, double gamma_a);

struct SimulationResult {
  std::string planner;
  double gamma_a = 1.0;
  int intervention_time = -1;  // -1: never
  std::uint64_t seed = 0;
  int chosen_intervention = -1;  // -1: none
  std::vector<StateId> pre_trajectory;
  std::vector<StateId> post_path;
  double post_path_cost = 0.0;
  double total_cost = 0.0;
  double shortest_cost = 0.0;
  double cost_ratio = 0.0;  // +inf on failure
  bool failed = false;
};

// The intervention protocol: roll the planner's policy for t_int steps, let
// the observer pick argmax_i sum_G P(G|s_t) damage(i,G) (or take forced_i),
// then finish on the minimum-cost post-intervention path. t_int == -1 never
// intervenes. If the chosen obstacle lands on the agent's own cell, that
// cell stays traversable for the completion path.
SimulationResult run_episode(const World& world, const PlannerArtifact& artifact, int t_int,
                             std::uint64_t seed, int forced_i = -1);

struct AggregateCell {
  std::string planner;
  int intervention_time = -1;
  int episodes = 0;
  int failures = 0;
  double mean_ratio = 0.0;  // over successful episodes, pooled over gamma_a and seeds
  double std_ratio = 0.0;   // population standard deviation
};

struct CdwWindow {
  int first = 0;
  int last = -1;  // empty when last < first
  bool empty() const { return last < first; }
};

struct SweepTable {
  std::vector<SimulationResult> rows;    // planner-major, deterministic order
  std::vector<AggregateCell> aggregates;
  CdwWindow cdw;
  double cdw_threshold = 0.05;
};

// Full (planner, gamma_a, t_int, seed) grid. Per-cell failures are recorded,
// never thrown. Plans are computed once per (planner, gamma_a) and shared
// across intervention times and seeds.
SweepTable sweep(const World& world, const ExperimentConfig& config);

// Maximal contiguous run of intervention times where the across-planner
// spread of mean cost ratios exceeds the threshold (longest run, earliest on
// ties). "never" rows are ignored.
CdwWindow detect_cdw(const std::vector<AggregateCell>& aggregates, double threshold);

// results.csv with columns planner,gamma_a,t_int,seed,chosen_intervention,
// total_cost,cost_ratio.
std::string results_csv(const std::vector<SimulationResult>& rows);

// aggregates.json / trajectories.json documents.
std::string aggregates_json(const World& world, const SweepTable& table);
std::string trajectories_json(const World& world, const SweepTable& table);

// Stable numeric formatting shared by all writers ("%.12g").
std::string format_double(double v);

}  // namespace dpp
