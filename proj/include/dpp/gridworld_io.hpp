#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dpp/graph_mdp.hpp"

namespace dpp {

// Character map: '.' free, '#' obstacle, 'S' start, 'G' true goal, 'D' decoy
// goal, 'I' single-cell intervention point, '1'-'9' grouped intervention
// cells (all cells with the same digit are removed together).
struct GridSpec {
  int width = 0;
  int height = 0;
  double edge_cost = 1.0;
  std::vector<char> cells;  // row-major canonical chars

  char at(int r, int c) const { return cells[static_cast<std::size_t>(r) * width + c]; }
  bool is_obstacle(int r, int c) const { return at(r, c) == '#'; }
  int cell_index(int r, int c) const { return r * width + c; }
};

GridSpec parse_map(std::string_view text);
std::string render_map(const GridSpec& spec);

struct GridWorld {
  Mdp mdp;
  std::vector<Intervention> interventions;
  std::vector<StateId> cell_state;  // cell index -> state id (kNoState on obstacles)
  std::vector<int> state_cell;      // state id -> cell index
};

// 4-connected MDP over non-obstacle cells with the uniform edge cost; one
// intervention per 'I' cell / digit group, in row-major first-appearance
// order.
GridWorld grid_to_mdp(const GridSpec& spec, double gamma, double slip = 0.0);

// Names match grid_to_mdp's state naming.
std::string cell_name(int r, int c);

// Experiment configuration, read from a JSON document with keys: gamma,
// alpha, gamma_a_list, prior ("uniform" or {state name: mass}), planners,
// t_int_list (integers, "never" allowed), seeds, episode_cap, plus optional
// slip, vi_tol, belief_temperature, cdw_threshold, decoy_penalty, threads.
struct ExperimentConfig {
  double gamma = 0.99;
  double alpha = 1.0;
  double slip = 0.0;
  double vi_tol = 1e-9;
  double belief_temperature = 1.0;
  std::vector<double> gamma_a_list{1.0};
  bool uniform_prior = true;
  std::vector<std::pair<std::string, double>> explicit_prior;
  std::vector<std::string> planners;
  std::vector<int> t_int_list{0};  // -1 encodes "never"
  std::vector<std::uint64_t> seeds{1};
  int episode_cap = 0;  // 0: 50 * |states|
  double cdw_threshold = 0.05;
  double decoy_penalty = 0.0;  // 0: default
  int threads = 0;             // 0: hardware concurrency
};

ExperimentConfig load_experiment_config(const std::string& json_text);

std::string read_text_file(const std::string& path);  // InputError on failure

}  // namespace dpp
