#include "dpp/gridworld_io.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "dpp/errors.hpp"

namespace dpp {

namespace {

bool known_char(char c) {
  return c == '.' || c == '#' || c == 'S' || c == 'G' || c == 'D' || c == 'I' ||
         (c >= '1' && c <= '9');
}

std::string at_pos(int line, int col) {
  return " at line " + std::to_string(line + 1) + ", column " + std::to_string(col + 1);
}

}  // namespace

std::string cell_name(int r, int c) {
  return "r" + std::to_string(r) + "c" + std::to_string(c);
}

GridSpec parse_map(std::string_view text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  if (!current.empty()) lines.push_back(current);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw InputError("map_empty", "map has no rows");

  GridSpec spec;
  spec.height = static_cast<int>(lines.size());
  spec.width = static_cast<int>(lines[0].size());
  if (spec.width == 0) throw InputError("map_empty", "map row 1 is empty");
  int start_seen = -1, goal_seen = -1;
  for (int r = 0; r < spec.height; ++r) {
    if (static_cast<int>(lines[r].size()) != spec.width)
      throw InputError("map_ragged", "ragged row" + at_pos(r, static_cast<int>(lines[r].size())));
    for (int c = 0; c < spec.width; ++c) {
      char ch = lines[r][c];
      if (!known_char(ch))
        throw InputError("map_char",
                         std::string("unknown character '") + ch + "'" + at_pos(r, c));
      if (ch == 'S') {
        if (start_seen >= 0) throw InputError("map_duplicate_start", "duplicate S" + at_pos(r, c));
        start_seen = spec.cell_index(r, c);
      }
      if (ch == 'G') {
        if (goal_seen >= 0) throw InputError("map_duplicate_goal", "duplicate G" + at_pos(r, c));
        goal_seen = spec.cell_index(r, c);
      }
      spec.cells.push_back(ch);
    }
  }
  if (start_seen < 0) throw InputError("map_no_start", "map has no start cell");
  if (goal_seen < 0) throw InputError("map_no_goal", "map has no true-goal cell");
  return spec;
}

std::string render_map(const GridSpec& spec) {
  std::string out;
  out.reserve(static_cast<std::size_t>(spec.height) * (spec.width + 1));
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) out.push_back(spec.at(r, c));
    out.push_back('\n');
  }
  return out;
}

GridWorld grid_to_mdp(const GridSpec& spec, double gamma, double slip) {
  GridWorld world;
  world.cell_state.assign(static_cast<std::size_t>(spec.width) * spec.height, kNoState);

  std::vector<std::string> names;
  StateId start = kNoState, true_goal = kNoState;
  std::vector<StateId> decoys;
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      char ch = spec.at(r, c);
      if (ch == '#') continue;
      StateId id = static_cast<StateId>(names.size());
      world.cell_state[spec.cell_index(r, c)] = id;
      world.state_cell.push_back(spec.cell_index(r, c));
      names.push_back(cell_name(r, c));
      if (ch == 'S') start = id;
      if (ch == 'G') true_goal = id;
      if (ch == 'D') decoys.push_back(id);
    }
  }

  std::vector<std::pair<StateId, StateId>> edges;
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      StateId here = world.cell_state[spec.cell_index(r, c)];
      if (here == kNoState) continue;
      if (c + 1 < spec.width && world.cell_state[spec.cell_index(r, c + 1)] != kNoState)
        edges.push_back({here, world.cell_state[spec.cell_index(r, c + 1)]});
      if (r + 1 < spec.height && world.cell_state[spec.cell_index(r + 1, c)] != kNoState)
        edges.push_back({here, world.cell_state[spec.cell_index(r + 1, c)]});
    }
  }
  std::vector<double> costs(edges.size(), spec.edge_cost);
  auto graph = std::make_shared<WeightedGraph>(
      WeightedGraph::build(std::move(names), std::move(edges), std::move(costs)));

  std::vector<StateId> goals;
  goals.push_back(true_goal);
  goals.insert(goals.end(), decoys.begin(), decoys.end());
  world.mdp = Mdp::from_graph(graph, start, gamma, goals, true_goal, slip);

  if (hop_distance(*graph, start)[true_goal] == kUnreachableHops)
    throw InputError("map_disconnected", "start cannot reach the true goal");

  // Digit groups collect every matching cell; each 'I' is its own
  // intervention. Ordered by first appearance, scanning row-major.
  std::map<char, std::vector<StateId>> groups;
  std::vector<std::pair<std::string, std::vector<StateId>>> pending;
  std::map<char, std::size_t> group_slot;
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      char ch = spec.at(r, c);
      StateId id = world.cell_state[spec.cell_index(r, c)];
      if (ch == 'I') {
        pending.push_back({"iv_" + cell_name(r, c), {id}});
      } else if (ch >= '1' && ch <= '9') {
        auto it = group_slot.find(ch);
        if (it == group_slot.end()) {
          group_slot[ch] = pending.size();
          pending.push_back({std::string("iv_group_") + ch, {id}});
        } else {
          pending[it->second].second.push_back(id);
        }
      }
    }
  }
  for (auto& [name, cells] : pending) {
    Intervention iv = remove_states_intervention(*graph, cells, name);
    build_induced_mdp(world.mdp, iv);  // early validation; throws on bad maps
    world.interventions.push_back(std::move(iv));
  }
  return world;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("file_missing", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load_experiment_config(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config_parse", std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("config_parse", "config root must be an object");

  ExperimentConfig cfg;
  auto num = [&](const char* key, double& slot) {
    if (doc.contains(key)) {
      if (!doc[key].is_number()) throw InputError("config_type", std::string(key) + " must be a number");
      slot = doc[key].get<double>();
    }
  };
  num("gamma", cfg.gamma);
  num("alpha", cfg.alpha);
  num("slip", cfg.slip);
  num("vi_tol", cfg.vi_tol);
  num("belief_temperature", cfg.belief_temperature);
  num("cdw_threshold", cfg.cdw_threshold);
  num("decoy_penalty", cfg.decoy_penalty);
  if (doc.contains("episode_cap")) cfg.episode_cap = doc["episode_cap"].get<int>();
  if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();

  if (doc.contains("gamma_a_list")) {
    cfg.gamma_a_list.clear();
    for (const auto& v : doc["gamma_a_list"]) cfg.gamma_a_list.push_back(v.get<double>());
    if (cfg.gamma_a_list.empty()) throw InputError("config_empty", "gamma_a_list is empty");
  }
  if (doc.contains("planners")) {
    cfg.planners.clear();
    for (const auto& v : doc["planners"]) cfg.planners.push_back(v.get<std::string>());
  }
  if (doc.contains("t_int_list")) {
    cfg.t_int_list.clear();
    for (const auto& v : doc["t_int_list"]) {
      if (v.is_string()) {
        if (v.get<std::string>() != "never")
          throw InputError("config_t_int", "t_int entries are integers or \"never\"");
        cfg.t_int_list.push_back(-1);
      } else {
        int t = v.get<int>();
        if (t < 0) throw InputError("config_t_int", "intervention times must be nonnegative");
        cfg.t_int_list.push_back(t);
      }
    }
    if (cfg.t_int_list.empty()) throw InputError("config_empty", "t_int_list is empty");
  }
  if (doc.contains("seeds")) {
    cfg.seeds.clear();
    for (const auto& v : doc["seeds"]) cfg.seeds.push_back(v.get<std::uint64_t>());
    if (cfg.seeds.empty()) throw InputError("config_empty", "seeds is empty");
  }
  if (doc.contains("prior")) {
    const auto& prior = doc["prior"];
    if (prior.is_string()) {
      if (prior.get<std::string>() != "uniform")
        throw InputError("config_prior", "prior must be \"uniform\" or an object");
      cfg.uniform_prior = true;
    } else if (prior.is_object()) {
      cfg.uniform_prior = false;
      for (auto it = prior.begin(); it != prior.end(); ++it)
        cfg.explicit_prior.push_back({it.key(), it.value().get<double>()});
    } else {
      throw InputError("config_prior", "prior must be \"uniform\" or an object");
    }
  }
  return cfg;
}

}  // namespace dpp
