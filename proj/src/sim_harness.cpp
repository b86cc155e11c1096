#include "dpp/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dpp/errors.hpp"

namespace dpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// mt19937_64 is bit-stable across platforms; the distribution adapters are
// not, so doubles come straight from the raw stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

ActionId sample_action(const Policy& policy, StateId s, Rng& rng) {
  const auto& row = policy.action_probabilities[s];
  if (row.empty()) return kNoAction;
  if (row.size() == 1) return row[0].first;
  double u = rng.uniform();
  double acc = 0.0;
  for (const auto& [a, p] : row) {
    acc += p;
    if (u < acc) return a;
  }
  return row.back().first;
}

StateId sample_transition(const Mdp& mdp, ActionId a, Rng& rng) {
  const TransitionEntry* begin = mdp.transition_begin(a);
  const TransitionEntry* end = mdp.transition_end(a);
  if (begin + 1 == end) return begin->to;
  double u = rng.uniform();
  double acc = 0.0;
  for (const TransitionEntry* t = begin; t != end; ++t) {
    acc += t->prob;
    if (u < acc) return t->to;
  }
  return (end - 1)->to;
}

std::vector<double> goal_prior(const World& world) {
  const auto& goals = world.mdp().goals();
  if (world.config.uniform_prior) return uniform_prior(goals.size());
  std::vector<double> prior(goals.size(), 0.0);
  for (const auto& [name, mass] : world.config.explicit_prior) {
    StateId s = world.mdp().graph().find_state(name);
    if (s == kNoState)
      throw InputError("config_prior_state", "prior names unknown state " + name);
    int col = -1;
    for (std::size_t g = 0; g < goals.size(); ++g)
      if (goals[g] == s) col = static_cast<int>(g);
    if (col < 0) throw InputError("config_prior_state", name + " is not a candidate goal");
    prior[col] = mass;
  }
  return prior;
}

// Completion dynamics for one chosen intervention; keeps the agent's own
// cell traversable if the obstacle would land on it.
InducedMdp completion_mdp(const World& world, int chosen, StateId agent) {
  const Intervention& iv = world.grid.interventions[chosen];
  if (iv.kept_state[agent]) return build_induced_mdp(world.mdp(), iv);
  Intervention bumped = iv;
  bumped.kept_state[agent] = 1;
  const WeightedGraph& graph = world.mdp().graph();
  for (EdgeId e : graph.incident[agent])
    if (bumped.kept_state[graph.other_end(e, agent)]) bumped.kept_edge[e] = 1;
  bumped.name += "+agent_cell";
  return build_induced_mdp(world.mdp(), bumped);
}

}  // namespace

World build_world(const GridSpec& spec, const ExperimentConfig& config) {
  World world;
  world.grid = grid_to_mdp(spec, config.gamma, config.slip);
  world.config = config;
  const Mdp& mdp = world.mdp();

  SoftmaxParams params{config.alpha, config.vi_tol, 0};
  world.base_tables.reserve(mdp.goals().size());
  for (StateId g : mdp.goals())
    world.base_tables.push_back(softmax_value_iteration(mdp, g, params));
  world.beliefs =
      build_belief_table(mdp, world.base_tables, goal_prior(world), config.belief_temperature);
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  world.matrix =
      compute_cost_matrix(mdp, world.grid.interventions, params, &world.base_tables, threads);
  world.hops = hop_distance(mdp.graph(), mdp.start());
  world.shortest = min_cost_path(mdp, mdp.start(), mdp.true_goal());
  if (world.shortest.states.empty())
    throw InputError("map_disconnected", "no unintervened route to the true goal");
  return world;
}

PlannerArtifact make_lp_artifact(const World& world, DeceptionKind kind, double gamma_a) {
  PlannerArtifact art;
  art.label = kind_name(kind);
  art.gamma_a = gamma_a;
  art.field = make_cost_field(kind, world.mdp(), world.beliefs, world.matrix, world.hops,
                              gamma_a);
  art.policy = plan(world.mdp(), art.field);
  return art;
}

PlannerArtifact make_cpp_artifact(const World& world, std::shared_ptr<const GameValue> game,
                                  double gamma_a) {
  PlannerArtifact art;
  art.label = "cpp";
  art.gamma_a = gamma_a;
  art.is_cpp = true;
  art.game = std::move(game);
  (void)world;
  return art;
}

SimulationResult run_episode(const World& world, const PlannerArtifact& artifact, int t_int,
                             std::uint64_t seed, int forced_i) {
  const Mdp& mdp = world.mdp();
  SimulationResult res;
  res.planner = artifact.label;
  res.gamma_a = artifact.gamma_a;
  res.intervention_time = t_int;
  res.seed = seed;
  res.shortest_cost = world.shortest.cost;

  int cap = world.config.episode_cap > 0 ? world.config.episode_cap
                                         : 50 * static_cast<int>(mdp.num_states());
  const bool can_intervene = world.matrix.num_interventions() > 0 && t_int >= 0;

  Rng rng(seed);
  StateId s = mdp.start();
  res.pre_trajectory.push_back(s);
  double pre_cost = 0.0;
  bool reached = false;
  bool intervened = false;
  int all_unknown_idx = artifact.is_cpp
                            ? artifact.game->info_index(
                                  InfoSet::all_unknown(world.grid.interventions.size()))
                            : -1;

  for (int t = 0;; ++t) {
    if (s == mdp.true_goal()) {
      reached = true;
      break;
    }
    if (can_intervene && t == t_int) {
      intervened = true;
      break;
    }
    if (t >= cap) {
      res.failed = true;
      res.cost_ratio = kInf;
      res.total_cost = kInf;
      return res;
    }
    ActionId a = kNoAction;
    if (artifact.is_cpp) {
      StateId target = artifact.game->move(s, all_unknown_idx);
      if (target != kNoState) a = mdp.action_towards(s, target);
    } else {
      a = sample_action(artifact.policy, s, rng);
    }
    if (a == kNoAction) {  // stuck (absorbed in a decoy or cut-off pocket)
      res.failed = true;
      res.cost_ratio = kInf;
      res.total_cost = kInf;
      return res;
    }
    pre_cost += mdp.action(a).cost;
    s = sample_transition(mdp, a, rng);
    res.pre_trajectory.push_back(s);
  }

  if (intervened) {
    res.chosen_intervention =
        forced_i >= 0 ? forced_i : argmax_damage(world.matrix, world.beliefs.row(s));
    InducedMdp post = completion_mdp(world, res.chosen_intervention, s);
    PathResult path = min_cost_path(post, s, mdp.true_goal());
    if (path.states.empty()) {
      res.failed = true;
      res.cost_ratio = kInf;
      res.total_cost = kInf;
      return res;
    }
    res.post_path = path.states;
    res.post_path_cost = path.cost;
  } else if (!reached) {
    res.failed = true;  // ran out of cap without goal or intervention
    res.cost_ratio = kInf;
    res.total_cost = kInf;
    return res;
  }

  res.total_cost = pre_cost + res.post_path_cost;
  res.cost_ratio = res.total_cost / res.shortest_cost;
  return res;
}

SweepTable sweep(const World& world, const ExperimentConfig& config) {
  SweepTable table;
  table.cdw_threshold = config.cdw_threshold;
  if (config.planners.empty()) throw InputError("config_planners", "no planners configured");

  struct PlanSlot {
    std::string label;
    double gamma_a;
    PlannerArtifact artifact;
    std::string error;
  };
  std::vector<PlanSlot> slots;
  bool needs_cpp = false;
  for (const auto& name : config.planners) {
    if (name == "cpp") {
      needs_cpp = true;
      for (double ga : config.gamma_a_list) slots.push_back({name, ga, {}, {}});
    } else {
      DeceptionKind kind = kind_from_name(name);  // validates the label
      (void)kind;
      for (double ga : config.gamma_a_list) slots.push_back({name, ga, {}, {}});
    }
  }

  std::shared_ptr<const GameValue> game;
  if (needs_cpp)
    game = std::make_shared<GameValue>(minimax_value_iteration(
        world.mdp(), world.grid.interventions, config.decoy_penalty));

  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, threads);
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= slots.size()) return;
      PlanSlot& slot = slots[i];
      try {
        if (slot.label == "cpp")
          slot.artifact = make_cpp_artifact(world, game, slot.gamma_a);
        else
          slot.artifact = make_lp_artifact(world, kind_from_name(slot.label), slot.gamma_a);
      } catch (const Error& e) {
        slot.error = e.what();
      }
    }
  };
  if (threads == 1 || slots.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < std::min<int>(threads, static_cast<int>(slots.size())); ++i)
      pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const PlanSlot& slot : slots) {
    for (int t_int : config.t_int_list) {
      for (std::uint64_t seed : config.seeds) {
        if (!slot.error.empty()) {
          SimulationResult res;
          res.planner = slot.label;
          res.gamma_a = slot.gamma_a;
          res.intervention_time = t_int;
          res.seed = seed;
          res.failed = true;
          res.cost_ratio = kInf;
          res.total_cost = kInf;
          res.shortest_cost = world.shortest.cost;
          table.rows.push_back(std::move(res));
          continue;
        }
        table.rows.push_back(run_episode(world, slot.artifact, t_int, seed));
      }
    }
  }

  // Aggregate per (planner, t_int), pooled over gamma_a values and seeds.
  for (const auto& name : config.planners) {
    for (int t_int : config.t_int_list) {
      AggregateCell cell;
      cell.planner = name;
      cell.intervention_time = t_int;
      double sum = 0.0, sumsq = 0.0;
      for (const SimulationResult& row : table.rows) {
        if (row.planner != name || row.intervention_time != t_int) continue;
        ++cell.episodes;
        if (row.failed) {
          ++cell.failures;
          continue;
        }
        sum += row.cost_ratio;
        sumsq += row.cost_ratio * row.cost_ratio;
      }
      int ok = cell.episodes - cell.failures;
      if (ok > 0) {
        cell.mean_ratio = sum / ok;
        double var = std::max(0.0, sumsq / ok - cell.mean_ratio * cell.mean_ratio);
        cell.std_ratio = std::sqrt(var);
      }
      table.aggregates.push_back(std::move(cell));
    }
  }
  table.cdw = detect_cdw(table.aggregates, config.cdw_threshold);
  return table;
}

CdwWindow detect_cdw(const std::vector<AggregateCell>& aggregates, double threshold) {
  std::vector<int> times;
  for (const AggregateCell& cell : aggregates)
    if (cell.intervention_time >= 0) times.push_back(cell.intervention_time);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  CdwWindow best{0, -1};
  CdwWindow run{0, -1};
  for (int t : times) {
    double lo = kInf, hi = -kInf;
    for (const AggregateCell& cell : aggregates) {
      if (cell.intervention_time != t || cell.episodes == cell.failures) continue;
      lo = std::min(lo, cell.mean_ratio);
      hi = std::max(hi, cell.mean_ratio);
    }
    bool wide = hi > lo && (hi - lo) > threshold;
    if (wide) {
      if (run.empty())
        run = {t, t};
      else
        run.last = t;
    } else {
      if (!run.empty() && run.last - run.first > best.last - best.first) best = run;
      run = {0, -1};
    }
  }
  if (!run.empty() && run.last - run.first > best.last - best.first) best = run;
  return best;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string results_csv(const std::vector<SimulationResult>& rows) {
  std::ostringstream os;
  os << "planner,gamma_a,t_int,seed,chosen_intervention,total_cost,cost_ratio\n";
  for (const SimulationResult& r : rows) {
    os << r.planner << ',' << format_double(r.gamma_a) << ',';
    if (r.intervention_time < 0)
      os << "never";
    else
      os << r.intervention_time;
    os << ',' << r.seed << ',' << r.chosen_intervention << ',' << format_double(r.total_cost)
       << ',' << format_double(r.cost_ratio) << '\n';
  }
  return os.str();
}

namespace {

nlohmann::json window_json(const CdwWindow& cdw, double threshold) {
  nlohmann::json j;
  j["threshold"] = threshold;
  j["definition"] =
      "maximal contiguous run of intervention times whose across-planner spread of mean "
      "cost_ratio exceeds the threshold";
  if (cdw.empty()) {
    j["empty"] = true;
  } else {
    j["empty"] = false;
    j["first"] = cdw.first;
    j["last"] = cdw.last;
  }
  return j;
}

}  // namespace

std::string aggregates_json(const World& world, const SweepTable& table) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["shortest_cost"] = world.shortest.cost;
  j["num_interventions"] = world.grid.interventions.size();
  j["critical_deception_window"] = window_json(table.cdw, table.cdw_threshold);
  j["cells"] = nlohmann::json::array();
  for (const AggregateCell& cell : table.aggregates) {
    nlohmann::json c;
    c["planner"] = cell.planner;
    c["t_int"] = cell.intervention_time < 0 ? nlohmann::json("never")
                                            : nlohmann::json(cell.intervention_time);
    c["episodes"] = cell.episodes;
    c["failures"] = cell.failures;
    c["mean_cost_ratio"] = cell.mean_ratio;
    c["std_cost_ratio"] = cell.std_ratio;
    j["cells"].push_back(std::move(c));
  }
  return j.dump(2) + "\n";
}

std::string trajectories_json(const World& world, const SweepTable& table) {
  const auto& names = world.mdp().graph().state_names;
  nlohmann::json j;
  j["schema_version"] = 1;
  j["goals"] = nlohmann::json::array();
  for (StateId g : world.mdp().goals()) j["goals"].push_back(names[g]);
  j["episodes"] = nlohmann::json::array();

  // Exemplar per aggregation cell: first gamma_a, first seed.
  for (const AggregateCell& cell : table.aggregates) {
    const SimulationResult* pick = nullptr;
    for (const SimulationResult& row : table.rows)
      if (row.planner == cell.planner && row.intervention_time == cell.intervention_time) {
        pick = &row;
        break;
      }
    if (!pick) continue;
    nlohmann::json e;
    e["planner"] = pick->planner;
    e["gamma_a"] = pick->gamma_a;
    e["t_int"] = pick->intervention_time < 0 ? nlohmann::json("never")
                                             : nlohmann::json(pick->intervention_time);
    e["seed"] = pick->seed;
    e["chosen_intervention"] = pick->chosen_intervention;
    e["failed"] = pick->failed;
    e["cost_ratio"] = pick->failed ? nlohmann::json("inf") : nlohmann::json(pick->cost_ratio);
    auto dump_states = [&](const std::vector<StateId>& states) {
      nlohmann::json arr = nlohmann::json::array();
      for (StateId s : states) arr.push_back(names[s]);
      return arr;
    };
    e["pre_trajectory"] = dump_states(pick->pre_trajectory);
    e["post_path"] = dump_states(pick->post_path);
    nlohmann::json beliefs = nlohmann::json::array();
    std::vector<StateId> full = pick->pre_trajectory;
    if (!pick->post_path.empty())
      full.insert(full.end(), pick->post_path.begin() + 1, pick->post_path.end());
    for (StateId s : full) {
      nlohmann::json row = nlohmann::json::array();
      for (double p : world.beliefs.row(s)) row.push_back(p);
      beliefs.push_back(std::move(row));
    }
    e["posteriors"] = std::move(beliefs);
    j["episodes"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace dpp
