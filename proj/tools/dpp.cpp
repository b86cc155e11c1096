// Command-line front end: plan once, or sweep the intervention protocol.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpp/errors.hpp"
#include "dpp/sim_harness.hpp"

namespace {

using nlohmann::json;

int fail(const std::string& code, const std::string& message, int exit_code) {
  json err;
  err["error"] = code;
  err["message"] = message;
  std::cout << err.dump() << std::endl;
  return exit_code;
}

int effective_threads(int flag_value) {
  if (const char* env = std::getenv("DPP_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return flag_value;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dpp::InputError("file_write", "cannot write " + path);
  out << content;
}

json policy_json(const dpp::World& world, const dpp::Policy& policy) {
  const auto& names = world.mdp().graph().state_names;
  json rows = json::object();
  for (dpp::StateId s = 0; s < world.mdp().num_states(); ++s) {
    if (!policy.has_row(s)) continue;
    json row = json::object();
    for (const auto& [a, p] : policy.action_probabilities[s])
      row[names[world.mdp().action(a).to]] = p;
    rows[names[s]] = std::move(row);
  }
  return rows;
}

json cost_matrix_json(const dpp::World& world) {
  const auto& names = world.mdp().graph().state_names;
  json m;
  m["interventions"] = json::array();
  for (const auto& iv : world.grid.interventions) m["interventions"].push_back(iv.name);
  m["goals"] = json::array();
  for (dpp::StateId g : world.matrix.goals()) m["goals"].push_back(names[g]);
  m["j"] = json::array();
  m["damage"] = json::array();
  for (std::size_t i = 0; i < world.matrix.num_interventions(); ++i) {
    json jrow = json::array(), drow = json::array();
    for (std::size_t g = 0; g < world.matrix.num_goals(); ++g) {
      jrow.push_back(world.matrix.j(i, g));
      drow.push_back(world.matrix.damage(i, g));
    }
    m["j"].push_back(std::move(jrow));
    m["damage"].push_back(std::move(drow));
  }
  m["base_j"] = json::array();
  for (std::size_t g = 0; g < world.matrix.num_goals(); ++g)
    m["base_j"].push_back(world.matrix.base_j(g));
  return m;
}

int run_plan(const std::string& map_path, const std::string& config_path,
             const std::string& planner, const std::string& out_path,
             const std::string& dump_lp_path, double gamma_a_flag, int threads) {
  dpp::GridSpec spec = dpp::parse_map(dpp::read_text_file(map_path));
  dpp::ExperimentConfig config = dpp::load_experiment_config(dpp::read_text_file(config_path));
  config.threads = threads;
  dpp::World world = dpp::build_world(spec, config);
  double gamma_a = gamma_a_flag > 0 ? gamma_a_flag : config.gamma_a_list.front();

  json out;
  out["schema_version"] = 1;
  out["planner"] = planner;
  out["gamma_a"] = gamma_a;
  const auto& names = world.mdp().graph().state_names;

  if (planner == "cpp") {
    dpp::GameValue game = dpp::minimax_value_iteration(world.mdp(), world.grid.interventions,
                                                       config.decoy_penalty);
    json infos = json::array();
    for (std::size_t idx = 0; idx < game.info_sets().size(); ++idx) {
      const dpp::InfoSet& info = game.info_sets()[idx];
      std::string tag;
      for (dpp::Flag f : info.flags)
        tag += f == dpp::Flag::Unknown ? '?' : f == dpp::Flag::Present ? '1' : '0';
      json entry;
      entry["flags"] = tag;
      json moves = json::object(), values = json::object();
      for (dpp::StateId s = 0; s < world.mdp().num_states(); ++s) {
        dpp::StateId m = game.move(s, static_cast<int>(idx));
        if (m != dpp::kNoState) moves[names[s]] = names[m];
        double v = game.value(s, static_cast<int>(idx));
        values[names[s]] = std::isinf(v) ? json("inf") : json(v);
      }
      entry["moves"] = std::move(moves);
      entry["values"] = std::move(values);
      infos.push_back(std::move(entry));
    }
    out["info_sets"] = std::move(infos);
    // the all-unknown layer is the deployed policy
    dpp::PlannerArtifact art = dpp::make_cpp_artifact(
        world, std::make_shared<dpp::GameValue>(std::move(game)), gamma_a);
    json rows = json::object();
    int idx = art.game->info_index(dpp::InfoSet::all_unknown(world.grid.interventions.size()));
    for (dpp::StateId s = 0; s < world.mdp().num_states(); ++s) {
      dpp::StateId m = art.game->move(s, idx);
      if (m != dpp::kNoState) rows[names[s]] = json::object({{names[m], 1.0}});
    }
    out["policy"] = std::move(rows);
  } else {
    dpp::DeceptionKind kind = dpp::kind_from_name(planner);
    dpp::PlannerArtifact art = dpp::make_lp_artifact(world, kind, gamma_a);
    out["policy"] = policy_json(world, art.policy);
    json raw = json::object();
    for (dpp::StateId s = 0; s < world.mdp().num_states(); ++s)
      if (world.mdp().contains(s)) raw[names[s]] = art.field.raw[s];
    out["raw_cost"] = std::move(raw);
    json disc = json::object();
    for (dpp::StateId s = 0; s < world.mdp().num_states(); ++s) {
      if (!world.mdp().contains(s) || world.mdp().is_goal(s)) continue;
      json row = json::object();
      for (dpp::ActionId a = world.mdp().action_begin(s); a < world.mdp().action_end(s); ++a)
        row[names[world.mdp().action(a).to]] = art.field.g(a);
      disc[names[s]] = std::move(row);
    }
    out["discounted_cost"] = std::move(disc);
    if (kind == dpp::DeceptionKind::VobObserver || kind == dpp::DeceptionKind::VobAgent)
      out["cost_matrix"] = cost_matrix_json(world);
    if (kind == dpp::DeceptionKind::VobAgent) {
      auto [raw_vob, induced] =
          dpp::vob_agent_cost(world.beliefs, world.matrix, world.mdp().true_goal());
      json ind = json::object();
      for (dpp::StateId s = 0; s < world.mdp().num_states(); ++s)
        if (induced[s] >= 0) ind[names[s]] = world.grid.interventions[induced[s]].name;
      out["induced_intervention"] = std::move(ind);
    }
    if (!dump_lp_path.empty()) {
      std::ofstream lp(dump_lp_path);
      if (!lp) throw dpp::InputError("file_write", "cannot write " + dump_lp_path);
      dpp::dump_stage1_lp(lp, world.mdp(), art.field.discounted);
    }
  }
  write_file(out_path, out.dump(2) + "\n");
  return 0;
}

int run_sweep(const std::string& map_path, const std::string& config_path,
              const std::string& out_dir, int threads, std::int64_t seed_override) {
  dpp::GridSpec spec = dpp::parse_map(dpp::read_text_file(map_path));
  dpp::ExperimentConfig config = dpp::load_experiment_config(dpp::read_text_file(config_path));
  config.threads = threads;
  if (seed_override >= 0) config.seeds = {static_cast<std::uint64_t>(seed_override)};
  dpp::World world = dpp::build_world(spec, config);
  dpp::SweepTable table = dpp::sweep(world, config);

  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/results.csv", dpp::results_csv(table.rows));
  write_file(out_dir + "/aggregates.json", dpp::aggregates_json(world, table));
  write_file(out_dir + "/trajectories.json", dpp::trajectories_json(world, table));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deceptive path planning under adversarial interventions"};
  app.require_subcommand(1);

  std::string map_path, config_path, planner, out_path, out_dir, dump_lp_path;
  double gamma_a = 0.0;
  int threads = 0;
  std::int64_t seed = -1;

  CLI::App* plan = app.add_subcommand("plan", "synthesize one policy and export it");
  plan->add_option("--map", map_path, "map file")->required();
  plan->add_option("--config", config_path, "experiment config JSON")->required();
  plan->add_option("--planner", planner,
                   "exaggeration|ambiguity|vob_o|vob_a|cpp")->required();
  plan->add_option("--out", out_path, "output JSON path")->required();
  plan->add_option("--gamma-a", gamma_a, "ancillary discount (default: first config entry)");
  plan->add_option("--dump-lp", dump_lp_path, "write the stage-1 LP in LP text format");
  plan->add_option("--threads", threads, "worker threads (DPP_THREADS overrides)");
  plan->add_option("--seed", seed, "unused for plan; accepted for interface symmetry");

  CLI::App* sweep = app.add_subcommand("sweep", "run the intervention-time sweep");
  sweep->add_option("--map", map_path, "map file")->required();
  sweep->add_option("--config", config_path, "experiment config JSON")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--threads", threads, "worker threads (DPP_THREADS overrides)");
  sweep->add_option("--seed", seed, "override the config seed list with one seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    return fail("cli_args", e.what(), 2);
  }

  try {
    int th = effective_threads(threads);
    if (plan->parsed())
      return run_plan(map_path, config_path, planner, out_path, dump_lp_path, gamma_a, th);
    return run_sweep(map_path, config_path, out_dir, th, seed);
  } catch (const dpp::Error& e) {
    return fail(e.code(), e.what(), e.exit_code());
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 3);
  }
}
