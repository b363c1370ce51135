// Command-line front end: suite generation, single searches, episodes,
// benchmarks and rendering. Exit codes: 0 ok, 1 usage error, 2 runtime error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vft/vft.hpp"

namespace fs = std::filesystem;
using namespace vft;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

// Flags that override config fields; unset flags leave the config alone.
struct Overrides {
  std::optional<int> n_max, d_star, m, final_m, budget, max_resolve_iters, grid_n;
  std::optional<double> gamma, r_g_star, r_gp_star, c, final_c;
  std::optional<double> substep, rotation_gain, contact_eps, gripper_width, gripper_depth, approach_clearance,
      effective_distance, max_retraction, retraction_step;
  std::optional<double> max_opening, finger_thickness, finger_width, clearance;
  bool no_concat = false;
  std::string config_path;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--n-max", n_max, "search iterations per push");
    app.add_option("--gamma", gamma, "discount");
    app.add_option("--d-star", d_star, "max pushes from the search root");
    app.add_option("--r-g-star", r_g_star, "grasp threshold");
    app.add_option("--r-gp-star", r_gp_star, "rollout terminal reward");
    app.add_option("--m", m, "top returns averaged in selection");
    app.add_option("--c", c, "exploration weight");
    app.add_option("--final-m", final_m, "top returns for the final choice");
    app.add_option("--final-c", final_c, "exploration weight for the final choice");
    app.add_option("--budget", budget, "episode action budget");
    app.add_flag("--no-concat", no_concat, "count every push separately");
    app.add_option("--substep", substep, "simulator substep (cm)");
    app.add_option("--rotation-gain", rotation_gain, "push rotation gain");
    app.add_option("--max-resolve-iters", max_resolve_iters, "overlap resolution passes per substep");
    app.add_option("--contact-eps", contact_eps, "contact tolerance (cm)");
    app.add_option("--gripper-width", gripper_width, "pushing footprint width (cm)");
    app.add_option("--gripper-depth", gripper_depth, "pushing footprint depth (cm)");
    app.add_option("--approach-clearance", approach_clearance, "gap before contact at push start (cm)");
    app.add_option("--effective-distance", effective_distance, "push travel past contact (cm)");
    app.add_option("--max-retraction", max_retraction, "extra start retraction allowed (cm)");
    app.add_option("--retraction-step", retraction_step, "retraction increment (cm)");
    app.add_option("--max-opening", max_opening, "jaw opening (cm)");
    app.add_option("--finger-thickness", finger_thickness, "finger thickness (cm)");
    app.add_option("--finger-width", finger_width, "finger width (cm)");
    app.add_option("--clearance", clearance, "grasp clearance (cm)");
    app.add_option("--grid-n", grid_n, "grasp grid cells per side");
  }

  Config resolve() const {
    Config cfg = config_path.empty() ? Config{} : parse_config(read_file(config_path));
    const auto set = [](auto& field, const auto& value) {
      if (value) field = *value;
    };
    PlannerConfig& p = cfg.planner;
    set(p.n_max, n_max);
    set(p.gamma, gamma);
    set(p.d_star, d_star);
    set(p.r_g_star, r_g_star);
    set(p.r_gp_star, r_gp_star);
    set(p.m, m);
    set(p.c, c);
    set(p.final_m, final_m);
    set(p.final_c, final_c);
    set(p.episode_action_budget, budget);
    if (no_concat) p.concatenate_pushes = false;
    SimParams& s = cfg.sim;
    set(s.substep, substep);
    set(s.rotation_gain, rotation_gain);
    set(s.max_resolve_iters, max_resolve_iters);
    set(s.contact_eps, contact_eps);
    set(s.gripper.width, gripper_width);
    set(s.gripper.depth, gripper_depth);
    set(s.approach_clearance, approach_clearance);
    set(s.effective_distance, effective_distance);
    set(s.max_retraction, max_retraction);
    set(s.retraction_step, retraction_step);
    GripperSpec& g = cfg.gripper;
    set(g.max_opening, max_opening);
    set(g.finger_thickness, finger_thickness);
    set(g.finger_width, finger_width);
    set(g.clearance, clearance);
    set(cfg.grid_n, grid_n);
    cfg.validate();
    return cfg;
  }
};

std::string format_push(const PushAction& a) {
  std::ostringstream os;
  os.precision(6);
  os << "push start=(" << a.start.x << ", " << a.start.y << ") end=(" << a.end.x << ", " << a.end.y << ")";
  return os.str();
}

std::vector<Scenario> load_suite_dir(const fs::path& dir, const GripperSpec& gripper) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no .json scenarios in " + dir.string());
  std::vector<Scenario> suite;
  for (const fs::path& f : files) suite.push_back({f.stem().string(), load_scenario(read_file(f), gripper)});
  return suite;
}

int cmd_gen_suite(const Config& cfg, const std::string& kind, int count, std::uint64_t seed, const fs::path& out) {
  fs::create_directories(out);
  for (const Scenario& s : gen_suite(parse_suite_kind(kind), count, seed, cfg)) {
    write_file(out / (s.id + ".json"), save_scenario(s.scene));
    std::cout << s.id << " objects=" << s.scene.size() << "\n";
  }
  return 0;
}

int cmd_plan(Config cfg, const fs::path& scene_path, std::uint64_t seed, const std::string& planner,
             const std::string& trace_path, const std::string& dot_path) {
  const Scene scene = load_scenario(read_file(scene_path), cfg.gripper);
  cfg.planner.seed = seed;
  const GraspEvaluator grasp(cfg.gripper, cfg.grid_n);
  const PushGraspDomain domain(cfg.sim, grasp);
  std::cout << "reward " << grasp.max_reward(scene).value << "\n";
  SearchResult<PushAction> result;
  if (parse_planner_kind(planner) == PlannerKind::greedy) {
    Rng rng(seed);
    result = greedy_search(domain, scene, rng);
  } else {
    Mcts<PushGraspDomain> search(domain, cfg.planner, seed);
    std::ofstream trace;
    if (!trace_path.empty()) {
      trace.open(trace_path);
      if (!trace) throw Error("cannot write " + trace_path);
      search.set_observer([&trace](const IterationRecord& r) { trace << to_json_line(r) << '\n'; });
    }
    result = search.run(scene);
    if (!dot_path.empty()) write_file(dot_path, search.to_dot());
  }
  std::cout << format_push(result.action) << " value=" << result.value << " nodes=" << result.nodes
            << " root_children=" << result.root_children << "\n";
  return 0;
}

int cmd_run_episode(Config cfg, const fs::path& scene_path, std::uint64_t seed, const std::string& planner,
                    const std::string& render_dir, const std::string& log_path, const std::string& trace_path) {
  const Scene scene = load_scenario(read_file(scene_path), cfg.gripper);
  cfg.planner.seed = seed;
  const GraspEvaluator grasp(cfg.gripper, cfg.grid_n);
  EpisodeOptions opt;
  opt.planner = parse_planner_kind(planner);
  opt.scenario_id = scene_path.stem().string();
  if (!render_dir.empty()) {
    fs::create_directories(render_dir);
    opt.frames = [&render_dir, &opt](int index, const Scene& s, const Annotations& notes) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04d.svg", index);
      Annotations titled = notes;
      titled.title = opt.scenario_id + " action " + std::to_string(index);
      write_file(fs::path(render_dir) / name, render_svg(s, titled));
    };
  }
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw Error("cannot write " + trace_path);
    opt.trace = [&trace](const IterationRecord& r) { trace << to_json_line(r) << '\n'; };
  }
  const EpisodeLog log = vft_episode(scene, cfg.planner, cfg.sim, grasp, opt);
  for (const StepRecord& r : log.records) {
    std::cout << "#" << r.action_index << " reward=" << r.reward << " ";
    if (r.push) {
      std::cout << format_push(*r.push) << (r.merged ? " (merged)" : "") << " value=" << r.search_value;
    } else if (r.grasp) {
      std::cout << "grasp row=" << r.grasp->row << " col=" << r.grasp->col << " theta=" << r.grasp->theta_index
                << (r.grasp_success ? " ok" : " failed");
    }
    std::cout << "\n";
  }
  std::cout << "outcome " << to_string(log.outcome) << " actions=" << log.action_count << "\n";
  if (!log_path.empty()) write_file(log_path, to_json(log).dump(2) + "\n");
  return 0;
}

int cmd_bench(const Config& cfg, const std::string& suite_arg, int count, std::uint64_t suite_seed,
              const std::string& planner, int repeats, std::uint64_t seed, int jobs, const std::string& out_path) {
  std::vector<Scenario> suite;
  if (fs::is_directory(suite_arg)) {
    suite = load_suite_dir(suite_arg, cfg.gripper);
  } else {
    suite = gen_suite(parse_suite_kind(suite_arg), count, suite_seed, cfg);
  }
  BenchOptions opt;
  opt.planners = planner == "both" ? std::vector<PlannerKind>{PlannerKind::vft, PlannerKind::greedy}
                                   : std::vector<PlannerKind>{parse_planner_kind(planner)};
  opt.repeats = repeats;
  opt.seed = seed;
  opt.jobs = jobs;
  std::ofstream csv;
  if (!out_path.empty()) {
    csv.open(out_path);
    if (!csv) throw Error("cannot write " + out_path);
    opt.csv = &csv;
  }
  const SuiteResult result = run_bench(suite, cfg, opt);
  std::cout << summary_table(result);
  return 0;
}

int cmd_render(const Config& cfg, const fs::path& scene_path, const std::string& out, const std::string& pgm,
               int theta) {
  const Scene scene = load_scenario(read_file(scene_path), cfg.gripper);
  const GraspEvaluator grasp(cfg.gripper, cfg.grid_n);
  Annotations notes;
  notes.title = scene_path.stem().string();
  const GraspSummary best = grasp.max_reward(scene);
  if (best.best) {
    notes.grasps.push_back({grid_for(scene, cfg.grid_n).center(best.best->row, best.best->col), best.best->theta(),
                            cfg.gripper.max_opening});
  }
  write_file(out, render_svg(scene, notes));
  if (!pgm.empty()) write_file(pgm, reward_map_pgm(grasp.reward_map(scene), theta));
  std::cout << "reward " << best.value << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Push-grasp retrieval planner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "vft 1.0");

  Overrides ov;
  std::uint64_t seed = 0;
  std::string scene, planner = "vft", out, trace, dot, render_dir, log_path, pgm, kind, suite;
  int count = 10, repeats = 30, jobs = 1, theta = -1;
  std::uint64_t suite_seed = 0;

  CLI::App* gen = app.add_subcommand("gen-suite", "generate a certified scenario suite");
  gen->add_option("--kind", kind, "easy | packed | trap")->required()->check(CLI::IsMember({"easy", "packed", "trap"}));
  gen->add_option("--count", count, "number of scenarios")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "generation seed");
  gen->add_option("--out", out, "output directory")->required();
  ov.add_to(*gen);

  CLI::App* plan = app.add_subcommand("plan", "one search from one scene");
  plan->add_option("--scene", scene, "scenario JSON")->required()->check(CLI::ExistingFile);
  plan->add_option("--seed", seed, "search seed");
  plan->add_option("--planner", planner, "vft | greedy")->check(CLI::IsMember({"vft", "greedy"}));
  plan->add_option("--trace", trace, "JSON-lines search trace");
  plan->add_option("--dot", dot, "search tree as Graphviz DOT");
  ov.add_to(*plan);

  CLI::App* episode = app.add_subcommand("run-episode", "plan and execute until retrieval or budget");
  episode->add_option("--scene", scene, "scenario JSON")->required()->check(CLI::ExistingFile);
  episode->add_option("--seed", seed, "episode seed");
  episode->add_option("--planner", planner, "vft | greedy")->check(CLI::IsMember({"vft", "greedy"}));
  episode->add_option("--render-dir", render_dir, "write frame_NNNN.svg per action");
  episode->add_option("--log", log_path, "episode log JSON");
  episode->add_option("--trace", trace, "JSON-lines search trace");
  ov.add_to(*episode);

  CLI::App* bench = app.add_subcommand("bench", "repeated seeded episodes over a suite");
  bench->add_option("--suite", suite, "suite directory, or easy | packed | trap to generate one")->required();
  bench->add_option("--count", count, "scenarios when generating")->check(CLI::PositiveNumber);
  bench->add_option("--suite-seed", suite_seed, "generation seed when generating");
  bench->add_option("--planner", planner, "vft | greedy | both")->check(CLI::IsMember({"vft", "greedy", "both"}));
  bench->add_option("--repeats", repeats, "episodes per scenario and planner")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "bench seed")->required();
  bench->add_option("--jobs", jobs, "parallel episodes")->check(CLI::PositiveNumber);
  bench->add_option("--out", out, "CSV output");
  ov.add_to(*bench);

  CLI::App* render = app.add_subcommand("render", "draw a scene as SVG");
  render->add_option("--scene", scene, "scenario JSON")->required()->check(CLI::ExistingFile);
  render->add_option("--out", out, "SVG output")->required();
  render->add_option("--reward-map", pgm, "also write the grasp reward map as PGM");
  render->add_option("--theta", theta, "reward map layer, -1 for the max over angles")->check(CLI::Range(-1, 15));
  ov.add_to(*render);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  Config cfg;
  try {
    cfg = ov.resolve();
  } catch (const std::exception& e) {
    // Bad flag values and bad config files are usage errors.
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    if (*gen) return cmd_gen_suite(cfg, kind, count, seed, out);
    if (*plan) return cmd_plan(cfg, scene, seed, planner, trace, dot);
    if (*episode) return cmd_run_episode(cfg, scene, seed, planner, render_dir, log_path, trace);
    if (*bench) return cmd_bench(cfg, suite, count, suite_seed, planner, repeats, seed, jobs, out);
    if (*render) return cmd_render(cfg, scene, out, pgm, theta);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
