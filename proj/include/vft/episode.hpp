#pragma once

// One retrieval episode: grasp when the best grasp clears the threshold,
// otherwise plan a push (tree search or greedy) and execute it in the
// simulator, until the target is out or the action budget is spent.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vft/domain.hpp"
#include "vft/grasp_eval.hpp"
#include "vft/planner.hpp"
#include "vft/push_sim.hpp"
#include "vft/scene.hpp"
#include "vft/svg.hpp"

namespace vft {

enum class PlannerKind { vft, greedy };
enum class Outcome { success, budget_exhausted, no_actions };

inline const char* to_string(PlannerKind k) { return k == PlannerKind::vft ? "vft" : "greedy"; }
inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::budget_exhausted: return "budget_exhausted";
    case Outcome::no_actions: return "no_actions";
  }
  return "?";
}

struct StepRecord {
  int action_index = 0;  // counted action this step belongs to, 1-based
  SceneHash state_hash;  // state the decision was made in
  double reward = 0.0;   // max grasp reward of that state
  std::optional<PushAction> push;
  std::optional<GraspAction> grasp;
  bool merged = false;  // push concatenated onto the previous counted push
  bool grasp_success = false;
  double wall_ms = 0.0;
  // Search statistics for pushes.
  double search_value = 0.0;
  int iterations = 0;
  std::size_t nodes = 0;
  std::size_t root_children = 0;
};

struct EpisodeLog {
  std::string scenario_id;
  std::uint64_t seed = 0;
  PlannerKind planner = PlannerKind::vft;
  std::vector<StepRecord> records;
  Outcome outcome = Outcome::budget_exhausted;
  int action_count = 0;
  int grasp_attempts = 0;
  int grasp_successes = 0;
  int pushes = 0;  // counted push actions
  double wall_ms = 0.0;
  Scene final_scene;
};

// Called with (frame index, scene, annotations); a merged push re-emits the
// frame of the push it extends.
using FrameSink = std::function<void(int, const Scene&, const Annotations&)>;

// A push continues the previous one when it heads the same way and starts on
// the previous line, no further back than the approach clearance from where
// the previous push ended.
inline bool continues_push(const PushAction& prev, const PushAction& next, const SimParams& sim) {
  const Vec2 d = prev.direction();
  if (dot(d, next.direction()) < std::cos(deg_to_rad(0.5))) return false;
  const Vec2 gap = next.start - prev.end;
  if (std::abs(cross(d, gap)) > 0.05) return false;
  const double along = dot(d, gap);
  return along <= 1e-6 && along >= -(sim.approach_clearance + 1e-6);
}

inline std::uint64_t decision_seed(std::uint64_t seed, int decision) {
  return detail::combine(seed, static_cast<std::uint64_t>(decision));
}

struct EpisodeOptions {
  PlannerKind planner = PlannerKind::vft;
  std::string scenario_id;
  FrameSink frames;
  std::function<void(const IterationRecord&)> trace;
};

inline EpisodeLog vft_episode(const Scene& start, const PlannerConfig& cfg, const SimParams& sim,
                              const GraspEvaluator& grasp, const EpisodeOptions& opt = {}) {
  cfg.validate();
  sim.validate();
  using clock = std::chrono::steady_clock;
  const auto ms_since = [](clock::time_point t) {
    return std::chrono::duration<double, std::milli>(clock::now() - t).count();
  };
  const auto episode_start = clock::now();
  const PushGraspDomain domain(sim, grasp);
  const GridSpec grid = grid_for(start, grasp.grid_n());

  EpisodeLog log;
  log.scenario_id = opt.scenario_id;
  log.seed = cfg.seed;
  log.planner = opt.planner;
  Scene scene = start;
  if (opt.frames) opt.frames(0, scene, {});

  bool force_push = false;
  PushAction last_push;  // push that a next push may extend, valid when has_last_push
  bool has_last_push = false;
  Annotations last_push_notes;
  int decision = 0;
  const int max_decisions = 4 * cfg.episode_action_budget + 4;
  while (log.action_count < cfg.episode_action_budget && decision < max_decisions) {
    const auto t0 = clock::now();
    StepRecord rec;
    rec.state_hash = scene_hash(scene);
    const GraspSummary best = grasp.max_reward(scene);
    rec.reward = best.value;
    if (!force_push && best.value > cfg.r_g_star && best.best) {
      // Execute the grasp; the exact check can disagree with a memoized
      // value computed for a scene in the same hash bins.
      rec.grasp = best.best;
      rec.grasp_success = is_grasp_feasible(scene, *best.best, grasp.spec(), grid);
      ++log.action_count;
      ++log.grasp_attempts;
      rec.action_index = log.action_count;
      has_last_push = false;
      Annotations notes;
      notes.grasps.push_back({grid.center(best.best->row, best.best->col), best.best->theta(), grasp.spec().max_opening});
      if (rec.grasp_success) {
        ++log.grasp_successes;
        scene = scene.without(*scene.target_index());
      } else {
        force_push = true;
      }
      rec.wall_ms = ms_since(t0);
      log.records.push_back(rec);
      if (opt.frames) opt.frames(log.action_count, scene, notes);
      ++decision;
      if (rec.grasp_success) {
        log.outcome = Outcome::success;
        break;
      }
      continue;
    }

    std::optional<SearchResult<PushAction>> plan;
    try {
      if (opt.planner == PlannerKind::vft) {
        Mcts<PushGraspDomain> search(domain, cfg, decision_seed(cfg.seed, decision));
        if (opt.trace) search.set_observer(opt.trace);
        plan = search.run(scene);
      } else {
        Rng rng(decision_seed(cfg.seed, decision));
        plan = greedy_search(domain, scene, rng);
      }
    } catch (const NoActionsError&) {
      log.outcome = Outcome::no_actions;
      break;
    }
    ++decision;
    force_push = false;
    const PushAction push = plan->action;
    scene = simulate_push(scene, push, sim).scene_after;
    rec.push = push;
    rec.search_value = plan->value;
    rec.iterations = plan->iterations;
    rec.nodes = plan->nodes;
    rec.root_children = plan->root_children;
    if (cfg.concatenate_pushes && has_last_push && continues_push(last_push, push, sim)) {
      rec.merged = true;
      last_push_notes.arrows.back().to = push.end;
    } else {
      ++log.action_count;
      ++log.pushes;
      last_push_notes = {};
      last_push_notes.arrows.push_back({push.start, push.end});
    }
    last_push = push;
    has_last_push = true;
    rec.action_index = log.action_count;
    rec.wall_ms = ms_since(t0);
    log.records.push_back(rec);
    if (opt.frames) opt.frames(log.action_count, scene, last_push_notes);
  }
  log.final_scene = scene;
  log.wall_ms = ms_since(episode_start);
  return log;
}

}  // namespace vft
