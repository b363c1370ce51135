#pragma once

#include <optional>
#include <vector>

#include "vft/actions.hpp"
#include "vft/grasp_eval.hpp"
#include "vft/planner.hpp"
#include "vft/push_sim.hpp"
#include "vft/scene.hpp"

namespace vft {

// Scenes as states, pushes as actions, simulate_push as the transition and
// the memoized max grasp reward as the state value.
class PushGraspDomain {
 public:
  using State = Scene;
  using Action = PushAction;

  PushGraspDomain(const SimParams& sim, const GraspEvaluator& grasp) : sim_(sim), grasp_(grasp) {}

  std::vector<PushAction> actions(const Scene& s) const { return sample_action_space(s, sim_); }
  Scene step(const Scene& s, const PushAction& a) const { return simulate_push(s, a, sim_).scene_after; }
  double reward(const Scene& s) const { return grasp_.max_reward(s).value; }
  std::optional<PushAction> random_action(const Scene& s, Rng& rng) const { return random_push_action(s, sim_, rng); }

  const SimParams& sim() const { return sim_; }
  const GraspEvaluator& grasp() const { return grasp_; }

 private:
  const SimParams& sim_;
  const GraspEvaluator& grasp_;
};

static_assert(SearchDomain<PushGraspDomain>);

}  // namespace vft
