#pragma once

#include "vft/actions.hpp"
#include "vft/bench.hpp"
#include "vft/config.hpp"
#include "vft/domain.hpp"
#include "vft/episode.hpp"
#include "vft/errors.hpp"
#include "vft/geometry.hpp"
#include "vft/grasp_eval.hpp"
#include "vft/planner.hpp"
#include "vft/push_sim.hpp"
#include "vft/rng.hpp"
#include "vft/scenario_io.hpp"
#include "vft/scene.hpp"
#include "vft/svg.hpp"
