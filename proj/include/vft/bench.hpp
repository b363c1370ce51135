#pragma once

// Scenario suites and the benchmark harness. Generated suites are certified
// by oracle checks before they are returned:
//   easy   - target not graspable, greedy retrieves it in 2 actions
//   packed - target ringed by 6-10 blocks, not graspable
//   trap   - packed plus an outer ring; no single push makes the target
//            graspable, but some sequence of two pushes does

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "vft/actions.hpp"
#include "vft/config.hpp"
#include "vft/episode.hpp"
#include "vft/rng.hpp"
#include "vft/scenario_io.hpp"

namespace vft {

enum class SuiteKind { easy, packed, trap };

inline const char* to_string(SuiteKind k) {
  switch (k) {
    case SuiteKind::easy: return "easy";
    case SuiteKind::packed: return "packed";
    case SuiteKind::trap: return "trap";
  }
  return "?";
}

inline SuiteKind parse_suite_kind(std::string_view s) {
  if (s == "easy") return SuiteKind::easy;
  if (s == "packed") return SuiteKind::packed;
  if (s == "trap") return SuiteKind::trap;
  throw ConfigError("unknown suite kind '" + std::string(s) + "'");
}

inline PlannerKind parse_planner_kind(std::string_view s) {
  if (s == "vft") return PlannerKind::vft;
  if (s == "greedy") return PlannerKind::greedy;
  throw ConfigError("unknown planner '" + std::string(s) + "'");
}

struct Scenario {
  std::string id;
  Scene scene;
};

struct GenerationError : Error {
  using Error::Error;
};

// Whether some push from `scene` reaches a state with reward >= threshold.
inline bool single_push_reaches(const Scene& scene, const SimParams& sim, const GraspEvaluator& grasp,
                                double threshold) {
  for (const PushAction& a : sample_action_space(scene, sim)) {
    if (grasp.max_reward(simulate_push(scene, a, sim).scene_after).value >= threshold) return true;
  }
  return false;
}

// Whether some pair of pushes reaches a state with reward >= threshold.
inline bool two_pushes_reach(const Scene& scene, const SimParams& sim, const GraspEvaluator& grasp, double threshold) {
  for (const PushAction& a : sample_action_space(scene, sim)) {
    const Scene next = simulate_push(scene, a, sim).scene_after;
    if (grasp.max_reward(next).value >= threshold) return true;
    if (single_push_reaches(next, sim, grasp, threshold)) return true;
  }
  return false;
}

namespace detail {

struct Block {
  double x0, x1, y0, y1;  // layout frame
};

// Places axis-aligned layout blocks in the workspace, rotated by phi about
// `center`, and round-trips the scene through the file format so the
// returned scene is exactly what a saved suite reloads as.
inline Scene place_blocks(const std::vector<Block>& blocks, std::size_t target, Vec2 center, double phi,
                          const GripperSpec& gripper) {
  std::vector<std::pair<ObjectSpec, Pose2D>> objs;
  int n = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    const Vec2 local{(b.x0 + b.x1) / 2, (b.y0 + b.y1) / 2};
    const bool is_target = i == target;
    std::string id = is_target ? "target" : "n" + std::to_string(n++);
    objs.emplace_back(ObjectSpec::make(std::move(id), BoxShape{b.x1 - b.x0, b.y1 - b.y0}, is_target),
                      Pose2D(center + rotate(local, phi), phi));
  }
  return load_scenario(save_scenario(Scene::make(kWorkspaceSide, std::move(objs))), gripper);
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Splits `cells` consecutive grid cells into runs of 1..max_run cells.
inline std::vector<std::pair<int, int>> runs(Rng& rng, int cells, int max_run) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < cells;) {
    const int len = std::min(cells - i, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_run))));
    out.emplace_back(i, i + len);
    i += len;
  }
  return out;
}

// Grid lines for `widths` cells centred on the middle cell, with a gap after
// every cell but the last.
inline std::vector<std::pair<double, double>> cell_spans(const std::vector<double>& widths,
                                                         const std::vector<double>& gaps) {
  std::vector<std::pair<double, double>> spans;
  const std::size_t mid = widths.size() / 2;
  double x = -widths[mid] / 2;
  for (std::size_t i = mid; i-- > 0;) x -= gaps[i] + widths[i];
  for (std::size_t i = 0; i < widths.size(); ++i) {
    spans.emplace_back(x, x + widths[i]);
    x += widths[i] + (i + 1 < widths.size() ? gaps[i] : 0.0);
  }
  return spans;
}

// Target in the middle of a 3x3 (ring = 1) or 5x5 (ring = 2) cell layout.
// The inner ring has 6-10 blocks: corners may merge into a neighbouring side
// cell and side cells may split in two. Outer ring sides are cut into bars.
inline std::vector<Block> ring_layout(Rng& rng, int rings, double max_gap) {
  const int n = 2 * rings + 1;
  std::vector<double> w(static_cast<std::size_t>(n)), h(static_cast<std::size_t>(n));
  std::vector<double> gw(static_cast<std::size_t>(n - 1)), gh(static_cast<std::size_t>(n - 1));
  for (int i = 0; i < n; ++i) {
    const bool mid = i == rings;
    w[static_cast<std::size_t>(i)] = mid ? uniform(rng, 3.0, 4.5) : uniform(rng, 2.5, 4.0);
    h[static_cast<std::size_t>(i)] = mid ? uniform(rng, 3.0, 4.5) : uniform(rng, 2.5, 4.0);
  }
  for (auto& g : gw) g = uniform(rng, 0.0, max_gap);
  for (auto& g : gh) g = uniform(rng, 0.0, max_gap);
  const auto xs = cell_spans(w, gw);
  const auto ys = cell_spans(h, gh);
  const auto cell = [&](int c0, int c1, int r0, int r1) {
    return Block{xs[static_cast<std::size_t>(c0)].first, xs[static_cast<std::size_t>(c1)].second,
                 ys[static_cast<std::size_t>(r0)].first, ys[static_cast<std::size_t>(r1)].second};
  };

  std::vector<Block> out{cell(rings, rings, rings, rings)};
  // Inner ring, cells relative to the target: corners (lo/hi, lo/hi) and sides.
  const int lo = rings - 1, mid = rings, hi = rings + 1;
  const int count = 6 + static_cast<int>(rng.below(5));
  int merges = std::max(0, 8 - count);
  int splits = std::max(0, count - 8);
  // Corner k merges along row (into the bottom/top side) or along column.
  struct Corner {
    int c, r;
  };
  const Corner corners[4] = {{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}};
  bool side_taken[4] = {false, false, false, false};  // bottom, right, top, left
  bool corner_merged[4] = {false, false, false, false};
  for (int k = 0; k < 4 && merges > 0; ++k) {
    const int idx = static_cast<int>(rng.below(4));
    if (corner_merged[idx]) continue;
    const Corner cr = corners[idx];
    const bool along_row = rng.below(2) == 0;
    const int side = along_row ? (cr.r == lo ? 0 : 2) : (cr.c == hi ? 1 : 3);
    if (side_taken[side]) continue;
    side_taken[side] = true;
    corner_merged[idx] = true;
    --merges;
    if (along_row) {
      out.push_back(cell(std::min(cr.c, mid), std::max(cr.c, mid), cr.r, cr.r));
    } else {
      out.push_back(cell(cr.c, cr.c, std::min(cr.r, mid), std::max(cr.r, mid)));
    }
  }
  for (int k = 0; k < 4; ++k) {
    if (!corner_merged[k]) out.push_back(cell(corners[k].c, corners[k].c, corners[k].r, corners[k].r));
  }
  const Corner sides[4] = {{mid, lo}, {hi, mid}, {mid, hi}, {lo, mid}};
  for (int k = 0; k < 4; ++k) {
    if (side_taken[k]) continue;
    const Block b = cell(sides[k].c, sides[k].c, sides[k].r, sides[k].r);
    if (splits > 0 && rng.below(2) == 0) {
      --splits;
      const double g = uniform(rng, 0.0, max_gap);
      if (k % 2 == 0) {
        const double m = (b.x0 + b.x1) / 2;
        out.push_back({b.x0, m - g / 2, b.y0, b.y1});
        out.push_back({m + g / 2, b.x1, b.y0, b.y1});
      } else {
        const double m = (b.y0 + b.y1) / 2;
        out.push_back({b.x0, b.x1, b.y0, m - g / 2});
        out.push_back({b.x0, b.x1, m + g / 2, b.y1});
      }
    } else {
      out.push_back(b);
    }
  }
  if (rings == 2) {
    const int e = n - 1;
    for (auto [a, b] : runs(rng, n, 3)) out.push_back(cell(a, b - 1, 0, 0));          // bottom
    for (auto [a, b] : runs(rng, n - 1, 3)) out.push_back(cell(e, e, a + 1, b));      // right
    for (auto [a, b] : runs(rng, n - 1, 3)) out.push_back(cell(e - b, e - 1 - a, e, e));  // top
    for (auto [a, b] : runs(rng, n - 2, 3)) out.push_back(cell(0, 0, a + 1, b));      // left
  }
  return out;
}

// Target with 1-3 flush neighbours and an open approach. One neighbour or two
// opposite ones need a target longer than the gripper opens; three
// neighbours leave one face of a compact target open.
inline std::vector<Block> easy_layout(Rng& rng, double max_gap) {
  const int count = 1 + static_cast<int>(rng.below(3));
  const double tw = uniform(rng, 3.0, 4.5);
  const double th = count < 3 ? uniform(rng, 9.0, 11.0) : uniform(rng, 3.0, 4.5);
  std::vector<Block> out{{-tw / 2, tw / 2, -th / 2, th / 2}};
  const auto side_block = [&](int side) {
    const double t = uniform(rng, 2.0, 4.0);
    const double g = uniform(rng, 0.0, max_gap);
    const double lo = -th / 2 - uniform(rng, 0.0, 1.0);
    const double hi = th / 2 + (count == 3 ? 0.0 : uniform(rng, 0.0, 1.0));
    if (side == 0) return Block{-tw / 2 - g - t, -tw / 2 - g, lo, hi};
    if (side == 1) return Block{tw / 2 + g, tw / 2 + g + t, lo, hi};
    return Block{-tw / 2, tw / 2, th / 2 + g, th / 2 + g + t};
  };
  if (count == 1) {
    out.push_back(side_block(static_cast<int>(rng.below(2))));
  } else {
    out.push_back(side_block(0));
    out.push_back(side_block(1));
    if (count == 3) out.push_back(side_block(2));
  }
  return out;
}

}  // namespace detail

inline Scenario gen_scenario(SuiteKind kind, int index, std::uint64_t seed, const Config& cfg = {},
                             int max_attempts = 200) {
  const GraspEvaluator grasp(cfg.gripper, cfg.grid_n);
  const double max_gap = 0.2;  // well under a finger plus its clearance
  char id[32];
  std::snprintf(id, sizeof id, "%s_%03d", to_string(kind), index);
  Rng rng(detail::combine(detail::combine(seed, detail::fnv1a(to_string(kind))), static_cast<std::uint64_t>(index)));
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const std::vector<detail::Block> blocks =
        kind == SuiteKind::easy ? detail::easy_layout(rng, max_gap) : detail::ring_layout(rng, kind == SuiteKind::trap ? 2 : 1, max_gap);
    const Vec2 center{kWorkspaceSide / 2 + detail::uniform(rng, -1.0, 1.0),
                      kWorkspaceSide / 2 + detail::uniform(rng, -1.0, 1.0)};
    const double phi = detail::uniform(rng, 0.0, kPi / 2);
    Scene scene;
    try {
      scene = detail::place_blocks(blocks, 0, center, phi, cfg.gripper);
    } catch (const ValidationError&) {
      continue;
    }
    if (grasp.max_reward(scene).value > 0.0) continue;
    if (kind == SuiteKind::easy) {
      PlannerConfig pc = cfg.planner;
      pc.seed = seed;
      const EpisodeLog log = vft_episode(scene, pc, cfg.sim, grasp, {PlannerKind::greedy, id, {}, {}});
      if (log.outcome != Outcome::success || log.action_count != 2) continue;
    } else if (kind == SuiteKind::trap) {
      if (single_push_reaches(scene, cfg.sim, grasp, 1.0)) continue;
      if (!two_pushes_reach(scene, cfg.sim, grasp, 1.0)) continue;
    }
    return {id, std::move(scene)};
  }
  throw GenerationError(std::string("gen_suite: no certified ") + to_string(kind) + " scenario after " +
                        std::to_string(max_attempts) + " attempts");
}

inline std::vector<Scenario> gen_suite(SuiteKind kind, int count, std::uint64_t seed, const Config& cfg = {}) {
  if (count < 1) throw ConfigError("gen_suite: count must be >= 1");
  std::vector<Scenario> out;
  for (int i = 0; i < count; ++i) out.push_back(gen_scenario(kind, i, seed, cfg));
  return out;
}

inline nlohmann::json to_json(const EpisodeLog& log) {
  nlohmann::json records = nlohmann::json::array();
  for (const StepRecord& r : log.records) {
    nlohmann::json j{{"action_index", r.action_index},
                     {"state_hash", r.state_hash.value},
                     {"reward", r.reward},
                     {"wall_ms", r.wall_ms}};
    if (r.push) {
      j["action"] = {{"kind", "push"},
                     {"start", {r.push->start.x, r.push->start.y}},
                     {"end", {r.push->end.x, r.push->end.y}},
                     {"merged", r.merged}};
      j["search"] = {{"value", r.search_value},
                     {"iterations", r.iterations},
                     {"nodes", r.nodes},
                     {"root_children", r.root_children}};
    } else if (r.grasp) {
      j["action"] = {{"kind", "grasp"},
                     {"row", r.grasp->row},
                     {"col", r.grasp->col},
                     {"theta_index", r.grasp->theta_index},
                     {"success", r.grasp_success}};
    }
    records.push_back(std::move(j));
  }
  return {{"scenario", log.scenario_id},
          {"seed", log.seed},
          {"planner", to_string(log.planner)},
          {"outcome", to_string(log.outcome)},
          {"actions", log.action_count},
          {"pushes", log.pushes},
          {"grasp_attempts", log.grasp_attempts},
          {"grasp_successes", log.grasp_successes},
          {"wall_ms", log.wall_ms},
          {"records", std::move(records)}};
}

// One CSV row.
struct EpisodeRow {
  std::string scenario;
  PlannerKind planner = PlannerKind::vft;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::budget_exhausted;
  int actions = 0;
  int grasp_attempts = 0;
  int grasp_successes = 0;
  double wall_ms = 0.0;
};

inline constexpr const char* kCsvHeader = "scenario,planner,seed,outcome,actions,grasp_attempts,grasp_successes,wall_ms";

inline std::string to_csv(const EpisodeRow& r) {
  std::ostringstream os;
  os << r.scenario << ',' << to_string(r.planner) << ',' << r.seed << ',' << to_string(r.outcome) << ',' << r.actions
     << ',' << r.grasp_attempts << ',' << r.grasp_successes << ',' << std::fixed << std::setprecision(3) << r.wall_ms;
  return os.str();
}

struct ScenarioStats {
  std::string scenario;
  PlannerKind planner = PlannerKind::vft;
  int repeats = 0;
  int successes = 0;
  int grasp_attempts = 0;
  int grasp_successes = 0;
  double mean_actions = 0.0;
  double completion_rate = 0.0;
  double grasp_success_rate = 0.0;  // 0 when no grasp was attempted
};

struct SuiteResult {
  std::vector<EpisodeRow> rows;             // scenario-major, then planner, then repeat
  std::vector<ScenarioStats> per_scenario;  // per (scenario, planner)
  std::vector<ScenarioStats> per_planner;   // all scenarios pooled; scenario is "*"
};

inline std::vector<ScenarioStats> summarize(const std::vector<EpisodeRow>& rows, bool pool_scenarios) {
  std::vector<ScenarioStats> out;
  std::map<std::pair<std::string, int>, std::size_t> index;
  std::vector<long long> action_sums;
  for (const EpisodeRow& r : rows) {
    const std::string name = pool_scenarios ? "*" : r.scenario;
    const auto key = std::make_pair(name, static_cast<int>(r.planner));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({name, r.planner});
      action_sums.push_back(0);
    }
    ScenarioStats& s = out[it->second];
    ++s.repeats;
    s.successes += r.outcome == Outcome::success ? 1 : 0;
    s.grasp_attempts += r.grasp_attempts;
    s.grasp_successes += r.grasp_successes;
    action_sums[it->second] += r.actions;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    ScenarioStats& s = out[i];
    s.mean_actions = static_cast<double>(action_sums[i]) / s.repeats;
    s.completion_rate = static_cast<double>(s.successes) / s.repeats;
    s.grasp_success_rate = s.grasp_attempts ? static_cast<double>(s.grasp_successes) / s.grasp_attempts : 0.0;
  }
  return out;
}

inline std::uint64_t episode_seed(std::uint64_t seed, std::string_view scenario, int repeat) {
  return seed ^ detail::combine(detail::fnv1a(scenario), static_cast<std::uint64_t>(repeat));
}

struct BenchOptions {
  std::vector<PlannerKind> planners{PlannerKind::vft};
  int repeats = 30;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::ostream* csv = nullptr;  // rows are written in order as soon as they are final
};

inline SuiteResult run_bench(const std::vector<Scenario>& suite, const Config& cfg, const BenchOptions& opt) {
  cfg.validate();
  if (suite.empty()) throw ConfigError("bench: empty suite");
  if (opt.repeats < 1) throw ConfigError("bench: repeats must be >= 1");
  if (opt.planners.empty()) throw ConfigError("bench: no planner selected");
  if (opt.jobs < 1) throw ConfigError("bench: jobs must be >= 1");

  struct Job {
    std::size_t scenario;
    PlannerKind planner;
    int repeat;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < suite.size(); ++s) {
    for (PlannerKind p : opt.planners) {
      for (int r = 0; r < opt.repeats; ++r) jobs.push_back({s, p, r});
    }
  }

  SuiteResult result;
  result.rows.resize(jobs.size());
  std::vector<bool> done(jobs.size(), false);
  std::size_t written = 0;
  std::mutex mu;
  if (opt.csv) {
    nlohmann::json header = to_json(cfg);
    header["planner"].erase("seed");
    *opt.csv << "# config " << header.dump() << '\n';
    *opt.csv << "# bench seed=" << opt.seed << " repeats=" << opt.repeats << " scenarios=" << suite.size() << '\n';
    *opt.csv << kCsvHeader << '\n';
    opt.csv->flush();
  }

  const auto run_one = [&](std::size_t k) {
    const Job& job = jobs[k];
    const Scenario& sc = suite[job.scenario];
    PlannerConfig pc = cfg.planner;
    pc.seed = episode_seed(opt.seed, sc.id, job.repeat);
    const GraspEvaluator grasp(cfg.gripper, cfg.grid_n);
    EpisodeOptions eo;
    eo.planner = job.planner;
    eo.scenario_id = sc.id;
    const EpisodeLog log = vft_episode(sc.scene, pc, cfg.sim, grasp, eo);
    EpisodeRow row{sc.id, job.planner, pc.seed, log.outcome, log.action_count, log.grasp_attempts,
                   log.grasp_successes, log.wall_ms};
    std::lock_guard lock(mu);
    result.rows[k] = std::move(row);
    done[k] = true;
    while (written < jobs.size() && done[written]) {
      if (opt.csv) {
        *opt.csv << to_csv(result.rows[written]) << '\n';
        opt.csv->flush();
      }
      ++written;
    }
  };

  if (opt.jobs == 1) {
    for (std::size_t k = 0; k < jobs.size(); ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (int t = 0; t < opt.jobs; ++t) {
      workers.emplace_back([&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) run_one(k);
      });
    }
  }
  result.per_scenario = summarize(result.rows, false);
  result.per_planner = summarize(result.rows, true);
  return result;
}

inline std::string summary_table(const SuiteResult& r) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "scenario" << std::setw(8) << "planner" << std::right << std::setw(8) << "runs"
     << std::setw(12) << "completion" << std::setw(10) << "grasp" << std::setw(10) << "actions" << '\n';
  const auto line = [&os](const ScenarioStats& s) {
    os << std::left << std::setw(14) << s.scenario << std::setw(8) << to_string(s.planner) << std::right
       << std::setw(8) << s.repeats << std::fixed << std::setprecision(3) << std::setw(12) << s.completion_rate
       << std::setw(10) << s.grasp_success_rate << std::setw(10) << s.mean_actions << '\n';
  };
  for (const ScenarioStats& s : r.per_scenario) line(s);
  for (const ScenarioStats& s : r.per_planner) line(s);
  return os.str();
}

}  // namespace vft
