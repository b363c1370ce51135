#pragma once

// Monte-Carlo tree search over imagined push outcomes, generic over a search
// domain, plus the depth-one greedy baseline.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vft/errors.hpp"
#include "vft/rng.hpp"

namespace vft {

struct PlannerConfig {
  int n_max = 150;
  double gamma = 0.8;
  int d_star = 4;
  double r_g_star = 0.8;
  double r_gp_star = 1.0;
  int m = 3;
  double c = 2.0;
  int final_m = 1;
  double final_c = 0.0;
  std::uint64_t seed = 0;
  int episode_action_budget = 15;
  bool concatenate_pushes = true;

  void validate() const {
    if (n_max < 1) throw ConfigError("planner: n_max must be >= 1");
    if (!(gamma > 0 && gamma <= 1)) throw ConfigError("planner: gamma must be in (0, 1]");
    if (d_star < 1) throw ConfigError("planner: d_star must be >= 1");
    if (!(r_g_star >= 0 && r_g_star <= 1)) throw ConfigError("planner: r_g_star must be in [0, 1]");
    if (!(r_gp_star >= 0 && r_gp_star <= 1)) throw ConfigError("planner: r_gp_star must be in [0, 1]");
    if (m < 1 || final_m < 1) throw ConfigError("planner: m and final_m must be >= 1");
    if (c < 0 || final_c < 0) throw ConfigError("planner: c and final_c must be >= 0");
    if (episode_action_budget < 1) throw ConfigError("planner: episode_action_budget must be >= 1");
  }
  bool operator==(const PlannerConfig&) const = default;
};

template <class D>
concept SearchDomain = requires(const D& d, const typename D::State& s, const typename D::Action& a, Rng& rng) {
  { d.actions(s) } -> std::convertible_to<std::vector<typename D::Action>>;
  { d.step(s, a) } -> std::convertible_to<typename D::State>;
  { d.reward(s) } -> std::convertible_to<double>;
  { d.random_action(s, rng) } -> std::convertible_to<std::optional<typename D::Action>>;
};

// Mean of the min(N, m) largest returns plus the exploration bonus
// c * sqrt(ln(parent_visits) / N).
inline double uct_value(const std::vector<double>& q, int parent_visits, int m, double c) {
  if (q.empty()) throw Error("uct: child has no visits");
  const std::size_t k = std::min(q.size(), static_cast<std::size_t>(m));
  std::vector<double> top(q);
  std::partial_sort(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(k), top.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += top[i];
  const double n = static_cast<double>(q.size());
  return sum / static_cast<double>(k) + c * std::sqrt(std::log(static_cast<double>(parent_visits)) / n);
}

template <class State, class Action>
struct TreeNode {
  std::size_t id = 0;
  State state;
  std::optional<Action> incoming;
  TreeNode* parent = nullptr;
  int depth = 0;
  double reward = 0.0;  // max grasp reward of `state`
  bool terminal = false;
  int visits = 0;         // N
  int self_visits = 0;    // iterations that stopped here rather than in a child
  std::vector<double> q;  // one return per visit; empty at the root
  bool actions_ready = false;
  std::vector<Action> untried;
  std::vector<std::unique_ptr<TreeNode>> children;

  bool expandable() const { return !untried.empty(); }
};

template <class State, class Action>
double uct(const TreeNode<State, Action>& child, const TreeNode<State, Action>& parent, int m, double c) {
  return uct_value(child.q, parent.visits, m, c);
}

// One search iteration, for tracing and for checking the back-propagation
// law offline.
struct IterationRecord {
  int iteration = 0;
  std::vector<std::size_t> path;          // root first, ends at the rollout start
  std::optional<std::size_t> expanded;    // node created this iteration
  std::vector<double> rollout_rewards;    // undiscounted rewards of simulated states, d = 1, 2, ...
  std::vector<double> path_rewards;       // rewards of path nodes, leaf first, root excluded
  std::vector<double> backed_up;          // value appended to Q, leaf first
};

inline std::string to_json_line(const IterationRecord& r) {
  std::ostringstream os;
  os.precision(17);
  const auto list = [&os](const auto& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ']';
  };
  os << "{\"iteration\":" << r.iteration << ",\"path\":";
  list(r.path);
  os << ",\"expanded\":";
  if (r.expanded) {
    os << *r.expanded;
  } else {
    os << "null";
  }
  os << ",\"rollout_depth\":" << r.rollout_rewards.size() << ",\"rollout_rewards\":";
  list(r.rollout_rewards);
  os << ",\"path_rewards\":";
  list(r.path_rewards);
  os << ",\"backed_up\":";
  list(r.backed_up);
  os << "}";
  return os.str();
}

template <class Action>
struct SearchResult {
  Action action;
  double value = 0.0;  // max-Q of the chosen root child
  int iterations = 0;
  std::size_t nodes = 0;
  std::size_t root_children = 0;
  int max_depth = 0;
};

template <SearchDomain D>
class Mcts {
 public:
  using State = typename D::State;
  using Action = typename D::Action;
  using Node = TreeNode<State, Action>;
  using Observer = std::function<void(const IterationRecord&)>;

  Mcts(const D& domain, PlannerConfig cfg, std::uint64_t seed) : domain_(domain), cfg_(cfg), rng_(seed) {
    cfg_.validate();
  }

  void set_observer(Observer obs) { observer_ = std::move(obs); }

  SearchResult<Action> run(const State& root_state) {
    root_ = make_node(root_state, std::nullopt, nullptr);
    prepare(*root_);
    if (root_->untried.empty()) throw NoActionsError();
    for (int i = 1; i <= cfg_.n_max; ++i) iterate(i);
    return result();
  }

  const Node& root() const { return *root_; }
  std::size_t node_count() const { return next_id_; }

  // Tree snapshot for Graphviz.
  std::string to_dot() const {
    std::ostringstream os;
    os << "digraph search {\n  node [shape=box, fontname=monospace];\n";
    std::vector<const Node*> stack{root_.get()};
    while (!stack.empty()) {
      const Node* n = stack.back();
      stack.pop_back();
      double best = 0.0;
      for (double v : n->q) best = std::max(best, v);
      os << "  n" << n->id << " [label=\"#" << n->id << " d=" << n->depth << "\\nN=" << n->visits << " maxQ=" << best
         << "\\nR=" << n->reward << "\"" << (n->reward >= cfg_.r_gp_star ? ", color=green" : "") << "];\n";
      for (const auto& ch : n->children) {
        os << "  n" << n->id << " -> n" << ch->id << ";\n";
        stack.push_back(ch.get());
      }
    }
    os << "}\n";
    return os.str();
  }

 private:
  std::unique_ptr<Node> make_node(State state, std::optional<Action> incoming, Node* parent) {
    auto n = std::make_unique<Node>();
    n->id = next_id_++;
    n->reward = domain_.reward(state);
    n->state = std::move(state);
    n->incoming = std::move(incoming);
    n->parent = parent;
    n->depth = parent ? parent->depth + 1 : 0;
    n->terminal = parent && (n->depth >= cfg_.d_star || n->reward >= cfg_.r_gp_star);
    return n;
  }

  void prepare(Node& n) {
    if (n.actions_ready) return;
    n.actions_ready = true;
    if (!n.terminal) n.untried = domain_.actions(n.state);
  }

  Node* select_child(Node& n) {
    Node* best = nullptr;
    double best_value = -std::numeric_limits<double>::infinity();
    for (const auto& ch : n.children) {
      const double v = uct(*ch, n, cfg_.m, cfg_.c);
      if (v > best_value) {
        best_value = v;
        best = ch.get();
      }
    }
    return best;
  }

  void iterate(int iteration) {
    IterationRecord rec;
    rec.iteration = iteration;
    Node* node = root_.get();
    rec.path.push_back(node->id);
    // Selection: descend while the node is fully expanded.
    for (;;) {
      prepare(*node);
      if (node->expandable() || node->children.empty()) break;
      node = select_child(*node);
      rec.path.push_back(node->id);
    }
    // Expansion.
    if (node->expandable()) {
      const std::size_t k = static_cast<std::size_t>(rng_.below(node->untried.size()));
      Action a = node->untried[k];
      node->untried.erase(node->untried.begin() + static_cast<std::ptrdiff_t>(k));
      State next = domain_.step(node->state, a);
      node->children.push_back(make_node(std::move(next), std::move(a), node));
      node = node->children.back().get();
      rec.path.push_back(node->id);
      rec.expanded = node->id;
    }
    node->self_visits += 1;
    // Simulation from the leaf; depth counts pushes from the search root.
    double r = 0.0;
    if (node != root_.get() && !node->terminal) {
      State s = node->state;
      int depth = node->depth;
      double discount = cfg_.gamma;
      for (;;) {
        auto a = domain_.random_action(s, rng_);
        if (!a) break;
        s = domain_.step(s, *a);
        ++depth;
        const double reward = domain_.reward(s);
        rec.rollout_rewards.push_back(reward);
        r = std::max(r, discount * reward);
        discount *= cfg_.gamma;
        if (depth >= cfg_.d_star || reward >= cfg_.r_gp_star) break;
      }
    }
    max_depth_ = std::max(max_depth_, node->depth);
    // Back-propagation, root excluded.
    for (Node* n = node; n != root_.get(); n = n->parent) {
      n->visits += 1;
      r = std::max(r, n->reward);
      n->q.push_back(r);
      rec.path_rewards.push_back(n->reward);
      rec.backed_up.push_back(r);
      r *= cfg_.gamma;
    }
    root_->visits += 1;
    if (observer_) observer_(rec);
  }

  SearchResult<Action> result() const {
    const Node* best = nullptr;
    double best_value = -std::numeric_limits<double>::infinity();
    for (const auto& ch : root_->children) {
      const double v = uct(*ch, *root_, cfg_.final_m, cfg_.final_c);
      if (v > best_value) {
        best_value = v;
        best = ch.get();
      }
    }
    SearchResult<Action> out{*best->incoming};
    out.value = best_value;
    out.iterations = cfg_.n_max;
    out.nodes = next_id_;
    out.root_children = root_->children.size();
    out.max_depth = max_depth_;
    return out;
  }

  const D& domain_;
  PlannerConfig cfg_;
  Rng rng_;
  Observer observer_;
  std::unique_ptr<Node> root_;
  std::size_t next_id_ = 0;
  int max_depth_ = 0;
};

template <SearchDomain D>
SearchResult<typename D::Action> mcts_search(const D& domain, const typename D::State& root, const PlannerConfig& cfg,
                                             std::uint64_t seed) {
  Mcts<D> search(domain, cfg, seed);
  return search.run(root);
}

// Depth-one lookahead: the action whose successor has the highest reward.
// Ties are broken uniformly at random.
template <SearchDomain D>
SearchResult<typename D::Action> greedy_search(const D& domain, const typename D::State& root, Rng& rng) {
  const auto actions = domain.actions(root);
  if (actions.empty()) throw NoActionsError();
  std::vector<std::size_t> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const double v = domain.reward(domain.step(root, actions[i]));
    if (v > best_value) {
      best_value = v;
      best.clear();
    }
    if (v == best_value) best.push_back(i);
  }
  SearchResult<typename D::Action> out{actions[best[rng.below(best.size())]]};
  out.value = best_value;
  out.iterations = 1;
  out.nodes = actions.size() + 1;
  out.root_children = actions.size();
  out.max_depth = 1;
  return out;
}

}  // namespace vft
