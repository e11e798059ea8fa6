#pragma once

// Built-in property checks runnable from the CLI: the fast aligners against
// brute-force oracles, perturbation monotonicity, advantage normalization,
// and parser totality under random corruption.  A deliberate-fault hook
// exists so tests can prove the harness actually catches regressions.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "planscore/advantage.hpp"
#include "planscore/embedder.hpp"
#include "planscore/graph_align.hpp"
#include "planscore/plan_graph.hpp"
#include "planscore/reward.hpp"
#include "planscore/synthetic.hpp"
#include "planscore/trajectory.hpp"

namespace planscore::selftest {

// Exhaustive minimum over every injective partial node map, cost recomputed
// from scratch at each leaf.  Deliberately shares nothing with the
// branch-and-bound path in graph_align.hpp.
inline double brute_force_edit_distance(const PlanGraph& g, const PlanGraph& gold,
                                        const EditCosts& costs = {}) {
  const int n = static_cast<int>(g.node_count());
  const int m = static_cast<int>(gold.node_count());
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  double best = std::numeric_limits<double>::infinity();

  auto evaluate = [&]() {
    int mapped = 0;
    for (int a : assign)
      if (a >= 0) ++mapped;
    double cost = (n - mapped) * costs.node_delete + (m - mapped) * costs.node_insert;
    for (const auto& [u, v] : g.edges()) {
      bool preserved = assign[static_cast<std::size_t>(u)] >= 0 &&
                       assign[static_cast<std::size_t>(v)] >= 0 &&
                       gold.has_edge(assign[static_cast<std::size_t>(u)],
                                     assign[static_cast<std::size_t>(v)]);
      if (!preserved) cost += costs.edge_delete;
    }
    for (const auto& [x, y] : gold.edges()) {
      bool preserved = false;
      for (int u = 0; u < n && !preserved; ++u)
        for (int v = 0; v < n && !preserved; ++v)
          if (assign[static_cast<std::size_t>(u)] == x &&
              assign[static_cast<std::size_t>(v)] == y && g.has_edge(u, v))
            preserved = true;
      if (!preserved) cost += costs.edge_insert;
    }
    best = std::min(best, cost);
  };

  auto recurse = [&](auto&& self, int i) -> void {
    if (i == n) {
      evaluate();
      return;
    }
    assign[static_cast<std::size_t>(i)] = -1;
    self(self, i + 1);
    for (int j = 0; j < m; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      used[static_cast<std::size_t>(j)] = true;
      assign[static_cast<std::size_t>(i)] = j;
      self(self, i + 1);
      assign[static_cast<std::size_t>(i)] = -1;
      used[static_cast<std::size_t>(j)] = false;
    }
  };
  recurse(recurse, 0);
  return best;
}

// Exhaustive maximum cardinality of an edge-consistent injective matching;
// consistency is re-checked wholesale at every leaf.
inline std::size_t brute_force_mcs_size(const PlanGraph& g, const PlanGraph& gold) {
  const int n = static_cast<int>(g.node_count());
  const int m = static_cast<int>(gold.node_count());
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  std::size_t best = 0;

  auto evaluate = [&]() {
    std::size_t count = 0;
    for (int u = 0; u < n; ++u) {
      if (assign[static_cast<std::size_t>(u)] < 0) continue;
      ++count;
      for (int v = 0; v < n; ++v) {
        if (assign[static_cast<std::size_t>(v)] < 0) continue;
        if (g.has_edge(u, v) != gold.has_edge(assign[static_cast<std::size_t>(u)],
                                              assign[static_cast<std::size_t>(v)]))
          return;
      }
    }
    best = std::max(best, count);
  };

  auto recurse = [&](auto&& self, int i) -> void {
    if (i == n) {
      evaluate();
      return;
    }
    assign[static_cast<std::size_t>(i)] = -1;
    self(self, i + 1);
    for (int j = 0; j < m; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      used[static_cast<std::size_t>(j)] = true;
      assign[static_cast<std::size_t>(i)] = j;
      self(self, i + 1);
      assign[static_cast<std::size_t>(i)] = -1;
      used[static_cast<std::size_t>(j)] = false;
    }
  };
  recurse(recurse, 0);
  return best;
}

// Random plan whose edges all point from lower to higher positions.
inline PlanGraph random_plan(synth::detail_synth::Rng& rng, int max_nodes) {
  int n = 1 + rng.below(max_nodes);
  std::vector<Subgoal> entries;
  for (int i = 0; i < n; ++i) {
    std::string q = "q" + std::to_string(i + 1);
    for (int j = 0; j < i; ++j)
      if (rng.below(3) == 0) q += " #" + std::to_string(j + 1);
    entries.push_back({"Q" + std::to_string(i + 1), q, Placeholder{i + 1}});
  }
  return build_plan_graph(entries);
}

// Direction each corruption is allowed to move each reward component,
// relative to a perfect baseline.  Returns a description of the violation,
// or nothing when the effect is as documented.
inline std::optional<std::string> perturbation_violation(const RewardBreakdown& before,
                                                         const RewardBreakdown& after,
                                                         synth::PerturbationKind kind) {
  const double tol = 1e-9;
  auto eq = [&](double a, double b) { return std::abs(a - b) <= tol; };
  auto leq = [&](double a, double b) { return a <= b + tol; };
  auto lt = [&](double a, double b) { return a < b - tol; };
  std::ostringstream why;

  switch (kind) {
    case synth::PerturbationKind::DropSubgoal:
    case synth::PerturbationKind::AddSpuriousSubgoal:
      if (!lt(after.structure, before.structure)) why << "structure did not strictly drop; ";
      if (!eq(after.format, before.format)) why << "format moved; ";
      if (!eq(after.outcome, before.outcome)) why << "outcome moved; ";
      if (!leq(after.semantics, before.semantics)) why << "semantics rose; ";
      if (!leq(after.subgoals, before.subgoals)) why << "subgoals rose; ";
      break;
    case synth::PerturbationKind::RewireDependency:
      if (!leq(after.structure, before.structure)) why << "structure rose; ";
      if (!eq(after.format, before.format)) why << "format moved; ";
      if (!eq(after.outcome, before.outcome)) why << "outcome moved; ";
      if (!leq(after.semantics, before.semantics)) why << "semantics rose; ";
      if (!leq(after.subgoals, before.subgoals)) why << "subgoals rose; ";
      break;
    case synth::PerturbationKind::CorruptSubAnswer:
      if (!lt(after.subgoals, before.subgoals)) why << "subgoals did not strictly drop; ";
      if (!eq(after.format, before.format)) why << "format moved; ";
      if (!eq(after.structure, before.structure)) why << "structure moved; ";
      if (!eq(after.semantics, before.semantics)) why << "semantics moved; ";
      if (!eq(after.outcome, before.outcome)) why << "outcome moved; ";
      break;
    case synth::PerturbationKind::CorruptFinalAnswer:
      if (after.outcome != 0.0) why << "outcome survived; ";
      if (!eq(after.format, before.format)) why << "format moved; ";
      if (!eq(after.structure, before.structure)) why << "structure moved; ";
      if (!eq(after.semantics, before.semantics)) why << "semantics moved; ";
      if (!eq(after.subgoals, before.subgoals)) why << "subgoals moved; ";
      break;
    case synth::PerturbationKind::BreakTag:
      if (after.format != 0.0) why << "format survived a broken tag; ";
      if (!leq(after.structure, before.structure)) why << "structure rose; ";
      if (!leq(after.semantics, before.semantics)) why << "semantics rose; ";
      if (!leq(after.subgoals, before.subgoals)) why << "subgoals rose; ";
      if (!leq(after.outcome, before.outcome)) why << "outcome rose; ";
      break;
    case synth::PerturbationKind::ShufflePlanOrder:
      if (!eq(after.format, before.format) || !eq(after.structure, before.structure) ||
          !eq(after.semantics, before.semantics) || !eq(after.subgoals, before.subgoals) ||
          !eq(after.outcome, before.outcome))
        why << "reordering the plan keys changed a component; ";
      break;
  }
  std::string text = why.str();
  if (text.empty()) return std::nullopt;
  return text;
}

// Random tag-soup edits for totality checks.
inline std::string random_corruption(synth::detail_synth::Rng& rng, std::string text) {
  static constexpr std::array<std::string_view, 8> kSnippets = {
      "<think>", "</plan>", "<subPlan>", "</subAnswer>", "<", "</", "#12", "<answer>"};
  int edits = 1 + rng.below(3);
  for (int e = 0; e < edits; ++e) {
    switch (rng.below(3)) {
      case 0: {  // delete a slice
        if (text.empty()) break;
        std::size_t pos = static_cast<std::size_t>(rng.below(static_cast<int>(text.size())));
        std::size_t len = 1 + static_cast<std::size_t>(rng.below(
                                  static_cast<int>(std::min<std::size_t>(40, text.size() - pos))));
        text.erase(pos, len);
        break;
      }
      case 1: {  // insert a snippet
        std::size_t pos = static_cast<std::size_t>(rng.below(static_cast<int>(text.size() + 1)));
        text.insert(pos, kSnippets[static_cast<std::size_t>(
                             rng.below(static_cast<int>(kSnippets.size())))]);
        break;
      }
      default: {  // duplicate a slice elsewhere
        if (text.empty()) break;
        std::size_t pos = static_cast<std::size_t>(rng.below(static_cast<int>(text.size())));
        std::size_t len = 1 + static_cast<std::size_t>(rng.below(
                                  static_cast<int>(std::min<std::size_t>(40, text.size() - pos))));
        std::string slice = text.substr(pos, len);
        std::size_t at = static_cast<std::size_t>(rng.below(static_cast<int>(text.size() + 1)));
        text.insert(at, slice);
        break;
      }
    }
  }
  return text;
}

// Sibling segments must be ordered and disjoint at every level.
inline bool segment_spans_sane(const std::vector<Segment>& segs, std::size_t raw_size) {
  std::size_t prev_end = 0;
  for (const Segment& seg : segs) {
    if (seg.begin >= seg.end || seg.end > raw_size) return false;
    if (seg.begin < prev_end) return false;
    prev_end = seg.end;
    if (!segment_spans_sane(seg.children, raw_size)) return false;
  }
  return true;
}

struct Options {
  std::uint64_t seed = 42;
  int cases = 200;
  bool inject_ged_fault = false;  // negative control: must make the run fail
};

struct Report {
  int checks = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

inline Report run(const Options& opts) {
  using synth::detail_synth::Rng;
  Report report;
  auto fail = [&](const std::string& what) {
    if (report.failures.size() < 25) report.failures.push_back(what);
  };

  // 1. Edit distance vs. oracle, symmetry, identity.
  for (int c = 0; c < opts.cases; ++c) {
    Rng rng(opts.seed * 1000003 + static_cast<std::uint64_t>(c));
    PlanGraph g = random_plan(rng, 5);
    PlanGraph h = random_plan(rng, 5);
    EditCosts costs;
    if (rng.below(2) == 0)
      costs = {0.5 + 0.5 * rng.below(4), 0.5 + 0.5 * rng.below(4), 0.5 + 0.5 * rng.below(4),
               0.5 + 0.5 * rng.below(4)};
    double fast = graph_edit_distance(g, h, costs);
    if (opts.inject_ged_fault) fast += 1.0;
    double slow = brute_force_edit_distance(g, h, costs);
    ++report.checks;
    if (std::abs(fast - slow) > 1e-9)
      fail("edit distance mismatch (case " + std::to_string(c) + "): fast=" +
           std::to_string(fast) + " oracle=" + std::to_string(slow));
    EditCosts symmetric;
    double fwd = graph_edit_distance(g, h, symmetric);
    double bwd = graph_edit_distance(h, g, symmetric);
    ++report.checks;
    if (std::abs(fwd - bwd) > 1e-9)
      fail("edit distance asymmetry with symmetric costs (case " + std::to_string(c) + ")");
    ++report.checks;
    if (graph_edit_distance(g, g, symmetric) != 0.0)
      fail("nonzero self distance (case " + std::to_string(c) + ")");
  }

  // 2. Matching cardinality vs. oracle, validity of the returned pairs.
  for (int c = 0; c < opts.cases; ++c) {
    Rng rng(opts.seed * 2000003 + static_cast<std::uint64_t>(c));
    PlanGraph g = random_plan(rng, 5);
    PlanGraph h = random_plan(rng, 5);
    auto affinity = [](const Subgoal&, const Subgoal&) { return 0.0; };
    Matching m = max_common_subgraph(g, h, affinity);
    ++report.checks;
    if (!matching_is_valid(m, g, h))
      fail("invalid matching (case " + std::to_string(c) + ")");
    ++report.checks;
    if (m.size() != brute_force_mcs_size(g, h))
      fail("matching cardinality mismatch (case " + std::to_string(c) + "): got " +
           std::to_string(m.size()));
  }

  // 3. Perturbation monotonicity against perfect baselines.
  {
    HashedBowEmbedder embedder;
    ScoreOptions sopts;
    int fixtures = std::max(1, opts.cases / 4);
    for (int c = 0; c < fixtures; ++c) {
      Rng rng(opts.seed * 3000017 + static_cast<std::uint64_t>(c));
      int n = 1 + rng.below(6);
      auto topo = static_cast<synth::Topology>(rng.below(4));
      synth::GoldFixture fx =
          synth::generate_gold(static_cast<std::uint64_t>(c) + opts.seed, n, topo);
      ScoreResult base = score_trajectory(fx.trajectory, fx.gold, 180, sopts, embedder);
      for (synth::PerturbationKind kind : synth::kAllPerturbations) {
        Trajectory bad;
        try {
          bad = synth::perturb(fx.trajectory, fx.gold, kind, opts.seed + static_cast<std::uint64_t>(c));
        } catch (const Error& e) {
          if (e.code() == ErrorCode::NotApplicable) continue;
          throw;
        }
        ScoreResult hurt = score_trajectory(bad, fx.gold, 180, sopts, embedder);
        ++report.checks;
        if (auto why = perturbation_violation(base.breakdown, hurt.breakdown, kind))
          fail(std::string(synth::perturbation_name(kind)) + " (fixture " + std::to_string(c) +
               "): " + *why);
      }
    }
  }

  // 4. Advantage normalization.
  for (int c = 0; c < opts.cases; ++c) {
    Rng rng(opts.seed * 4000037 + static_cast<std::uint64_t>(c));
    std::size_t n = 2 + static_cast<std::size_t>(rng.below(15));
    std::vector<double> rewards;
    for (std::size_t i = 0; i < n; ++i)
      rewards.push_back(static_cast<double>(rng.below(33)) / 16.0);
    std::vector<double> adv = group_advantages(rewards);
    double mean = 0.0;
    for (double a : adv) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= static_cast<double>(n);
    bool degenerate = true;
    for (double a : adv)
      if (a != 0.0) degenerate = false;
    ++report.checks;
    if (std::abs(mean) > 1e-9)
      fail("advantage mean off zero (case " + std::to_string(c) + ")");
    ++report.checks;
    if (!degenerate && std::abs(std::sqrt(var) - 1.0) > 1e-9)
      fail("advantage std off one (case " + std::to_string(c) + ")");
    std::vector<double> flat(n, rewards[0]);
    std::vector<double> zero = group_advantages(flat);
    ++report.checks;
    for (double a : zero)
      if (a != 0.0) {
        fail("zero-variance group produced nonzero advantage (case " + std::to_string(c) + ")");
        break;
      }
  }

  // 5. Parser totality and span sanity under random corruption.
  {
    synth::GoldFixture fx = synth::generate_gold(opts.seed, 3, synth::Topology::Chain);
    for (int c = 0; c < opts.cases; ++c) {
      Rng rng(opts.seed * 5000011 + static_cast<std::uint64_t>(c));
      std::string mangled = random_corruption(rng, fx.trajectory.raw_text);
      ++report.checks;
      try {
        Trajectory t = parse_trajectory(mangled);
        if (!segment_spans_sane(t.segments, t.raw_text.size()))
          fail("segment spans out of order (case " + std::to_string(c) + ")");
        check_format(t);
      } catch (...) {
        fail("parser aborted on corrupted input (case " + std::to_string(c) + ")");
      }
    }
  }

  return report;
}

}  // namespace planscore::selftest
