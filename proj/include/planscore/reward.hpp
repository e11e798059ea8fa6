#pragma once

// Process-aware reward for planned multi-hop rollouts.  A rollout earns
// partial credit for plan structure, plan semantics, and per-subgoal answers
// while training is young; a sigmoid schedule hands the weight over to the
// binary final-answer term as the step count approaches its budget.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "planscore/embedder.hpp"
#include "planscore/errors.hpp"
#include "planscore/graph_align.hpp"
#include "planscore/plan_graph.hpp"
#include "planscore/text_metrics.hpp"
#include "planscore/trajectory.hpp"

namespace planscore {

struct GoldRecord {
  std::string question;
  PlanGraph plan;
  PlaceholderBindings sub_answers;        // keyed by placeholder index
  std::vector<std::string> final_answers; // acceptable surface forms, >= 1
};

inline void validate_gold(const GoldRecord& gold) {
  if (gold.plan.node_count() == 0) raise(ErrorCode::EmptyGoldPlan, gold.question);
  if (gold.final_answers.empty())
    raise(ErrorCode::MalformedInput, "gold record needs at least one final answer");
  if (gold.sub_answers.size() != gold.plan.node_count())
    raise(ErrorCode::MalformedInput, "gold sub-answers do not cover the plan");
  for (const Subgoal& sg : gold.plan.nodes())
    if (!gold.sub_answers.count(sg.output.index))
      raise(ErrorCode::MalformedInput, "gold record missing answer for " + sg.output.render());
}

struct AnnealConfig {
  int total_steps = 200;        // training budget T
  double format_weight = 0.1;   // scale of the format term inside the annealed block
  double structure_weight = 0.5;
  double semantic_weight = 0.5;
  double subgoal_weight = 0.5;
};

struct RewardBreakdown {
  double format = 0.0;     // 1 iff protocol-compliant
  double structure = 0.0;  // exp(-edit distance) to the gold plan
  double semantics = 0.0;  // mean matched-question cosine over gold size
  double subgoals = 0.0;   // mean matched sub-answer F1 over gold size
  double outcome = 0.0;    // exact final-answer match
  double weight = 0.0;     // anneal weight applied to the process terms
  double total = 0.0;
};

// Sigmoid schedule centered at 90% of the budget: w = 1/(1+e^((t-0.9T)/10)).
inline double anneal_weight(int t, int total_steps) {
  return 1.0 / (1.0 + std::exp((static_cast<double>(t) - 0.9 * total_steps) / 10.0));
}

// Mean cosine between matched question pairs, averaged over the gold plan
// size so unmatched gold subgoals dilute the score.  Negative cosines from
// custom embedders clamp to zero: an anti-aligned question is merely wrong.
inline double semantic_reward(const Matching& matching, const PlanGraph& rollout_plan,
                              const PlanGraph& gold_plan, const Embedder& embedder) {
  if (gold_plan.node_count() == 0) raise(ErrorCode::EmptyGoldPlan, "gold plan has no nodes");
  double sum = 0.0;
  for (const auto& [u, v] : matching.pairs) {
    double c = cosine(embedder.embed(rollout_plan.nodes()[u].question),
                      embedder.embed(gold_plan.nodes()[v].question));
    sum += std::max(0.0, c);
  }
  return sum / static_cast<double>(gold_plan.node_count());
}

// Token-F1 between a predicted and a gold sub-answer.
inline double answer_similarity_phi(std::string_view pred, std::string_view gold) {
  return token_f1(pred, {std::string(gold)});
}

// Mean sub-answer F1 over gold plan size; gold subgoals without a matched,
// answered rollout counterpart contribute zero.  The latest binding for a
// placeholder wins, mirroring a rollout that revisits a subgoal.
inline double subgoal_reward(const Matching& matching, const Trajectory& traj,
                             const GoldRecord& gold) {
  if (gold.plan.node_count() == 0) raise(ErrorCode::EmptyGoldPlan, gold.question);
  if (!traj.plan || matching.pairs.empty()) return 0.0;

  std::map<int, std::string> predicted;  // placeholder index -> latest answer
  for (const SubAnswerBinding& sa : traj.sub_answers) predicted[sa.placeholder.index] = sa.answer;

  double sum = 0.0;
  for (const auto& [u, v] : matching.pairs) {
    auto pred = predicted.find(traj.plan->nodes()[u].output.index);
    if (pred == predicted.end()) continue;
    const std::string& gold_answer = gold.sub_answers.at(gold.plan.nodes()[v].output.index);
    sum += answer_similarity_phi(pred->second, gold_answer);
  }
  return sum / static_cast<double>(gold.plan.node_count());
}

inline int outcome_reward(const std::optional<std::string>& final_answer,
                          const std::vector<std::string>& gold_answers) {
  if (!final_answer) return 0;
  return exact_match(*final_answer, gold_answers);
}

inline RewardBreakdown total_reward(double format, double structure, double semantics,
                                    double subgoals, double outcome, int t,
                                    const AnnealConfig& cfg) {
  RewardBreakdown r;
  r.format = format;
  r.structure = structure;
  r.semantics = semantics;
  r.subgoals = subgoals;
  r.outcome = outcome;
  r.weight = anneal_weight(t, cfg.total_steps);
  r.total = r.weight * (cfg.format_weight * format + cfg.structure_weight * structure +
                        cfg.semantic_weight * semantics + cfg.subgoal_weight * subgoals) +
            outcome;
  return r;
}

struct ScoreOptions {
  AnnealConfig anneal;
  EditCosts costs;
  int max_align_nodes = kDefaultMaxAlignNodes;
};

struct ScoreResult {
  RewardBreakdown breakdown;
  FormatVerdict verdict;
  Matching matching;
};

inline ScoreResult score_trajectory(const Trajectory& traj, const GoldRecord& gold, int t,
                                    const ScoreOptions& opts, const Embedder& embedder) {
  ScoreResult result;
  result.verdict = check_format(traj);
  double format = result.verdict.compliant ? 1.0 : 0.0;

  double structure = structural_reward(traj.plan, gold.plan, opts.costs, opts.max_align_nodes);

  double semantics = 0.0;
  if (traj.plan && traj.plan->node_count() > 0) {
    auto affinity = [&](const Subgoal& a, const Subgoal& b) {
      return cosine(embedder.embed(a.question), embedder.embed(b.question));
    };
    result.matching =
        max_common_subgraph(*traj.plan, gold.plan, affinity, opts.max_align_nodes);
    semantics = semantic_reward(result.matching, *traj.plan, gold.plan, embedder);
  }

  double subgoals = subgoal_reward(result.matching, traj, gold);
  double outcome = outcome_reward(traj.final_answer, gold.final_answers);
  result.breakdown = total_reward(format, structure, semantics, subgoals, outcome, t, opts.anneal);
  return result;
}

}  // namespace planscore
