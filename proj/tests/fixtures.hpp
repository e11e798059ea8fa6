#pragma once

// Canonical two-hop river trace used across the suite, with its gold record.

#include <string>

#include "planscore/plan_graph.hpp"
#include "planscore/reward.hpp"

namespace fixtures {

inline const std::string& two_hop_trace() {
  static const std::string text =
      R"(<think> To answer this question, I need to break it down into sub-questions. First, I need to identify the river that Toongabbie Creek flows into. Then, I need to determine what that river flows into. </think>
<plan> { "Q1": ["For what river does Toongabbie Creek serve as the mouth?", "#1"], "Q2": ["Into what does #1 flow?", "#2"] } </plan>
<subPlan>
<think> First, I need to identify the river that Toongabbie Creek serves as the mouth of. </think>
<search> river for which Toongabbie Creek serves as the mouth </search>
<information> The creek flows generally south-west before reaching its confluence with the Darling Mills Creek to form the Parramatta River. </information>
<think> Toongabbie Creek flows into the Parramatta River. </think>
<subAnswer> #1 = Parramatta River </subAnswer>
</subPlan>
<subPlan>
<think> Next, I need to determine what the Parramatta River flows into. </think>
<search> Parramatta River flows into </search>
<information> The Parramatta River is the main tributary of Sydney Harbour, a branch of Port Jackson. </information>
<think> The Parramatta River flows into Sydney Harbour. </think>
<subAnswer> #2 = Sydney Harbour </subAnswer>
</subPlan>
<answer> Sydney Harbour </answer>)";
  return text;
}

inline planscore::GoldRecord two_hop_gold() {
  planscore::GoldRecord gold;
  gold.question = "Into what does the river for which Toongabbie Creek serves as the mouth flow?";
  gold.plan = planscore::build_plan_graph(
      {{"Q1", "For what river does Toongabbie Creek serve as the mouth?", {1}},
       {"Q2", "Into what does #1 flow?", {2}}});
  gold.sub_answers = {{1, "Parramatta River"}, {2, "Sydney Harbour"}};
  gold.final_answers = {"Sydney Harbour"};
  return gold;
}

}  // namespace fixtures
