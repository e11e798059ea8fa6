#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "planscore/reward.hpp"

using namespace planscore;

namespace {

// Embedder with a fixed text -> vector table, for pinning cosines exactly.
class TableEmbedder final : public Embedder {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> table)
      : table_(std::move(table)) {}

  std::vector<double> embed(std::string_view text) const override {
    auto it = table_.find(std::string(text));
    if (it != table_.end()) return it->second;
    return {0.0, 0.0, 0.0};
  }
  std::size_t dim() const override { return 3; }

 private:
  std::map<std::string, std::vector<double>> table_;
};

PlanGraph questions_only(const std::vector<std::string>& questions) {
  std::vector<Subgoal> subgoals;
  for (std::size_t i = 0; i < questions.size(); ++i)
    subgoals.push_back({"Q" + std::to_string(i + 1), questions[i],
                        Placeholder{static_cast<int>(i + 1)}});
  return build_plan_graph(subgoals);
}

}  // namespace

TEST_CASE("anneal weight is exactly one half at ninety percent of budget") {
  CHECK(anneal_weight(9, 10) == Catch::Approx(0.5).margin(1e-12));
  CHECK(anneal_weight(180, 200) == Catch::Approx(0.5).margin(1e-12));
  CHECK(anneal_weight(9000, 10000) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("anneal weight endpoints") {
  // t = T = 200: 1/(1+e^2)
  CHECK(anneal_weight(200, 200) == Catch::Approx(0.11920292202211755).margin(1e-12));
  // t = 0: sigmoid has barely moved off 1
  CHECK(anneal_weight(0, 200) == Catch::Approx(0.999999984772).margin(1e-9));
}

TEST_CASE("anneal weight decreases strictly over the budget") {
  double prev = anneal_weight(0, 200);
  for (int t = 1; t <= 200; ++t) {
    double w = anneal_weight(t, 200);
    CHECK(w < prev);
    prev = w;
  }
}

TEST_CASE("total reward composition") {
  AnnealConfig cfg;  // T=200, weights 0.1/0.5/0.5/0.5

  RewardBreakdown all = total_reward(1, 1, 1, 1, 1, 180, cfg);
  CHECK(all.weight == Catch::Approx(0.5).margin(1e-12));
  CHECK(all.total == Catch::Approx(1.8).margin(1e-12));

  RewardBreakdown answer_only = total_reward(0, 0, 0, 0, 1, 180, cfg);
  CHECK(answer_only.total == Catch::Approx(1.0).margin(1e-12));

  RewardBreakdown nothing = total_reward(0, 0, 0, 0, 0, 180, cfg);
  CHECK(nothing.total == 0.0);

  RewardBreakdown wrong_final = total_reward(1, 1, 1, 1, 0, 180, cfg);
  CHECK(wrong_final.total == Catch::Approx(0.8).margin(1e-12));

  RewardBreakdown late = total_reward(1, 1, 1, 1, 1, 200, cfg);
  CHECK(late.total ==
        Catch::Approx(anneal_weight(200, 200) * 1.6 + 1.0).margin(1e-12));
}

TEST_CASE("each component raises the total") {
  AnnealConfig cfg;
  double base = total_reward(0, 0.5, 0.5, 0.5, 0, 100, cfg).total;
  CHECK(total_reward(1, 0.5, 0.5, 0.5, 0, 100, cfg).total > base);
  CHECK(total_reward(0, 0.9, 0.5, 0.5, 0, 100, cfg).total > base);
  CHECK(total_reward(0, 0.5, 0.9, 0.5, 0, 100, cfg).total > base);
  CHECK(total_reward(0, 0.5, 0.5, 0.9, 0, 100, cfg).total > base);
  CHECK(total_reward(0, 0.5, 0.5, 0.5, 1, 100, cfg).total > base);
}

TEST_CASE("semantic reward averages matched cosines over gold size") {
  PlanGraph rollout = questions_only({"r0", "r1"});
  PlanGraph gold = questions_only({"g0", "g1", "g2"});
  TableEmbedder emb({{"r0", {1.0, 0.0, 0.0}},
                     {"g0", {1.0, 0.0, 0.0}},
                     {"r1", {0.5, 0.8660254037844386, 0.0}},
                     {"g1", {1.0, 0.0, 0.0}},
                     {"g2", {0.0, 0.0, 1.0}}});
  Matching m;
  m.pairs = {{0, 0}, {1, 1}};
  // (1.0 + 0.5) / 3
  CHECK(semantic_reward(m, rollout, gold, emb) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("anti-aligned questions clamp to zero, not negative") {
  PlanGraph rollout = questions_only({"rneg"});
  PlanGraph gold = questions_only({"g0"});
  TableEmbedder emb({{"rneg", {-1.0, 0.0, 0.0}}, {"g0", {1.0, 0.0, 0.0}}});
  Matching m;
  m.pairs = {{0, 0}};
  CHECK(semantic_reward(m, rollout, gold, emb) == 0.0);
}

TEST_CASE("empty matching earns no semantic credit") {
  PlanGraph rollout = questions_only({"r0"});
  PlanGraph gold = questions_only({"g0", "g1"});
  TableEmbedder emb({});
  CHECK(semantic_reward(Matching{}, rollout, gold, emb) == 0.0);
}

TEST_CASE("sub-answer similarity phi") {
  CHECK(answer_similarity_phi("Parramatta River", "Parramatta River") == 1.0);
  CHECK(answer_similarity_phi("Helen Mirren", "Susan Gilroy") == 0.0);
  CHECK(answer_similarity_phi("the Sydney Harbour area", "Sydney Harbour") ==
        Catch::Approx(0.8).margin(1e-12));
}

TEST_CASE("subgoal reward over the two-hop fixture") {
  GoldRecord gold = fixtures::two_hop_gold();
  Trajectory traj = parse_trajectory(fixtures::two_hop_trace());
  REQUIRE(traj.plan);

  Matching full;
  full.pairs = {{0, 0}, {1, 1}};
  CHECK(subgoal_reward(full, traj, gold) == Catch::Approx(1.0).margin(1e-12));

  Matching half;
  half.pairs = {{0, 0}};
  CHECK(subgoal_reward(half, traj, gold) == Catch::Approx(0.5).margin(1e-12));

  CHECK(subgoal_reward(Matching{}, traj, gold) == 0.0);
}

TEST_CASE("latest binding for a placeholder wins") {
  GoldRecord gold = fixtures::two_hop_gold();
  Trajectory traj;
  traj.plan = gold.plan;
  traj.sub_answers = {{Placeholder{1}, "wrong first try", false},
                      {Placeholder{1}, "Parramatta River", false},
                      {Placeholder{2}, "Sydney Harbour", false}};
  Matching full;
  full.pairs = {{0, 0}, {1, 1}};
  CHECK(subgoal_reward(full, traj, gold) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("no plan means no subgoal credit") {
  GoldRecord gold = fixtures::two_hop_gold();
  Trajectory traj;  // plan empty
  Matching m;
  m.pairs = {{0, 0}};
  CHECK(subgoal_reward(m, traj, gold) == 0.0);
}

TEST_CASE("outcome reward is a normalized exact match") {
  std::vector<std::string> golds{"Sydney Harbour"};
  CHECK(outcome_reward(std::string("Sydney Harbour"), golds) == 1);
  CHECK(outcome_reward(std::string("the Sydney Harbour."), golds) == 1);
  CHECK(outcome_reward(std::string("Parramatta River"), golds) == 0);
  CHECK(outcome_reward(std::nullopt, golds) == 0);
}

TEST_CASE("two-hop fixture scores itself perfectly") {
  GoldRecord gold = fixtures::two_hop_gold();
  Trajectory traj = parse_trajectory(fixtures::two_hop_trace());
  HashedBowEmbedder emb;
  ScoreResult r = score_trajectory(traj, gold, 180, {}, emb);

  CHECK(r.verdict.compliant);
  CHECK(r.breakdown.format == 1.0);
  CHECK(r.breakdown.structure == Catch::Approx(1.0).margin(1e-12));
  CHECK(r.breakdown.semantics == Catch::Approx(1.0).margin(1e-12));
  CHECK(r.breakdown.subgoals == Catch::Approx(1.0).margin(1e-12));
  CHECK(r.breakdown.outcome == 1.0);
  CHECK(r.breakdown.weight == Catch::Approx(0.5).margin(1e-12));
  CHECK(r.breakdown.total == Catch::Approx(1.8).margin(1e-12));
  CHECK(r.matching.size() == 2);
}

TEST_CASE("a wrong final answer forfeits only the outcome term") {
  GoldRecord gold = fixtures::two_hop_gold();
  std::string text = fixtures::two_hop_trace();
  std::string needle = "<answer> Sydney Harbour </answer>";
  auto pos = text.find(needle);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, needle.size(), "<answer> Parramatta River </answer>");

  HashedBowEmbedder emb;
  ScoreResult r = score_trajectory(parse_trajectory(text), gold, 180, {}, emb);
  CHECK(r.breakdown.outcome == 0.0);
  CHECK(r.breakdown.total == Catch::Approx(0.8).margin(1e-12));
}

TEST_CASE("empty rollout scores only the absent-plan structure floor") {
  GoldRecord gold = fixtures::two_hop_gold();  // 2 nodes, 1 edge
  HashedBowEmbedder emb;
  ScoreResult r = score_trajectory(parse_trajectory(""), gold, 180, {}, emb);

  CHECK(r.breakdown.format == 0.0);
  CHECK(r.breakdown.structure == Catch::Approx(std::exp(-3.0)).margin(1e-12));
  CHECK(r.breakdown.semantics == 0.0);
  CHECK(r.breakdown.subgoals == 0.0);
  CHECK(r.breakdown.outcome == 0.0);
  CHECK(r.breakdown.total ==
        Catch::Approx(0.5 * 0.5 * std::exp(-3.0)).margin(1e-12));
}

TEST_CASE("scores survive a serialize round trip") {
  GoldRecord gold = fixtures::two_hop_gold();
  Trajectory traj = parse_trajectory(fixtures::two_hop_trace());
  Trajectory again = parse_trajectory(serialize_trajectory(traj));
  HashedBowEmbedder emb;
  ScoreResult a = score_trajectory(traj, gold, 42, {}, emb);
  ScoreResult b = score_trajectory(again, gold, 42, {}, emb);
  CHECK(a.breakdown.total == Catch::Approx(b.breakdown.total).margin(1e-12));
  CHECK(a.breakdown.structure == Catch::Approx(b.breakdown.structure).margin(1e-12));
  CHECK(a.breakdown.subgoals == Catch::Approx(b.breakdown.subgoals).margin(1e-12));
}

TEST_CASE("oversized plans refuse to score") {
  GoldRecord gold = fixtures::two_hop_gold();
  Trajectory traj = parse_trajectory(fixtures::two_hop_trace());
  HashedBowEmbedder emb;
  ScoreOptions opts;
  opts.max_align_nodes = 1;
  try {
    score_trajectory(traj, gold, 180, opts, emb);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GraphTooLarge);
  }
}

TEST_CASE("gold validation catches incomplete records") {
  GoldRecord gold = fixtures::two_hop_gold();
  CHECK_NOTHROW(validate_gold(gold));

  GoldRecord no_answers = gold;
  no_answers.final_answers.clear();
  CHECK_THROWS_AS(validate_gold(no_answers), Error);

  GoldRecord missing_sub = gold;
  missing_sub.sub_answers.erase(2);
  CHECK_THROWS_AS(validate_gold(missing_sub), Error);
}
