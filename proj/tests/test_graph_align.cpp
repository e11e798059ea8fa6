#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "planscore/graph_align.hpp"
#include "planscore/selftest.hpp"

using namespace planscore;

namespace {

PlanGraph chain(int n) {
  std::vector<Subgoal> entries;
  for (int i = 0; i < n; ++i) {
    std::string q = i == 0 ? "start?" : "next of #" + std::to_string(i) + "?";
    entries.push_back({"Q" + std::to_string(i + 1), q, Placeholder{i + 1}});
  }
  return build_plan_graph(entries);
}

PlanGraph independent(int n) {
  std::vector<Subgoal> entries;
  for (int i = 0; i < n; ++i)
    entries.push_back({"Q" + std::to_string(i + 1), "q?", Placeholder{i + 1}});
  return build_plan_graph(entries);
}

double flat_affinity(const Subgoal&, const Subgoal&) { return 0.0; }

}  // namespace

TEST_CASE("edit distance of a graph to itself is zero") {
  for (int n : {1, 2, 3, 4}) {
    CHECK(graph_edit_distance(chain(n), chain(n)) == 0.0);
    CHECK(structural_reward(chain(n), chain(n)) == 1.0);
  }
}

TEST_CASE("one node against a two-chain costs two unit edits") {
  double d = graph_edit_distance(chain(1), chain(2));
  CHECK(d == 2.0);
  CHECK(structural_reward(chain(1), chain(2)) ==
        Catch::Approx(0.1353352832366127).margin(1e-12));
}

TEST_CASE("one node against a three-chain costs four unit edits") {
  CHECK(graph_edit_distance(chain(1), chain(3)) == 4.0);
  CHECK(structural_reward(chain(1), chain(3)) ==
        Catch::Approx(std::exp(-4.0)).margin(1e-12));
}

TEST_CASE("absent plan is scored as the empty graph") {
  CHECK(structural_reward(std::nullopt, chain(2)) ==
        Catch::Approx(0.04978706836786394).margin(1e-12));
}

TEST_CASE("non-unit costs are respected") {
  EditCosts costs{2.0, 1.0, 0.5, 1.0};
  CHECK(graph_edit_distance(chain(1), chain(2), costs) == 2.5);
  CHECK(graph_edit_distance(chain(2), chain(1), costs) == 1.0 + 1.0);  // delete node + edge
}

TEST_CASE("distance is symmetric when inverse costs match") {
  synth::detail_synth::Rng rng(314);
  for (int c = 0; c < 200; ++c) {
    PlanGraph g = selftest::random_plan(rng, 5);
    PlanGraph h = selftest::random_plan(rng, 5);
    CHECK(graph_edit_distance(g, h) == graph_edit_distance(h, g));
  }
}

TEST_CASE("distance matches the exhaustive oracle on random pairs") {
  synth::detail_synth::Rng rng(2718);
  for (int c = 0; c < 300; ++c) {
    PlanGraph g = selftest::random_plan(rng, 5);
    PlanGraph h = selftest::random_plan(rng, 5);
    double fast = graph_edit_distance(g, h);
    double slow = selftest::brute_force_edit_distance(g, h);
    REQUIRE(fast == Catch::Approx(slow).margin(1e-9));
  }
}

TEST_CASE("full reward exactly for isomorphic graphs and only for them") {
  synth::detail_synth::Rng rng(161803);
  for (int c = 0; c < 300; ++c) {
    PlanGraph g = selftest::random_plan(rng, 4);
    PlanGraph h = selftest::random_plan(rng, 4);
    double d = graph_edit_distance(g, h);
    double r = structural_reward(g, h);
    CHECK(r > 0.0);
    CHECK(r <= 1.0);
    CHECK((r == 1.0) == (d == 0.0));
  }
}

TEST_CASE("a spurious extra node never raises the reward against the original") {
  synth::detail_synth::Rng rng(9001);
  for (int c = 0; c < 1000; ++c) {
    PlanGraph g = selftest::random_plan(rng, 6);
    std::vector<Subgoal> enlarged(g.nodes().begin(), g.nodes().end());
    enlarged.push_back({"spu", "unrelated?", Placeholder{99}});
    PlanGraph bigger = build_plan_graph(enlarged);
    double before = structural_reward(g, g);
    double after = structural_reward(bigger, g);
    CHECK(before == 1.0);
    CHECK(after < before);
  }
}

TEST_CASE("matching embeds a two-chain into a three-chain") {
  Matching m = max_common_subgraph(chain(2), chain(3), flat_affinity);
  CHECK(m.size() == 2);
  CHECK(matching_is_valid(m, chain(2), chain(3)));
}

TEST_CASE("independent nodes cannot both match across a chain edge") {
  Matching m = max_common_subgraph(independent(2), chain(2), flat_affinity);
  CHECK(m.size() == 1);
}

TEST_CASE("identical graphs match completely under aligned affinity") {
  PlanGraph g = chain(4);
  auto aligned = [](const Subgoal& a, const Subgoal& b) {
    return a.id == b.id ? 1.0 : 0.0;
  };
  Matching m = max_common_subgraph(g, g, aligned);
  REQUIRE(m.size() == 4);
  for (const auto& [u, v] : m.pairs) CHECK(u == v);
}

TEST_CASE("matching cardinality equals the exhaustive oracle") {
  synth::detail_synth::Rng rng(577215);
  for (int c = 0; c < 300; ++c) {
    PlanGraph g = selftest::random_plan(rng, 5);
    PlanGraph h = selftest::random_plan(rng, 5);
    Matching m = max_common_subgraph(g, h, flat_affinity);
    REQUIRE(matching_is_valid(m, g, h));
    REQUIRE(m.size() == selftest::brute_force_mcs_size(g, h));
  }
}

TEST_CASE("affinity breaks ties between equal-cardinality matchings") {
  // two independent nodes each side: any 2-matching is edge-consistent,
  // so the affinity sum decides
  PlanGraph g = independent(2);
  auto crossed = [](const Subgoal& a, const Subgoal& b) {
    return a.id != b.id ? 1.0 : 0.0;
  };
  Matching m = max_common_subgraph(g, g, crossed);
  REQUIRE(m.size() == 2);
  for (const auto& [u, v] : m.pairs) CHECK(u != v);
}

TEST_CASE("lexicographic order settles exact ties") {
  PlanGraph g = independent(2);
  Matching m = max_common_subgraph(g, g, flat_affinity);
  REQUIRE(m.size() == 2);
  CHECK(m.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
}

TEST_CASE("node caps raise instead of degrading") {
  PlanGraph big = independent(11);
  CHECK_THROWS_AS(graph_edit_distance(big, chain(2)), Error);
  CHECK_THROWS_AS(graph_edit_distance(chain(2), big), Error);
  CHECK_THROWS_AS(max_common_subgraph(big, big, flat_affinity), Error);
  CHECK_NOTHROW(graph_edit_distance(big, chain(2), EditCosts{}, 12));
  try {
    graph_edit_distance(big, chain(2));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GraphTooLarge);
  }
}
