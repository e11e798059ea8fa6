#pragma once

// Seeded fixture mill: golden plan/trajectory pairs over a few topology
// families, plus targeted corruptions.  Every golden trajectory must earn a
// perfect breakdown against its own gold record; every corruption must move
// exactly the component it targets, and never upward.

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "planscore/errors.hpp"
#include "planscore/plan_graph.hpp"
#include "planscore/reward.hpp"
#include "planscore/trajectory.hpp"

namespace planscore::synth {

enum class Topology { Chain, Tree, Diamond, RandomDag };

enum class PerturbationKind {
  DropSubgoal,
  AddSpuriousSubgoal,
  RewireDependency,
  CorruptSubAnswer,
  CorruptFinalAnswer,
  BreakTag,
  ShufflePlanOrder,
};

inline constexpr std::array<PerturbationKind, 7> kAllPerturbations = {
    PerturbationKind::DropSubgoal,       PerturbationKind::AddSpuriousSubgoal,
    PerturbationKind::RewireDependency,  PerturbationKind::CorruptSubAnswer,
    PerturbationKind::CorruptFinalAnswer, PerturbationKind::BreakTag,
    PerturbationKind::ShufflePlanOrder};

inline std::string_view perturbation_name(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::DropSubgoal: return "drop-subgoal";
    case PerturbationKind::AddSpuriousSubgoal: return "add-spurious-subgoal";
    case PerturbationKind::RewireDependency: return "rewire-dependency";
    case PerturbationKind::CorruptSubAnswer: return "corrupt-subanswer";
    case PerturbationKind::CorruptFinalAnswer: return "corrupt-final-answer";
    case PerturbationKind::BreakTag: return "break-tag";
    case PerturbationKind::ShufflePlanOrder: return "shuffle-plan-order";
  }
  return "unknown";
}

namespace detail_synth {

// mt19937_64 is pinned by the standard, so seeded fixtures are byte-stable
// across platforms; std::uniform_int_distribution is not, hence the modulo.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  std::uint64_t next() { return gen(); }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

inline constexpr std::array<std::string_view, 40> kWords = {
    "amber",   "basalt", "cedar",  "delta",  "ember",  "falcon", "garnet", "harbor",
    "indigo",  "juniper", "krypton", "lumen", "marble", "nectar", "onyx",   "prairie",
    "quartz",  "reef",   "saffron", "timber", "umber",  "violet", "walnut", "xenon",
    "yarrow",  "zephyr", "beacon",  "canyon", "dune",   "fjord",  "glacier", "heron",
    "islet",   "jade",   "kelp",    "lagoon", "mesa",   "nimbus", "orchid",  "pine"};

// Answers and questions draw from a per-fixture shuffled word deck so that
// no two subgoals in one fixture share vocabulary.
struct WordDeck {
  std::vector<int> order;
  std::size_t cursor = 0;

  explicit WordDeck(Rng& rng) {
    order.resize(kWords.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(static_cast<int>(i)))]);
  }

  std::string draw() {
    std::string w(kWords[static_cast<std::size_t>(order[cursor % order.size()])]);
    if (cursor >= order.size()) w += std::to_string(cursor / order.size());
    ++cursor;
    return w;
  }
};

struct Block {
  std::string think;
  std::string search;
  std::string information;
  int placeholder = 0;
  std::string answer;
};

struct Sketch {
  std::string preamble;  // top-level think before the plan, may be empty
  std::string closing;   // top-level think before the answer, may be empty
  std::vector<Subgoal> entries;
  std::vector<Block> blocks;
  std::string final_answer;
};

inline std::string emit(const Sketch& s) {
  nlohmann::ordered_json plan = nlohmann::ordered_json::object();
  for (const Subgoal& sg : s.entries) plan[sg.id] = {sg.question, sg.output.render()};

  std::string out;
  if (!s.preamble.empty()) out += "<think> " + s.preamble + " </think>\n";
  out += "<plan>\n" + plan.dump() + "\n</plan>\n";
  for (const Block& b : s.blocks) {
    out += "<subPlan>\n";
    out += "  <think> " + b.think + " </think>\n";
    out += "  <search> " + b.search + " </search>\n";
    out += "  <information> " + b.information + " </information>\n";
    out += "  <subAnswer> #" + std::to_string(b.placeholder) + " = " + b.answer +
           " </subAnswer>\n";
    out += "</subPlan>\n";
  }
  if (!s.closing.empty()) out += "<think> " + s.closing + " </think>\n";
  out += "<answer> " + s.final_answer + " </answer>\n";
  return out;
}

// Producer positions per node for the requested shape.
inline std::vector<std::vector<int>> shape_edges(Rng& rng, int n, Topology topo) {
  std::vector<std::vector<int>> producers(static_cast<std::size_t>(n));
  switch (topo) {
    case Topology::Chain:
      for (int i = 1; i < n; ++i) producers[i] = {i - 1};
      break;
    case Topology::Tree:
      for (int i = 1; i < n; ++i) producers[i] = {rng.below(i)};
      break;
    case Topology::Diamond:
      // Fan out from the first node and back into the last; n=4 is the
      // classic diamond, smaller n degrades to a chain.
      if (n <= 3) {
        for (int i = 1; i < n; ++i) producers[i] = {i - 1};
      } else {
        for (int i = 1; i + 1 < n; ++i) producers[i] = {0};
        for (int i = 1; i + 1 < n; ++i) producers[n - 1].push_back(i);
      }
      break;
    case Topology::RandomDag:
      for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j)
          if (rng.below(3) == 0) producers[i].push_back(j);
      break;
  }
  return producers;
}

inline Sketch make_sketch(std::uint64_t seed, int n_subgoals, Topology topo) {
  if (n_subgoals < 1 || n_subgoals > 6)
    raise(ErrorCode::MalformedInput, "fixture wants 1..6 subgoals");
  Rng rng(seed);
  WordDeck deck(rng);
  auto producers = shape_edges(rng, n_subgoals, topo);

  Sketch s;
  s.preamble = "break the question into ordered subgoals";
  s.closing = "combine the sub-answers";
  for (int i = 0; i < n_subgoals; ++i) {
    std::string question = "which " + deck.draw() + " connects " + deck.draw();
    for (int p : producers[static_cast<std::size_t>(i)]) question += " with #" + std::to_string(p + 1);
    question += "?";
    s.entries.push_back({"Q" + std::to_string(i + 1), question, Placeholder{i + 1}});
  }

  std::vector<std::string> answers(static_cast<std::size_t>(n_subgoals));
  for (int i = 0; i < n_subgoals; ++i)
    answers[static_cast<std::size_t>(i)] = deck.draw() + " " + deck.draw();

  PlanGraph plan = build_plan_graph(s.entries);
  PlaceholderBindings bindings;
  int last = 0;
  for (int i : topological_indices(plan)) {
    const Subgoal& sg = plan.nodes()[static_cast<std::size_t>(i)];
    Block b;
    b.think = "work on " + sg.id;
    b.search = placeholder_substitute(sg.question, bindings);
    b.answer = answers[static_cast<std::size_t>(i)];
    b.information = "retrieved notes mention " + b.answer + " in this context";
    b.placeholder = sg.output.index;
    bindings[sg.output.index] = b.answer;
    s.blocks.push_back(std::move(b));
    last = i;
  }
  s.final_answer = answers[static_cast<std::size_t>(last)];
  return s;
}

inline Sketch sketch_from_trajectory(const Trajectory& traj) {
  if (!traj.plan || !traj.final_answer)
    raise(ErrorCode::NotApplicable, "trajectory lacks a plan or final answer");
  Sketch s;
  s.entries = traj.plan->nodes();
  s.final_answer = *traj.final_answer;

  std::vector<const Segment*> subplans;
  planscore::detail::collect_kind(traj.segments, SegmentKind::SubPlan, subplans);
  int ordinal = 0;
  for (const Segment* sp : subplans) {
    ++ordinal;
    Block b;
    bool have_answer = false;
    for (const Segment& child : sp->children) {
      switch (child.kind) {
        case SegmentKind::Think:
          if (b.think.empty()) b.think = std::string(planscore::detail::trim(child.text));
          break;
        case SegmentKind::Search:
          if (b.search.empty()) b.search = std::string(planscore::detail::trim(child.text));
          break;
        case SegmentKind::Information:
          if (b.information.empty())
            b.information = std::string(planscore::detail::trim(child.text));
          break;
        case SegmentKind::SubAnswer: {
          if (auto bound = planscore::detail::parse_explicit_binding(child.text)) {
            b.placeholder = bound->first;
            b.answer = bound->second;
            have_answer = true;
          } else if (ordinal <= static_cast<int>(traj.plan->node_count())) {
            b.placeholder = traj.plan->nodes()[static_cast<std::size_t>(ordinal - 1)].output.index;
            b.answer = std::string(planscore::detail::trim(child.text));
            have_answer = true;
          }
          break;
        }
        default:
          break;
      }
    }
    if (!have_answer || b.think.empty() || b.search.empty() || b.information.empty())
      raise(ErrorCode::NotApplicable, "sub-plan is not in canonical shape");
    s.blocks.push_back(std::move(b));
  }

  std::vector<const Segment*> thinks;
  for (const Segment& seg : traj.segments)
    if (seg.kind == SegmentKind::Think) thinks.push_back(&seg);
  if (!thinks.empty()) s.preamble = std::string(planscore::detail::trim(thinks.front()->text));
  if (thinks.size() > 1) s.closing = std::string(planscore::detail::trim(thinks.back()->text));
  return s;
}

inline constexpr std::string_view kJunkAnswer = "zzxqvj";

}  // namespace detail_synth

struct GoldFixture {
  GoldRecord gold;
  Trajectory trajectory;
};

// Deterministic in (seed, n_subgoals, topology); the returned trajectory is
// format-compliant and scores a perfect breakdown against the returned gold.
inline GoldFixture generate_gold(std::uint64_t seed, int n_subgoals, Topology topo) {
  detail_synth::Sketch s = detail_synth::make_sketch(seed, n_subgoals, topo);
  GoldFixture fx;
  fx.gold.question = "what does case " + std::to_string(seed) + " resolve to?";
  fx.gold.plan = build_plan_graph(s.entries);
  for (const detail_synth::Block& b : s.blocks) fx.gold.sub_answers[b.placeholder] = b.answer;
  fx.gold.final_answers = {s.final_answer};
  fx.trajectory = parse_trajectory(detail_synth::emit(s));
  validate_gold(fx.gold);
  return fx;
}

// One targeted corruption of a canonical trajectory.  Raises NotApplicable
// when the trajectory has no room for the requested defect (e.g. dropping a
// subgoal from a 1-node plan).
inline Trajectory perturb(const Trajectory& traj, const GoldRecord& gold, PerturbationKind kind,
                          std::uint64_t seed) {
  using detail_synth::Rng;
  using detail_synth::Sketch;
  Rng rng(seed);

  if (kind == PerturbationKind::BreakTag) {
    std::string text = serialize_trajectory(traj);
    std::vector<std::pair<std::size_t, std::size_t>> closers;  // (pos, len)
    for (std::size_t i = 0; i + 1 < text.size(); ++i) {
      if (text[i] != '<' || text[i + 1] != '/') continue;
      if (auto tok = planscore::detail::match_tag(text, i)) closers.emplace_back(i, tok->len);
    }
    if (closers.empty()) raise(ErrorCode::NotApplicable, "no closing tags to break");
    auto [pos, len] = closers[static_cast<std::size_t>(rng.below(static_cast<int>(closers.size())))];
    text.erase(pos, len);
    return parse_trajectory(text);
  }

  Sketch s = detail_synth::sketch_from_trajectory(traj);
  const int n = static_cast<int>(s.entries.size());

  switch (kind) {
    case PerturbationKind::DropSubgoal: {
      if (n < 2) raise(ErrorCode::NotApplicable, "cannot drop from a 1-subgoal plan");
      // Only sinks are safe to drop: nothing else references their slot.
      const PlanGraph& plan = *traj.plan;
      std::vector<int> sinks;
      for (int i = 0; i < n; ++i) {
        bool has_out = false;
        for (const auto& [u, v] : plan.edges())
          if (u == i) { has_out = true; break; }
        if (!has_out) sinks.push_back(i);
      }
      int pick = sinks[static_cast<std::size_t>(rng.below(static_cast<int>(sinks.size())))];
      int slot = s.entries[static_cast<std::size_t>(pick)].output.index;
      s.entries.erase(s.entries.begin() + pick);
      for (std::size_t b = 0; b < s.blocks.size(); ++b) {
        if (s.blocks[b].placeholder == slot) {
          s.blocks.erase(s.blocks.begin() + static_cast<std::ptrdiff_t>(b));
          break;
        }
      }
      break;
    }
    case PerturbationKind::AddSpuriousSubgoal: {
      int max_slot = 0;
      for (const Subgoal& sg : s.entries) max_slot = std::max(max_slot, sg.output.index);
      std::string id = "Q" + std::to_string(n + 1);
      auto taken = [&](const std::string& candidate) {
        for (const Subgoal& sg : s.entries)
          if (sg.id == candidate) return true;
        return false;
      };
      while (taken(id)) id += "s";
      detail_synth::Rng word_rng(seed + 1);
      detail_synth::WordDeck deck(word_rng);
      s.entries.push_back({id, "which " + deck.draw() + " accompanies " + deck.draw() + "?",
                           Placeholder{max_slot + 1}});
      break;
    }
    case PerturbationKind::RewireDependency: {
      const PlanGraph& plan = *traj.plan;
      // Reachability closure, so a rewire can never introduce a cycle.
      std::vector<std::vector<bool>> reach(static_cast<std::size_t>(n),
                                           std::vector<bool>(static_cast<std::size_t>(n), false));
      for (int start = 0; start < n; ++start) {
        std::vector<int> stack = {start};
        while (!stack.empty()) {
          int u = stack.back();
          stack.pop_back();
          for (const auto& [a, b] : plan.edges()) {
            if (a == u && !reach[static_cast<std::size_t>(start)][static_cast<std::size_t>(b)]) {
              reach[static_cast<std::size_t>(start)][static_cast<std::size_t>(b)] = true;
              stack.push_back(b);
            }
          }
        }
      }
      struct Option { int node; int old_slot; int new_slot; };
      std::vector<Option> options;
      for (const auto& [u, v] : plan.edges()) {
        for (int w = 0; w < n; ++w) {
          if (w == u || w == v) continue;
          if (reach[static_cast<std::size_t>(v)][static_cast<std::size_t>(w)]) continue;
          options.push_back({v, s.entries[static_cast<std::size_t>(u)].output.index,
                             s.entries[static_cast<std::size_t>(w)].output.index});
        }
      }
      if (options.empty()) raise(ErrorCode::NotApplicable, "no acyclic rewire exists");
      Option opt = options[static_cast<std::size_t>(rng.below(static_cast<int>(options.size())))];
      std::string& q = s.entries[static_cast<std::size_t>(opt.node)].question;
      std::string rebuilt;
      std::size_t cursor = 0;
      for (const PlaceholderRef& ref : scan_placeholder_refs(q)) {
        rebuilt.append(q, cursor, ref.pos - cursor);
        rebuilt += "#" + std::to_string(ref.index == opt.old_slot ? opt.new_slot : ref.index);
        cursor = ref.pos + ref.len;
      }
      rebuilt.append(q, cursor, q.size() - cursor);
      q = std::move(rebuilt);
      break;
    }
    case PerturbationKind::CorruptSubAnswer: {
      if (s.blocks.empty()) raise(ErrorCode::NotApplicable, "no sub-answers to corrupt");
      auto& block = s.blocks[static_cast<std::size_t>(rng.below(static_cast<int>(s.blocks.size())))];
      block.answer = std::string(detail_synth::kJunkAnswer);
      break;
    }
    case PerturbationKind::CorruptFinalAnswer: {
      std::string junk(detail_synth::kJunkAnswer);
      for (const std::string& g : gold.final_answers)
        if (normalize_answer(g) == normalize_answer(junk)) junk += "z";
      s.final_answer = junk;
      break;
    }
    case PerturbationKind::ShufflePlanOrder: {
      if (n < 2) raise(ErrorCode::NotApplicable, "nothing to reorder");
      std::vector<std::size_t> perm(static_cast<std::size_t>(n));
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
      for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.below(static_cast<int>(i)))]);
      bool identity = true;
      for (std::size_t i = 0; i < perm.size(); ++i)
        if (perm[i] != i) { identity = false; break; }
      if (identity) std::swap(perm[0], perm[1]);
      std::vector<Subgoal> reordered;
      reordered.reserve(perm.size());
      for (std::size_t i : perm) reordered.push_back(s.entries[i]);
      s.entries = std::move(reordered);
      break;
    }
    case PerturbationKind::BreakTag:
      break;  // handled above
  }
  return parse_trajectory(detail_synth::emit(s));
}

}  // namespace planscore::synth
