#pragma once

// Plan graphs: a numbered list of subgoal questions whose "#k" placeholder
// references induce a dependency DAG.  Node identity is positional; edges are
// derived from the question text, never stored independently.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "planscore/errors.hpp"
#include "planscore/strings.hpp"

namespace planscore {

struct Placeholder {
  int index = 0;  // valid placeholders have index >= 1

  std::string render() const { return "#" + std::to_string(index); }

  friend bool operator==(const Placeholder&, const Placeholder&) = default;
  friend auto operator<=>(const Placeholder&, const Placeholder&) = default;
};

struct Subgoal {
  std::string id;        // label such as "Q1"; unique within a plan
  std::string question;  // may reference other subgoals' placeholders
  Placeholder output;    // slot this subgoal's answer fills
};

// A "#k" occurrence inside free text.
struct PlaceholderRef {
  std::size_t pos = 0;  // offset of '#'
  std::size_t len = 0;  // length including '#'
  int index = 0;
};

// Maximal-munch scan: "#12" is one reference to slot 12, never "#1" plus '2'.
// A '#' followed by a leading zero or an implausibly long digit run is left
// as literal text.
inline std::vector<PlaceholderRef> scan_placeholder_refs(std::string_view text) {
  std::vector<PlaceholderRef> refs;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '#') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && detail::is_ascii_digit(text[j])) ++j;
    std::size_t digits = j - i - 1;
    if (digits >= 1 && digits <= 9 && text[i + 1] != '0') {
      int index = 0;
      for (std::size_t k = i + 1; k < j; ++k) index = index * 10 + (text[k] - '0');
      refs.push_back({i, j - i, index});
    }
    i = j > i ? j : i + 1;
  }
  return refs;
}

using PlaceholderBindings = std::map<int, std::string>;

// Left-to-right substitution of every "#k" reference.  References without a
// binding are an error; '#' sequences that are not references pass through.
inline std::string placeholder_substitute(std::string_view text, const PlaceholderBindings& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const PlaceholderRef& ref : scan_placeholder_refs(text)) {
    auto it = bindings.find(ref.index);
    if (it == bindings.end())
      raise(ErrorCode::UnboundPlaceholder, "no binding for #" + std::to_string(ref.index));
    out.append(text.substr(cursor, ref.pos - cursor));
    out.append(it->second);
    cursor = ref.pos + ref.len;
  }
  out.append(text.substr(cursor));
  return out;
}

class PlanGraph;
inline PlanGraph build_plan_graph(const std::vector<Subgoal>& entries);

class PlanGraph {
 public:
  PlanGraph() = default;

  const std::vector<Subgoal>& nodes() const { return nodes_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_edge(int from, int to) const {
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(from, to));
  }

  // Position of the node that fills the given slot, if any.
  std::optional<int> producer_of(int placeholder_index) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].output.index == placeholder_index) return static_cast<int>(i);
    return std::nullopt;
  }

  friend PlanGraph build_plan_graph(const std::vector<Subgoal>& entries);

 private:
  std::vector<Subgoal> nodes_;
  std::vector<std::pair<int, int>> edges_;  // sorted (from, to) position pairs
};

inline PlanGraph build_plan_graph(const std::vector<Subgoal>& entries) {
  if (entries.empty()) raise(ErrorCode::MalformedInput, "plan has no subgoals");

  std::map<int, int> producer;  // placeholder index -> node position
  std::set<std::string> ids;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Subgoal& sg = entries[i];
    if (sg.question.empty()) raise(ErrorCode::MalformedInput, "empty question in " + sg.id);
    if (!ids.insert(sg.id).second) raise(ErrorCode::MalformedInput, "duplicate subgoal id " + sg.id);
    if (sg.output.index < 1)
      raise(ErrorCode::MalformedInput, "placeholder index must be >= 1 in " + sg.id);
    if (!producer.emplace(sg.output.index, static_cast<int>(i)).second)
      raise(ErrorCode::DuplicatePlaceholder, sg.output.render() + " declared twice");
  }

  std::set<std::pair<int, int>> edge_set;
  for (std::size_t v = 0; v < entries.size(); ++v) {
    for (const PlaceholderRef& ref : scan_placeholder_refs(entries[v].question)) {
      auto it = producer.find(ref.index);
      if (it == producer.end())
        raise(ErrorCode::DanglingReference,
              "#" + std::to_string(ref.index) + " referenced by " + entries[v].id +
                  " has no producing subgoal");
      if (it->second == static_cast<int>(v))
        raise(ErrorCode::CycleDetected, entries[v].id + " references its own output");
      edge_set.emplace(it->second, static_cast<int>(v));
    }
  }

  PlanGraph g;
  g.nodes_ = entries;
  g.edges_.assign(edge_set.begin(), edge_set.end());

  // Kahn pass purely to reject cycles; ordering is recomputed on demand.
  std::vector<int> indegree(g.nodes_.size(), 0);
  for (const auto& [u, v] : g.edges_) indegree[v]++;
  std::vector<int> ready;
  for (std::size_t i = 0; i < indegree.size(); ++i)
    if (indegree[i] == 0) ready.push_back(static_cast<int>(i));
  std::size_t seen = 0;
  while (!ready.empty()) {
    int u = ready.back();
    ready.pop_back();
    ++seen;
    for (const auto& [a, b] : g.edges_)
      if (a == u && --indegree[b] == 0) ready.push_back(b);
  }
  if (seen != g.nodes_.size()) raise(ErrorCode::CycleDetected, "placeholder references form a cycle");
  return g;
}

// Kahn's algorithm; ties broken by original node order, so the result is
// deterministic for a given plan.
inline std::vector<int> topological_indices(const PlanGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<int> indegree(n, 0);
  for (const auto& [u, v] : g.edges()) indegree[v]++;
  std::vector<bool> done(n, false);
  std::vector<int> order;
  order.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    int pick = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && indegree[i] == 0) {
        pick = static_cast<int>(i);
        break;
      }
    }
    if (pick < 0) raise(ErrorCode::CycleDetected, "not a DAG");
    done[pick] = true;
    order.push_back(pick);
    for (const auto& [u, v] : g.edges())
      if (u == pick) indegree[v]--;
  }
  return order;
}

inline std::vector<std::string> topological_order(const PlanGraph& g) {
  std::vector<std::string> ids;
  for (int i : topological_indices(g)) ids.push_back(g.nodes()[i].id);
  return ids;
}

// Canonical JSON form: {"Q1": ["<question>", "#1"], ...} with node order
// taken from the object's textual key order.
inline PlanGraph plan_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object() || j.empty())
    raise(ErrorCode::MalformedInput, "plan must be a non-empty JSON object");
  std::vector<Subgoal> entries;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_array() || value.size() != 2 || !value[0].is_string() || !value[1].is_string())
      raise(ErrorCode::MalformedInput, "plan entry " + key + " must be [question, \"#k\"]");
    std::string_view slot = detail::trim(value[1].get_ref<const std::string&>());
    auto refs = scan_placeholder_refs(slot);
    if (refs.size() != 1 || refs[0].pos != 0 || refs[0].len != slot.size())
      raise(ErrorCode::MalformedInput, "plan entry " + key + " has a malformed placeholder");
    entries.push_back({key, value[0].get<std::string>(), Placeholder{refs[0].index}});
  }
  return build_plan_graph(entries);
}

inline nlohmann::ordered_json plan_to_json(const PlanGraph& g) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const Subgoal& sg : g.nodes()) j[sg.id] = {sg.question, sg.output.render()};
  return j;
}

}  // namespace planscore
