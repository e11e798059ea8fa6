#pragma once

// Tagged rollout protocol: <think>, <plan>, <subPlan>, <search>,
// <information>, <subAnswer>, <answer>.  Parsing is best-effort and total:
// malformed input degrades to fewer extracted segments, never to an abort.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "planscore/errors.hpp"
#include "planscore/plan_graph.hpp"
#include "planscore/strings.hpp"

namespace planscore {

enum class SegmentKind { Think, Plan, SubPlan, Search, Information, SubAnswer, Answer };

inline std::string_view tag_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::Think: return "think";
    case SegmentKind::Plan: return "plan";
    case SegmentKind::SubPlan: return "subPlan";
    case SegmentKind::Search: return "search";
    case SegmentKind::Information: return "information";
    case SegmentKind::SubAnswer: return "subAnswer";
    case SegmentKind::Answer: return "answer";
  }
  return "";
}

inline constexpr std::array<SegmentKind, 7> kAllSegmentKinds = {
    SegmentKind::Think,  SegmentKind::Plan,        SegmentKind::SubPlan,
    SegmentKind::Search, SegmentKind::Information, SegmentKind::SubAnswer,
    SegmentKind::Answer};

struct Segment {
  SegmentKind kind;
  std::string text;       // verbatim content between the tags
  std::size_t begin = 0;  // offset of '<' of the opening tag
  std::size_t end = 0;    // offset one past '>' of the closing tag
  std::vector<Segment> children;
};

struct SubAnswerBinding {
  Placeholder placeholder;
  std::string answer;
  bool implicit = false;  // bound by sub-plan position, without a "#k =" prefix
};

struct Trajectory {
  std::string raw_text;
  std::vector<Segment> segments;           // top-level elements, document order
  std::optional<PlanGraph> plan;           // first plan payload that builds
  std::vector<SubAnswerBinding> sub_answers;
  std::optional<std::string> final_answer;  // first <answer> content, trimmed

  // Parse bookkeeping consumed by check_format.
  bool tags_balanced = true;
  int plan_segment_count = 0;
};

struct FormatVerdict {
  bool compliant = false;
  std::vector<std::string> violations;       // any entry here flips compliance
  std::vector<std::string> soft_violations;  // recorded but tolerated
};

namespace detail {

struct TagToken {
  SegmentKind kind;
  bool closing;
  std::size_t len;  // token length in the raw text
};

// Exact, case-sensitive match of "<name>" or "</name>" at `pos`; anything
// else is treated as plain text.
inline std::optional<TagToken> match_tag(std::string_view raw, std::size_t pos) {
  if (pos >= raw.size() || raw[pos] != '<') return std::nullopt;
  bool closing = pos + 1 < raw.size() && raw[pos + 1] == '/';
  std::size_t name_pos = pos + (closing ? 2 : 1);
  if (name_pos >= raw.size()) return std::nullopt;
  for (SegmentKind kind : kAllSegmentKinds) {
    std::string_view name = tag_name(kind);
    if (raw.compare(name_pos, name.size(), name) != 0) continue;
    std::size_t close_pos = name_pos + name.size();
    if (close_pos < raw.size() && raw[close_pos] == '>')
      return TagToken{kind, closing, close_pos + 1 - pos};
  }
  return std::nullopt;
}

// "#k = <answer>" with flexible whitespace; returns nothing for plain text.
inline std::optional<std::pair<int, std::string>> parse_explicit_binding(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty() || s[0] != '#') return std::nullopt;
  std::size_t j = 1;
  while (j < s.size() && is_ascii_digit(s[j])) ++j;
  std::size_t digits = j - 1;
  if (digits < 1 || digits > 9 || s[1] == '0') return std::nullopt;
  int index = 0;
  for (std::size_t k = 1; k < j; ++k) index = index * 10 + (s[k] - '0');
  while (j < s.size() && is_ascii_space(s[j])) ++j;
  if (j >= s.size() || s[j] != '=') return std::nullopt;
  ++j;
  return std::make_pair(index, std::string(trim(s.substr(j))));
}

}  // namespace detail

inline Trajectory parse_trajectory(std::string raw) {
  Trajectory t;
  t.raw_text = std::move(raw);
  const std::string& raw_text = t.raw_text;

  struct Frame {
    SegmentKind kind;
    std::size_t open_begin;
    std::size_t content_begin;
    std::vector<Segment> children;
  };
  std::vector<Frame> stack;

  auto sink_for = [&](std::vector<Frame>& frames) -> std::vector<Segment>& {
    return frames.empty() ? t.segments : frames.back().children;
  };

  std::size_t i = 0;
  while (i < raw_text.size()) {
    std::size_t p = raw_text.find('<', i);
    if (p == std::string::npos) break;
    auto tok = detail::match_tag(raw_text, p);
    if (!tok) {
      i = p + 1;
      continue;
    }
    if (!tok->closing) {
      stack.push_back({tok->kind, p, p + tok->len, {}});
      i = p + tok->len;
      continue;
    }
    // Closing tag: find the nearest open element of the same kind.
    int target = -1;
    for (int d = static_cast<int>(stack.size()) - 1; d >= 0; --d) {
      if (stack[d].kind == tok->kind) {
        target = d;
        break;
      }
    }
    if (target < 0) {
      t.tags_balanced = false;  // stray close
      i = p + tok->len;
      continue;
    }
    // Elements opened after the target never got closed; keep their children.
    while (static_cast<int>(stack.size()) - 1 > target) {
      Frame dropped = std::move(stack.back());
      stack.pop_back();
      t.tags_balanced = false;
      auto& sink = sink_for(stack);
      for (Segment& child : dropped.children) sink.push_back(std::move(child));
    }
    Frame f = std::move(stack.back());
    stack.pop_back();
    Segment seg{f.kind, raw_text.substr(f.content_begin, p - f.content_begin), f.open_begin,
                p + tok->len, std::move(f.children)};
    sink_for(stack).push_back(std::move(seg));
    i = p + tok->len;
  }
  while (!stack.empty()) {
    Frame dropped = std::move(stack.back());
    stack.pop_back();
    t.tags_balanced = false;
    auto& sink = sink_for(stack);
    for (Segment& child : dropped.children) sink.push_back(std::move(child));
  }

  // Extraction walk: first viable plan, sub-answer bindings, final answer.
  int subplan_ordinal = 0;
  auto walk = [&](auto&& self, const std::vector<Segment>& segs, int enclosing_subplan) -> void {
    for (const Segment& seg : segs) {
      int here = enclosing_subplan;
      switch (seg.kind) {
        case SegmentKind::Plan: {
          ++t.plan_segment_count;
          if (!t.plan) {
            try {
              t.plan = plan_from_json(nlohmann::ordered_json::parse(seg.text));
            } catch (...) {
              // leave absent; check_format reports it
            }
          }
          break;
        }
        case SegmentKind::SubPlan:
          here = ++subplan_ordinal;
          break;
        case SegmentKind::SubAnswer: {
          if (auto bound = detail::parse_explicit_binding(seg.text)) {
            t.sub_answers.push_back({Placeholder{bound->first}, bound->second, false});
          } else if (here > 0 && t.plan && here <= static_cast<int>(t.plan->node_count())) {
            t.sub_answers.push_back({t.plan->nodes()[here - 1].output,
                                     std::string(detail::trim(seg.text)), true});
          }
          break;
        }
        case SegmentKind::Answer:
          if (!t.final_answer) t.final_answer = std::string(detail::trim(seg.text));
          break;
        default:
          break;
      }
      self(self, seg.children, here);
    }
  };
  walk(walk, t.segments, 0);
  return t;
}

namespace detail {

inline void collect_kind(const std::vector<Segment>& segs, SegmentKind kind,
                         std::vector<const Segment*>& out) {
  for (const Segment& seg : segs) {
    if (seg.kind == kind) out.push_back(&seg);
    collect_kind(seg.children, kind, out);
  }
}

inline std::vector<const Segment*> collect_kind(const Trajectory& t, SegmentKind kind) {
  std::vector<const Segment*> out;
  collect_kind(t.segments, kind, out);
  return out;
}

inline bool subplan_children_well_formed(const Segment& sp) {
  int think = 0, search = 0, info = 0, sub = 0;
  int first_search = -1, first_info = -1;
  for (std::size_t i = 0; i < sp.children.size(); ++i) {
    switch (sp.children[i].kind) {
      case SegmentKind::Think: ++think; break;
      case SegmentKind::Search:
        if (first_search < 0) first_search = static_cast<int>(i);
        ++search;
        break;
      case SegmentKind::Information:
        if (first_info < 0) first_info = static_cast<int>(i);
        ++info;
        break;
      case SegmentKind::SubAnswer: ++sub; break;
      default: break;
    }
  }
  return think >= 1 && search >= 1 && info >= 1 && sub == 1 &&
         !sp.children.empty() && sp.children.front().kind == SegmentKind::Think &&
         sp.children.back().kind == SegmentKind::SubAnswer && first_search < first_info;
}

}  // namespace detail

// Structural compliance.  When tag balance already failed, the structural
// rules below would be judging a heuristic recovery rather than the rollout,
// so "unbalanced-tags" is reported alone.
inline FormatVerdict check_format(const Trajectory& t) {
  FormatVerdict v;
  if (!t.tags_balanced) {
    v.violations.push_back("unbalanced-tags");
    return v;
  }

  if (t.plan_segment_count == 0)
    v.violations.push_back("no-plan");
  else if (!t.plan)
    v.violations.push_back("bad-plan-json");
  if (t.plan_segment_count > 1) v.violations.push_back("multiple-plans");

  auto subplans = detail::collect_kind(t, SegmentKind::SubPlan);
  if (subplans.empty()) {
    v.violations.push_back("no-subplan");
  } else {
    for (const Segment* sp : subplans) {
      if (!detail::subplan_children_well_formed(*sp)) {
        v.violations.push_back("subplan-structure");
        break;
      }
    }
  }

  // retrieval tags live only directly under a sub-plan
  bool stray = false;
  auto stray_walk = [&](auto&& self, const std::vector<Segment>& segs, bool inside_subplan) -> void {
    for (const Segment& seg : segs) {
      if (seg.kind == SegmentKind::Search || seg.kind == SegmentKind::Information ||
          seg.kind == SegmentKind::SubAnswer) {
        if (!inside_subplan) stray = true;
      }
      self(self, seg.children, seg.kind == SegmentKind::SubPlan);
    }
  };
  stray_walk(stray_walk, t.segments, false);
  if (stray) v.violations.push_back("stray-tag");

  auto answers = detail::collect_kind(t, SegmentKind::Answer);
  if (answers.empty()) {
    v.violations.push_back("no-answer");
  } else if (answers.size() > 1) {
    v.violations.push_back("multiple-answers");
  } else {
    std::size_t last_subplan_end = 0;
    for (const Segment* sp : subplans) last_subplan_end = std::max(last_subplan_end, sp->end);
    if (answers[0]->begin < last_subplan_end) v.violations.push_back("answer-before-subplan");
  }

  if (t.plan) {
    int ordinal = 0;
    bool unbound = false, implicit = false;
    // Ordinals follow sub-plan document order, mirroring the extraction walk.
    auto walk = [&](auto&& self, const std::vector<Segment>& segs, int enclosing) -> void {
      for (const Segment& seg : segs) {
        int here = enclosing;
        if (seg.kind == SegmentKind::SubPlan) here = ++ordinal;
        if (seg.kind == SegmentKind::SubAnswer) {
          if (auto bound = detail::parse_explicit_binding(seg.text)) {
            if (!t.plan->producer_of(bound->first)) unbound = true;
          } else if (here > 0 && here <= static_cast<int>(t.plan->node_count())) {
            implicit = true;
          } else {
            unbound = true;
          }
        }
        self(self, seg.children, here);
      }
    };
    walk(walk, t.segments, 0);
    if (unbound) v.violations.push_back("unbound-subanswer");
    if (implicit) v.soft_violations.push_back("implicit-subanswer-binding");
  }

  v.compliant = v.violations.empty();
  return v;
}

// Token mask for retrieval spans: a token is masked iff its character span
// overlaps an <information> element, opening and closing tags included.
inline std::vector<bool> information_mask(
    const Trajectory& t, const std::vector<std::pair<std::size_t, std::size_t>>& token_spans) {
  std::size_t prev_end = 0;
  for (const auto& [s, e] : token_spans) {
    if (s > e || e > t.raw_text.size() || s < prev_end)
      raise(ErrorCode::SpanOutOfBounds,
            "token span [" + std::to_string(s) + ", " + std::to_string(e) +
                ") is out of order or out of bounds");
    prev_end = e;
  }
  auto info = detail::collect_kind(t, SegmentKind::Information);
  std::vector<bool> mask(token_spans.size(), false);
  for (std::size_t i = 0; i < token_spans.size(); ++i) {
    const auto& [s, e] = token_spans[i];
    for (const Segment* seg : info) {
      if (s < seg->end && seg->begin < e) {
        mask[i] = true;
        break;
      }
    }
  }
  return mask;
}

namespace detail {

inline void emit_segment(const Segment& seg, std::string& out, int depth) {
  std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  std::string_view name = tag_name(seg.kind);
  if (seg.kind == SegmentKind::SubPlan) {
    out += indent;
    out += "<";
    out += name;
    out += ">\n";
    for (const Segment& child : seg.children) emit_segment(child, out, depth + 1);
    out += indent;
    out += "</";
    out += name;
    out += ">\n";
  } else {
    out += indent;
    out += "<";
    out += name;
    out += ">";
    out += seg.text;
    out += "</";
    out += name;
    out += ">\n";
  }
}

}  // namespace detail

// Textual form that re-parses to the same segment kinds, plan, sub-answer
// bindings, and final answer.  Free text between elements is not preserved.
inline std::string serialize_trajectory(const Trajectory& t) {
  std::string out;
  for (const Segment& seg : t.segments) detail::emit_segment(seg, out, 0);
  return out;
}

}  // namespace planscore
