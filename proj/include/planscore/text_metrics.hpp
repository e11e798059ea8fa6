#pragma once

// Exact-match / token-F1 answer scoring over conservatively normalized text:
// lowercase, strip punctuation, drop standalone articles, collapse
// whitespace.  Multi-reference scores take the best gold.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "planscore/errors.hpp"
#include "planscore/strings.hpp"

namespace planscore {

namespace detail {

inline bool is_ascii_punct(char c) {
  static constexpr std::string_view kPunct = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";
  return kPunct.find(c) != std::string_view::npos;
}

// Word characters for article boundaries: ASCII alphanumerics, plus any
// non-ASCII byte so multi-byte sequences stay intact.
inline bool is_word_char(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || u >= 0x80;
}

}  // namespace detail

inline std::string normalize_answer(std::string_view s) {
  std::string lowered;
  lowered.reserve(s.size());
  for (char c : s)
    if (!detail::is_ascii_punct(c)) lowered += detail::ascii_lower(c);

  // Replace standalone "a" / "an" / "the" word runs with a space.
  std::string no_articles;
  no_articles.reserve(lowered.size());
  std::size_t i = 0;
  while (i < lowered.size()) {
    if (!detail::is_word_char(lowered[i])) {
      no_articles += lowered[i++];
      continue;
    }
    std::size_t b = i;
    while (i < lowered.size() && detail::is_word_char(lowered[i])) ++i;
    std::string_view word(lowered.data() + b, i - b);
    if (word == "a" || word == "an" || word == "the")
      no_articles += ' ';
    else
      no_articles.append(word);
  }

  std::string out;
  out.reserve(no_articles.size());
  for (const std::string& tok : detail::split_ws(no_articles)) {
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

inline int exact_match(std::string_view pred, const std::vector<std::string>& golds) {
  std::string p = normalize_answer(pred);
  for (const std::string& g : golds)
    if (p == normalize_answer(g)) return 1;
  return 0;
}

namespace detail {

inline double f1_single(const std::vector<std::string>& pred_tokens,
                        const std::vector<std::string>& gold_tokens) {
  if (pred_tokens.empty() && gold_tokens.empty()) return 1.0;
  if (pred_tokens.empty() || gold_tokens.empty()) return 0.0;
  std::map<std::string, int> bag;
  for (const std::string& t : gold_tokens) bag[t]++;
  int common = 0;
  for (const std::string& t : pred_tokens) {
    auto it = bag.find(t);
    if (it != bag.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  double precision = static_cast<double>(common) / pred_tokens.size();
  double recall = static_cast<double>(common) / gold_tokens.size();
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace detail

// Token-level F1 with multiset overlap; best score over the gold aliases.
inline double token_f1(std::string_view pred, const std::vector<std::string>& golds) {
  std::vector<std::string> pred_tokens = detail::split_ws(normalize_answer(pred));
  double best = 0.0;
  for (const std::string& g : golds)
    best = std::max(best, detail::f1_single(pred_tokens, detail::split_ws(normalize_answer(g))));
  return best;
}

struct EvalRow {
  std::string id;
  std::string prediction;
  std::vector<std::string> golds;
};

struct ExampleScore {
  std::string id;
  int em = 0;
  double f1 = 0.0;
};

struct EvalSummary {
  std::size_t n = 0;
  double em = 0.0;  // mean exact match
  double f1 = 0.0;  // mean token F1
  std::vector<ExampleScore> per_example;  // sorted by id
};

inline EvalSummary summarize(const std::vector<EvalRow>& rows) {
  std::set<std::string> ids;
  for (const EvalRow& row : rows)
    if (!ids.insert(row.id).second) raise(ErrorCode::DuplicateId, row.id);

  EvalSummary s;
  s.n = rows.size();
  double em_sum = 0.0, f1_sum = 0.0;
  for (const EvalRow& row : rows) {
    ExampleScore ex{row.id, exact_match(row.prediction, row.golds),
                    token_f1(row.prediction, row.golds)};
    em_sum += ex.em;
    f1_sum += ex.f1;
    s.per_example.push_back(std::move(ex));
  }
  std::sort(s.per_example.begin(), s.per_example.end(),
            [](const ExampleScore& a, const ExampleScore& b) { return a.id < b.id; });
  if (s.n > 0) {
    s.em = em_sum / static_cast<double>(s.n);
    s.f1 = f1_sum / static_cast<double>(s.n);
  }
  return s;
}

}  // namespace planscore
