#pragma once

// Question embeddings for node affinity.  The built-in embedder is a hashed
// bag of normalized tokens: cheap, dependency-free, and bit-deterministic
// across runs, which matters more here than embedding quality.  Callers with
// a real encoder implement the same interface.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "planscore/text_metrics.hpp"

namespace planscore {

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) const = 0;
  virtual std::size_t dim() const = 0;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

class HashedBowEmbedder final : public Embedder {
 public:
  explicit HashedBowEmbedder(std::size_t dim = 256) : dim_(dim) {}

  std::size_t dim() const override { return dim_; }

  std::vector<double> embed(std::string_view text) const override {
    std::vector<double> v(dim_, 0.0);
    std::vector<std::string> tokens = detail::split_ws(normalize_answer(text));
    // Normalization can eat the whole string (e.g. punctuation only); fall
    // back to the raw bytes so non-empty input never maps to the zero vector.
    if (tokens.empty() && !text.empty()) tokens.emplace_back(text);
    for (const std::string& tok : tokens) v[detail::fnv1a64(tok) % dim_] += 1.0;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    return v;
  }

 private:
  std::size_t dim_;
};

// Zero when either vector has zero norm (so empty text is simply unrelated).
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  for (std::size_t i = n; i < a.size(); ++i) na += a[i] * a[i];
  for (std::size_t i = n; i < b.size(); ++i) nb += b[i] * b[i];
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace planscore
