#pragma once

// Batch runners behind the command-line tool: config loading with
// environment overrides, JSONL input and output, gold resolution,
// group advantages, and a worker pool whose output is byte-identical
// regardless of worker count.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "planscore/advantage.hpp"
#include "planscore/embedder.hpp"
#include "planscore/errors.hpp"
#include "planscore/reward.hpp"
#include "planscore/selftest.hpp"
#include "planscore/strings.hpp"
#include "planscore/text_metrics.hpp"
#include "planscore/trajectory.hpp"

namespace planscore {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitPropertyViolation = 1;
inline constexpr int kExitMalformedInput = 2;
inline constexpr int kExitUnresolvedGold = 3;
inline constexpr int kExitGraphTooLarge = 4;

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnresolvedGold: return kExitUnresolvedGold;
    case ErrorCode::GraphTooLarge: return kExitGraphTooLarge;
    default: return kExitMalformedInput;
  }
}

struct EngineConfig {
  int total_steps = 200;
  double format_weight = 0.1;
  double structure_weight = 0.5;
  double semantic_weight = 0.5;
  double subgoal_weight = 0.5;
  double eps = 1e-6;
  int max_ged_nodes = 10;
  std::string embedder = "hashed-bow";
  int embed_dim = 256;
  EditCosts edit_costs;
};

namespace detail {

inline double json_number(const ordered_json& j, const std::string& key) {
  if (!j.is_number()) raise(ErrorCode::MalformedInput, "config key " + key + " must be a number");
  return j.get<double>();
}

inline int json_int(const ordered_json& j, const std::string& key) {
  if (!j.is_number_integer())
    raise(ErrorCode::MalformedInput, "config key " + key + " must be an integer");
  return j.get<int>();
}

inline double env_number(const std::string& name, const char* text) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != std::string(text).size()) throw std::invalid_argument(name);
    return v;
  } catch (const std::exception&) {
    raise(ErrorCode::MalformedInput, name + " is not a number: " + text);
  }
}

inline int env_int(const std::string& name, const char* text) {
  double v = env_number(name, text);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    raise(ErrorCode::MalformedInput, name + " is not an integer: " + text);
  return i;
}

}  // namespace detail

inline void validate_config(const EngineConfig& cfg) {
  if (cfg.total_steps < 1) raise(ErrorCode::MalformedInput, "total_steps must be >= 1");
  if (!(cfg.eps > 0.0)) raise(ErrorCode::MalformedInput, "eps must be > 0");
  if (cfg.max_ged_nodes < 1 || cfg.max_ged_nodes > kHardMaxAlignNodes)
    raise(ErrorCode::MalformedInput,
          "max_ged_nodes must be in [1, " + std::to_string(kHardMaxAlignNodes) + "]");
  if (cfg.embed_dim < 1) raise(ErrorCode::MalformedInput, "embed_dim must be >= 1");
  if (cfg.embedder != "hashed-bow")
    raise(ErrorCode::MalformedInput, "unknown embedder: " + cfg.embedder);
  for (double w : {cfg.format_weight, cfg.structure_weight, cfg.semantic_weight,
                   cfg.subgoal_weight})
    if (w < 0.0) raise(ErrorCode::MalformedInput, "reward weights must be >= 0");
  for (double c : {cfg.edit_costs.node_insert, cfg.edit_costs.node_delete,
                   cfg.edit_costs.edge_insert, cfg.edit_costs.edge_delete})
    if (c < 0.0) raise(ErrorCode::MalformedInput, "edit costs must be >= 0");
}

// JSON file first, then PLANSCORE_<KEY> environment variables on top.
// Unknown config keys are rejected so typos fail loudly.
inline EngineConfig load_config(const std::optional<std::string>& path) {
  EngineConfig cfg;
  auto apply_edit_costs = [&cfg](const ordered_json& value, const std::string& where) {
    if (!value.is_object()) raise(ErrorCode::MalformedInput, where + " must be an object");
    for (const auto& [ck, cv] : value.items()) {
      if (ck == "node_insert") cfg.edit_costs.node_insert = detail::json_number(cv, ck);
      else if (ck == "node_delete") cfg.edit_costs.node_delete = detail::json_number(cv, ck);
      else if (ck == "edge_insert") cfg.edit_costs.edge_insert = detail::json_number(cv, ck);
      else if (ck == "edge_delete") cfg.edit_costs.edge_delete = detail::json_number(cv, ck);
      else raise(ErrorCode::MalformedInput, "unknown edit_costs key: " + ck);
    }
  };
  if (path) {
    std::ifstream in(*path);
    if (!in) raise(ErrorCode::MalformedInput, "cannot open config file " + *path);
    ordered_json j;
    try {
      j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::MalformedInput, *path + ": " + e.what());
    }
    if (!j.is_object()) raise(ErrorCode::MalformedInput, *path + ": config must be an object");
    for (const auto& [key, value] : j.items()) {
      if (key == "total_steps") cfg.total_steps = detail::json_int(value, key);
      else if (key == "format_weight") cfg.format_weight = detail::json_number(value, key);
      else if (key == "structure_weight") cfg.structure_weight = detail::json_number(value, key);
      else if (key == "semantic_weight") cfg.semantic_weight = detail::json_number(value, key);
      else if (key == "subgoal_weight") cfg.subgoal_weight = detail::json_number(value, key);
      else if (key == "eps") cfg.eps = detail::json_number(value, key);
      else if (key == "max_ged_nodes") cfg.max_ged_nodes = detail::json_int(value, key);
      else if (key == "embedder") {
        if (!value.is_string()) raise(ErrorCode::MalformedInput, "embedder must be a string");
        cfg.embedder = value.get<std::string>();
      } else if (key == "embed_dim") cfg.embed_dim = detail::json_int(value, key);
      else if (key == "edit_costs") apply_edit_costs(value, "edit_costs");
      else raise(ErrorCode::MalformedInput, "unknown config key: " + key);
    }
  }

  auto env = [](const char* name) { return std::getenv(name); };
  if (const char* v = env("PLANSCORE_TOTAL_STEPS"))
    cfg.total_steps = detail::env_int("PLANSCORE_TOTAL_STEPS", v);
  if (const char* v = env("PLANSCORE_FORMAT_WEIGHT"))
    cfg.format_weight = detail::env_number("PLANSCORE_FORMAT_WEIGHT", v);
  if (const char* v = env("PLANSCORE_STRUCTURE_WEIGHT"))
    cfg.structure_weight = detail::env_number("PLANSCORE_STRUCTURE_WEIGHT", v);
  if (const char* v = env("PLANSCORE_SEMANTIC_WEIGHT"))
    cfg.semantic_weight = detail::env_number("PLANSCORE_SEMANTIC_WEIGHT", v);
  if (const char* v = env("PLANSCORE_SUBGOAL_WEIGHT"))
    cfg.subgoal_weight = detail::env_number("PLANSCORE_SUBGOAL_WEIGHT", v);
  if (const char* v = env("PLANSCORE_EPS")) cfg.eps = detail::env_number("PLANSCORE_EPS", v);
  if (const char* v = env("PLANSCORE_MAX_GED_NODES"))
    cfg.max_ged_nodes = detail::env_int("PLANSCORE_MAX_GED_NODES", v);
  if (const char* v = env("PLANSCORE_EMBEDDER")) cfg.embedder = v;
  if (const char* v = env("PLANSCORE_EMBED_DIM"))
    cfg.embed_dim = detail::env_int("PLANSCORE_EMBED_DIM", v);
  if (const char* v = env("PLANSCORE_EDIT_COSTS")) {
    ordered_json j;
    try {
      j = ordered_json::parse(v);
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::MalformedInput, std::string("PLANSCORE_EDIT_COSTS: ") + e.what());
    }
    apply_edit_costs(j, "PLANSCORE_EDIT_COSTS");
  }

  validate_config(cfg);
  return cfg;
}

inline ScoreOptions score_options(const EngineConfig& cfg) {
  ScoreOptions opts;
  opts.anneal.total_steps = cfg.total_steps;
  opts.anneal.format_weight = cfg.format_weight;
  opts.anneal.structure_weight = cfg.structure_weight;
  opts.anneal.semantic_weight = cfg.semantic_weight;
  opts.anneal.subgoal_weight = cfg.subgoal_weight;
  opts.costs = cfg.edit_costs;
  opts.max_align_nodes = cfg.max_ged_nodes;
  return opts;
}

// --- JSONL ------------------------------------------------------------

inline std::vector<ordered_json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::MalformedInput, "cannot open " + path);
  std::vector<ordered_json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      rows.push_back(ordered_json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::MalformedInput, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!rows.back().is_object())
      raise(ErrorCode::MalformedInput,
            path + ":" + std::to_string(lineno) + ": each line must be a JSON object");
  }
  return rows;
}

namespace detail {

inline std::string require_string(const ordered_json& row, const char* key,
                                  const std::string& where) {
  auto it = row.find(key);
  if (it == row.end() || !it->is_string())
    raise(ErrorCode::MalformedInput, where + ": missing string field \"" + key + "\"");
  return it->get<std::string>();
}

inline int placeholder_key(const std::string& key, const std::string& where) {
  std::string_view t = trim(key);
  auto refs = scan_placeholder_refs(t);
  if (refs.size() != 1 || refs[0].pos != 0 || refs[0].len != t.size())
    raise(ErrorCode::MalformedInput, where + ": bad placeholder key \"" + key + "\"");
  return refs[0].index;
}

}  // namespace detail

inline GoldRecord gold_from_json(const ordered_json& row, const std::string& where) {
  GoldRecord gold;
  gold.question = detail::require_string(row, "question", where);
  auto plan_it = row.find("plan");
  if (plan_it == row.end()) raise(ErrorCode::MalformedInput, where + ": missing \"plan\"");
  gold.plan = plan_from_json(*plan_it);
  auto sub_it = row.find("sub_answers");
  if (sub_it == row.end() || !sub_it->is_object())
    raise(ErrorCode::MalformedInput, where + ": missing object field \"sub_answers\"");
  for (const auto& [key, value] : sub_it->items()) {
    if (!value.is_string())
      raise(ErrorCode::MalformedInput, where + ": sub_answers values must be strings");
    gold.sub_answers[detail::placeholder_key(key, where)] = value.get<std::string>();
  }
  auto ans_it = row.find("answers");
  if (ans_it == row.end() || !ans_it->is_array() || ans_it->empty())
    raise(ErrorCode::MalformedInput, where + ": missing non-empty array field \"answers\"");
  for (const auto& a : *ans_it) {
    if (!a.is_string()) raise(ErrorCode::MalformedInput, where + ": answers must be strings");
    gold.final_answers.push_back(a.get<std::string>());
  }
  validate_gold(gold);
  return gold;
}

// --- score ------------------------------------------------------------

struct RolloutRecord {
  std::string id;
  std::string question;  // question text, or the id of a gold row
  std::optional<std::string> group_id;
  std::optional<int> step_t;
  std::string text;
  std::optional<std::vector<std::pair<std::size_t, std::size_t>>> token_spans;
};

inline RolloutRecord rollout_from_json(const ordered_json& row, const std::string& where) {
  RolloutRecord r;
  r.id = detail::require_string(row, "id", where);
  r.question = detail::require_string(row, "question", where);
  r.text = detail::require_string(row, "text", where);
  if (auto it = row.find("group_id"); it != row.end() && !it->is_null()) {
    if (!it->is_string()) raise(ErrorCode::MalformedInput, where + ": group_id must be a string");
    r.group_id = it->get<std::string>();
  }
  if (auto it = row.find("step_t"); it != row.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<int>() < 0)
      raise(ErrorCode::MalformedInput, where + ": step_t must be a non-negative integer");
    r.step_t = it->get<int>();
  }
  if (auto it = row.find("token_spans"); it != row.end() && !it->is_null()) {
    if (!it->is_array()) raise(ErrorCode::MalformedInput, where + ": token_spans must be an array");
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const auto& s : *it) {
      if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() ||
          !s[1].is_number_integer() || s[0].get<long long>() < 0 || s[1].get<long long>() < 0)
        raise(ErrorCode::MalformedInput, where + ": token_spans entries must be [begin, end]");
      spans.emplace_back(static_cast<std::size_t>(s[0].get<long long>()),
                         static_cast<std::size_t>(s[1].get<long long>()));
    }
    r.token_spans = std::move(spans);
  }
  return r;
}

// Golds are looked up by exact question text; a gold's optional "id" field
// is registered as an alias for the same record.  Any key collision is a
// hard input error.
inline std::map<std::string, std::size_t> index_golds(const std::vector<GoldRecord>& golds,
                                                      const std::vector<std::string>& alias_ids) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (!index.emplace(golds[i].question, i).second)
      raise(ErrorCode::DuplicateId, "gold question appears twice: " + golds[i].question);
    if (!alias_ids[i].empty() && !index.emplace(alias_ids[i], i).second)
      raise(ErrorCode::DuplicateId, "gold id collides with another key: " + alias_ids[i]);
  }
  return index;
}

namespace detail {

inline ordered_json reward_to_json(const RewardBreakdown& b) {
  ordered_json j = ordered_json::object();
  j["format"] = b.format;
  j["structure"] = b.structure;
  j["semantics"] = b.semantics;
  j["subgoals"] = b.subgoals;
  j["outcome"] = b.outcome;
  j["weight"] = b.weight;
  j["total"] = b.total;
  return j;
}

struct ScoredRow {
  ordered_json json;                 // row sans advantage fields
  std::optional<RewardBreakdown> reward;  // absent when alignment overflowed
  bool has_spans = false;
  std::vector<bool> mask;            // valid when has_spans
  bool overflowed = false;
};

}  // namespace detail

struct ScoreRunStats {
  std::size_t rows = 0;
  std::size_t scored = 0;
  std::size_t overflowed = 0;
  std::size_t groups = 0;
};

// Scores every rollout, then computes group-normalized advantages over the
// rows that share a group_id.  Row order and bytes are independent of the
// worker count: each input row writes to its own slot and the advantage
// pass runs single-threaded afterwards.
inline int run_score(const std::string& rollouts_path, const std::string& golds_path,
                     const EngineConfig& cfg, int default_step_t, int workers,
                     std::ostream& out, std::ostream& log, ScoreRunStats* stats_out = nullptr) {
  std::vector<ordered_json> gold_rows = read_jsonl(golds_path);
  std::vector<GoldRecord> golds;
  std::vector<std::string> alias_ids;
  for (std::size_t i = 0; i < gold_rows.size(); ++i) {
    std::string where = golds_path + " row " + std::to_string(i + 1);
    golds.push_back(gold_from_json(gold_rows[i], where));
    std::string alias;
    if (auto it = gold_rows[i].find("id"); it != gold_rows[i].end() && !it->is_null()) {
      if (!it->is_string()) raise(ErrorCode::MalformedInput, where + ": id must be a string");
      alias = it->get<std::string>();
    }
    alias_ids.push_back(alias);
  }
  std::map<std::string, std::size_t> gold_index = index_golds(golds, alias_ids);

  std::vector<ordered_json> rollout_rows = read_jsonl(rollouts_path);
  std::vector<RolloutRecord> rollouts;
  std::set<std::string> seen_ids;
  for (std::size_t i = 0; i < rollout_rows.size(); ++i) {
    std::string where = rollouts_path + " row " + std::to_string(i + 1);
    rollouts.push_back(rollout_from_json(rollout_rows[i], where));
    if (!seen_ids.insert(rollouts.back().id).second)
      raise(ErrorCode::DuplicateId, where + ": duplicate rollout id " + rollouts.back().id);
    if (!gold_index.count(rollouts.back().question))
      raise(ErrorCode::UnresolvedGold, where + ": no gold matches \"" +
                                           rollouts.back().question + "\"");
  }

  const ScoreOptions opts = score_options(cfg);
  const HashedBowEmbedder embedder(static_cast<std::size_t>(cfg.embed_dim));

  std::vector<detail::ScoredRow> scored(rollouts.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= rollouts.size()) return;
      try {
        const RolloutRecord& r = rollouts[i];
        const GoldRecord& gold = golds[gold_index.at(r.question)];
        int t = r.step_t.value_or(default_step_t);
        Trajectory traj = parse_trajectory(r.text);

        detail::ScoredRow& slot = scored[i];
        ordered_json& j = slot.json;
        j = ordered_json::object();
        j["schema_version"] = kSchemaVersion;
        j["id"] = r.id;
        j["group_id"] = r.group_id ? ordered_json(*r.group_id) : ordered_json(nullptr);
        j["step_t"] = t;

        try {
          ScoreResult res = score_trajectory(traj, gold, t, opts, embedder);
          j["status"] = "ok";
          j["format_compliant"] = res.verdict.compliant;
          j["violations"] = res.verdict.violations;
          j["soft_violations"] = res.verdict.soft_violations;
          j["reward"] = detail::reward_to_json(res.breakdown);
          j["matching"] = res.matching.pairs.size();
          slot.reward = res.breakdown;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::GraphTooLarge) throw;
          FormatVerdict verdict = check_format(traj);
          j["status"] = "graph-too-large";
          j["format_compliant"] = verdict.compliant;
          j["violations"] = verdict.violations;
          j["soft_violations"] = verdict.soft_violations;
          j["reward"] = nullptr;
          j["matching"] = nullptr;
          slot.overflowed = true;
        }

        if (r.token_spans) {
          slot.has_spans = true;
          slot.mask = information_mask(traj, *r.token_spans);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int thread_count = std::max(1, workers);
  if (thread_count == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < thread_count; ++w) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // group advantages, single-threaded, in first-appearance order
  std::map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::string> group_order;
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    if (!rollouts[i].group_id || !scored[i].reward) continue;
    auto [it, fresh] = groups.try_emplace(*rollouts[i].group_id);
    if (fresh) group_order.push_back(*rollouts[i].group_id);
    it->second.push_back(i);
  }
  std::vector<std::optional<double>> advantage(rollouts.size());
  std::size_t normalized_groups = 0;
  for (const std::string& gid : group_order) {
    const std::vector<std::size_t>& members = groups.at(gid);
    if (members.size() < 2) continue;
    std::vector<double> rewards;
    for (std::size_t i : members) rewards.push_back(scored[i].reward->total);
    std::vector<double> adv = group_advantages(rewards, cfg.eps);
    for (std::size_t k = 0; k < members.size(); ++k) advantage[members[k]] = adv[k];
    ++normalized_groups;
  }

  ScoreRunStats stats;
  stats.rows = rollouts.size();
  stats.groups = normalized_groups;
  RewardBreakdown mean{};
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    detail::ScoredRow& slot = scored[i];
    if (slot.reward) {
      ++stats.scored;
      mean.format += slot.reward->format;
      mean.structure += slot.reward->structure;
      mean.semantics += slot.reward->semantics;
      mean.subgoals += slot.reward->subgoals;
      mean.outcome += slot.reward->outcome;
      mean.weight += slot.reward->weight;
      mean.total += slot.reward->total;
    }
    if (slot.overflowed) ++stats.overflowed;
    slot.json["advantage"] = advantage[i] ? ordered_json(*advantage[i]) : ordered_json(nullptr);
    if (slot.has_spans) {
      if (advantage[i])
        slot.json["token_advantages"] = broadcast_with_mask(*advantage[i], slot.mask);
      else
        slot.json["token_advantages"] = nullptr;
    }
    out << slot.json.dump() << '\n';
  }

  ordered_json summary = ordered_json::object();
  summary["schema_version"] = kSchemaVersion;
  summary["summary"] = true;
  summary["rows"] = stats.rows;
  summary["scored"] = stats.scored;
  summary["groups"] = stats.groups;
  if (stats.scored) {
    double n = static_cast<double>(stats.scored);
    mean.format /= n;
    mean.structure /= n;
    mean.semantics /= n;
    mean.subgoals /= n;
    mean.outcome /= n;
    mean.weight /= n;
    mean.total /= n;
    summary["mean_reward"] = detail::reward_to_json(mean);
  } else {
    summary["mean_reward"] = nullptr;
  }
  summary["errors"] = stats.overflowed;
  out << summary.dump() << '\n';
  out.flush();

  log << "scored " << stats.scored << "/" << stats.rows << " rollouts, " << stats.groups
      << " advantage group(s)";
  if (stats.overflowed) log << ", " << stats.overflowed << " plan(s) over the alignment limit";
  log << "\n";
  if (stats_out) *stats_out = stats;
  return stats.overflowed ? kExitGraphTooLarge : kExitOk;
}

// --- eval ---------------------------------------------------------------

// Predictions and golds must carry exactly the same id set.
inline int run_eval(const std::string& predictions_path, const std::string& golds_path,
                    std::ostream& out, std::ostream& table) {
  std::vector<ordered_json> gold_rows = read_jsonl(golds_path);
  std::map<std::string, std::vector<std::string>> answers;
  for (std::size_t i = 0; i < gold_rows.size(); ++i) {
    std::string where = golds_path + " row " + std::to_string(i + 1);
    std::string id = detail::require_string(gold_rows[i], "id", where);
    auto it = gold_rows[i].find("answers");
    if (it == gold_rows[i].end() || !it->is_array() || it->empty())
      raise(ErrorCode::MalformedInput, where + ": missing non-empty array field \"answers\"");
    std::vector<std::string> golds;
    for (const auto& a : *it) {
      if (!a.is_string()) raise(ErrorCode::MalformedInput, where + ": answers must be strings");
      golds.push_back(a.get<std::string>());
    }
    if (!answers.emplace(id, std::move(golds)).second)
      raise(ErrorCode::DuplicateId, where + ": duplicate gold id " + id);
  }

  std::vector<ordered_json> pred_rows = read_jsonl(predictions_path);
  std::vector<EvalRow> rows;
  for (std::size_t i = 0; i < pred_rows.size(); ++i) {
    std::string where = predictions_path + " row " + std::to_string(i + 1);
    EvalRow row;
    row.id = detail::require_string(pred_rows[i], "id", where);
    row.prediction = detail::require_string(pred_rows[i], "prediction", where);
    auto it = answers.find(row.id);
    if (it == answers.end())
      raise(ErrorCode::UnresolvedGold, where + ": no gold with id " + row.id);
    row.golds = it->second;
    rows.push_back(std::move(row));
  }
  if (rows.size() != answers.size())
    raise(ErrorCode::UnresolvedGold,
          "gold ids without predictions: " + std::to_string(answers.size() - rows.size()));

  EvalSummary summary = summarize(rows);

  for (const ExampleScore& ex : summary.per_example) {
    ordered_json j = ordered_json::object();
    j["schema_version"] = kSchemaVersion;
    j["id"] = ex.id;
    j["em"] = ex.em;
    j["f1"] = ex.f1;
    out << j.dump() << '\n';
  }
  ordered_json j = ordered_json::object();
  j["schema_version"] = kSchemaVersion;
  j["summary"] = true;
  j["examples"] = summary.n;
  j["exact_match"] = summary.em;
  j["f1"] = summary.f1;
  out << j.dump() << '\n';
  out.flush();

  std::size_t width = 4;  // at least as wide as the "mean" footer
  for (const ExampleScore& ex : summary.per_example) width = std::max(width, ex.id.size());
  auto fixed4 = [](double v) {
    std::ostringstream txt;
    txt << std::fixed << std::setprecision(4) << v;
    return txt.str();
  };
  table << std::left << std::setw(static_cast<int>(width + 2)) << "id"
        << std::right << std::setw(8) << "em" << std::setw(10) << "f1" << "\n";
  for (const ExampleScore& ex : summary.per_example)
    table << std::left << std::setw(static_cast<int>(width + 2)) << ex.id
          << std::right << std::setw(8) << ex.em << std::setw(10) << fixed4(ex.f1) << "\n";
  table << std::left << std::setw(static_cast<int>(width + 2)) << "mean"
        << std::right << std::setw(8) << fixed4(summary.em) << std::setw(10) << fixed4(summary.f1)
        << "\n";
  return kExitOk;
}

// --- selftest -----------------------------------------------------------

inline int run_selftest(const selftest::Options& opts, std::ostream& log) {
  selftest::Report report = selftest::run(opts);
  log << report.checks << " checks";
  if (report.ok()) {
    log << ", all properties held\n";
    return kExitOk;
  }
  log << ", " << report.failures.size() << " failure(s):\n";
  for (const std::string& f : report.failures) log << "  " << f << "\n";
  return kExitPropertyViolation;
}

}  // namespace planscore
