// planscore: score tagged multi-hop rollouts against gold plans, evaluate
// final answers, or run the built-in property checks.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "planscore/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"plan-aware trajectory scoring engine"};
  app.require_subcommand(1);

  std::string rollouts_path, score_golds, score_out = "-", config_path;
  int step_t = 0;
  int workers = 1;
  CLI::App* score = app.add_subcommand("score", "score rollout JSONL against gold plans");
  score->add_option("--rollouts", rollouts_path, "rollout JSONL file")->required();
  score->add_option("--golds", score_golds, "gold JSONL file")->required();
  score->add_option("--config", config_path, "engine config JSON file");
  score->add_option("--out", score_out, "output JSONL path, '-' for stdout");
  score->add_option("--step-t", step_t, "training step for rows that carry none");
  score->add_option("--workers", workers, "worker thread count");

  std::string predictions_path, eval_golds, eval_out = "-";
  CLI::App* eval = app.add_subcommand("eval", "exact-match / token-F1 answer evaluation");
  eval->add_option("--predictions", predictions_path, "prediction JSONL file")->required();
  eval->add_option("--golds", eval_golds, "gold answer JSONL file")->required();
  eval->add_option("--out", eval_out, "output JSONL path, '-' for stdout");

  std::uint64_t seed = 42;
  int cases = 200;
  bool inject_fault = false;
  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in property checks");
  selftest->add_option("--seed", seed, "random seed");
  selftest->add_option("--cases", cases, "cases per property");
  selftest->add_flag("--inject-fault", inject_fault,
                     "deliberately corrupt the aligner; the run must then fail");

  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<std::string> config;
    if (!config_path.empty()) config = config_path;

    if (score->parsed()) {
      planscore::EngineConfig cfg = planscore::load_config(config);
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (score_out != "-") {
        file.open(score_out, std::ios::binary);
        if (!file) {
          std::cerr << "error: cannot open " << score_out << " for writing\n";
          return planscore::kExitMalformedInput;
        }
        out = &file;
      }
      return planscore::run_score(rollouts_path, score_golds, cfg, step_t, workers, *out,
                                  std::cerr);
    }

    if (eval->parsed()) {
      std::ofstream file;
      std::ostream* out = &std::cout;
      // keep machine rows and the human table on separate streams
      std::ostream* table = &std::cerr;
      if (eval_out != "-") {
        file.open(eval_out, std::ios::binary);
        if (!file) {
          std::cerr << "error: cannot open " << eval_out << " for writing\n";
          return planscore::kExitMalformedInput;
        }
        out = &file;
        table = &std::cout;
      }
      return planscore::run_eval(predictions_path, eval_golds, *out, *table);
    }

    planscore::selftest::Options opts;
    opts.seed = seed;
    opts.cases = cases;
    opts.inject_ged_fault = inject_fault;
    return planscore::run_selftest(opts, std::cout);
  } catch (const planscore::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return planscore::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return planscore::kExitMalformedInput;
  }
}
