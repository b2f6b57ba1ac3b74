#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsmh/config.hpp"
#include "tsmh/sampler.hpp"

namespace tsmh {

struct InputResult {
  std::size_t index = 0;
  std::vector<std::string> keywords;
  bool skipped = false;
  std::string reason;  // why a skipped input was skipped
  std::uint64_t seed = 0;
  std::string best;
  double best_log_pi = 0.0;
  int best_error = 0;
  ChainMetrics metrics;
  std::string history_file;  // relative to the report directory
};

struct RunReport {
  std::string method;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::size_t steps = 0;
  std::size_t k = 0;
  std::vector<InputResult> inputs;

  // Over non-skipped inputs.
  double valid_percent = 0.0;         // best sentence has C = 0
  double mean_best_log_pi = 0.0;
  double mean_acceptance = 0.0;
  double mean_history_valid = 0.0;    // mean per-chain share of C = 0 states

  void recompute_aggregates();
  nlohmann::ordered_json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
  static RunReport load(const std::filesystem::path& path);
};

/// Per-input chain seed: a SplitMix64 mix of the run seed and the input index,
/// identical for both methods so runs are paired.
std::uint64_t input_seed(std::uint64_t run_seed, std::size_t index);

/// One keyword set per line, tab-separated. Blank lines are skipped.
std::vector<std::vector<std::string>> read_keyword_inputs(const std::filesystem::path& path);

struct GenerateOptions {
  Method method = Method::Tsmh;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

/// Runs one chain per input (fanned out over `jobs` threads) and writes
/// chains/input_NNNN.jsonl, best.txt, report.json and report.txt into out_dir.
RunReport run_generate(const TaskSpec& spec, const TaskResources& res,
                       const std::vector<std::vector<std::string>>& inputs, const GenerateOptions& options,
                       const std::filesystem::path& out_dir);

/// Runs a single chain for a keyword set; the building block of run_generate.
ChainResult run_single(const TaskSpec& spec, const TaskResources& res, const std::vector<std::string>& keywords,
                       Method method, std::uint64_t seed);

/// One-sided exact sign test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
/// Returns 1 when there are no non-tied pairs.
double sign_test_p(std::size_t wins, std::size_t losses);

struct Comparison {
  std::string method_a, method_b;
  std::size_t paired = 0;
  double valid_a = 0.0, valid_b = 0.0;
  double log_pi_a = 0.0, log_pi_b = 0.0;
  double accept_a = 0.0, accept_b = 0.0;
  std::size_t valid_wins = 0, valid_losses = 0;    // per-input valid indicator, a vs b
  std::size_t accept_wins = 0, accept_losses = 0;  // per-input acceptance rate, a vs b
  double valid_sign_p = 1.0;
  double accept_sign_p = 1.0;

  std::string table() const;
  nlohmann::ordered_json to_json() const;
};

/// Throws InputError when the reports cover different inputs.
Comparison compare_reports(const RunReport& a, const RunReport& b);

/// Recomputes every per-input and aggregate number from the JSONL histories.
/// Returns human-readable mismatches; empty means the report verifies.
std::vector<std::string> verify_report(const std::filesystem::path& report_dir);

}  // namespace tsmh
