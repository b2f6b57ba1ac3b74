#pragma once

#include <map>
#include <string>
#include <vector>

#include "tsmh/proposal.hpp"

namespace tsmh {

struct StepRecord {
  Sentence sentence;  // state after the step
  double log_pi = 0.0;
  bool accepted = false;
  double log_accept = 0.0;  // log A; -inf when the move had no reverse
  int error = 0;
};

struct ChainMetrics {
  double valid_fraction = 0.0;  // share of recorded states with C = 0
  double mean_log_pi = 0.0;
  double acceptance_rate = 0.0;
};

struct ChainResult {
  std::vector<StepRecord> history;
  Sentence best;  // highest log pi among recorded states
  double best_log_pi = 0.0;
  int best_error = 0;
  ChainMetrics metrics;
};

struct StepOutcome {
  ProposalRecord proposal;
  double log_accept = 0.0;
  bool accepted = false;
};

/// log A = min(0, log pi(x*) + log Q(x|x*) - log pi(x) - log Q(x*|x)).
double log_acceptance(double log_pi_x, double log_pi_star, double log_q_forward, double log_q_reverse);

/// Proposes from `current`, accepts with probability A (a uniform is drawn
/// every step), and updates `current` in place.
StepOutcome mh_step(Sentence& current, Proposer& proposer, Target& target, Rng& rng);

/// Runs `steps` MH steps from `initial`; the history holds the state after
/// every step.
ChainResult run_chain(const Sentence& initial, std::size_t steps, Proposer& proposer, Target& target, Rng& rng);

ChainMetrics summarize(const std::vector<StepRecord>& history);

/// One JSON object per step: step, sentence, log_pi, accepted, log_A (null for
/// -inf), constraint_error.
std::string history_jsonl(const ChainResult& result, const Vocabulary& vocab);

/// Keywords in input order, padded with `pad` at the end up to min_len.
/// Throws ConfigError if the result exceeds max_len.
Sentence initial_sentence(const std::vector<TokenId>& keywords, TokenId pad, std::size_t min_len, std::size_t max_len);

/// pi normalized over every sentence of length min_len..max_len. Refuses
/// spaces with more than 8 words or max_len above 4.
std::map<Sentence, double> exact_distribution(Target& target, std::size_t min_len, std::size_t max_len);

}  // namespace tsmh
