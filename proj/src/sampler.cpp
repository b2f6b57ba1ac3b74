#include "tsmh/sampler.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "tsmh/errors.hpp"
#include "tsmh/logmath.hpp"

namespace tsmh {

double log_acceptance(double log_pi_x, double log_pi_star, double log_q_forward, double log_q_reverse) {
  if (log_q_reverse == kNegInf) return kNegInf;
  return std::min(0.0, log_pi_star + log_q_reverse - log_pi_x - log_q_forward);
}

StepOutcome mh_step(Sentence& current, Proposer& proposer, Target& target, Rng& rng) {
  StepOutcome out;
  out.proposal = proposer.propose(current, rng);
  out.log_accept = log_acceptance(target.log_pi(current), target.log_pi(out.proposal.x_star),
                                  out.proposal.log_q_forward, out.proposal.log_q_reverse);
  const double u = rng.uniform();
  out.accepted = std::log(u) < out.log_accept;
  if (out.accepted) current = out.proposal.x_star;
  return out;
}

ChainMetrics summarize(const std::vector<StepRecord>& history) {
  ChainMetrics m;
  if (history.empty()) return m;
  std::size_t valid = 0;
  std::size_t accepted = 0;
  double sum = 0.0;
  for (const auto& r : history) {
    valid += r.error == 0;
    accepted += r.accepted;
    sum += r.log_pi;
  }
  const double n = static_cast<double>(history.size());
  m.valid_fraction = static_cast<double>(valid) / n;
  m.acceptance_rate = static_cast<double>(accepted) / n;
  m.mean_log_pi = sum / n;
  return m;
}

ChainResult run_chain(const Sentence& initial, std::size_t steps, Proposer& proposer, Target& target, Rng& rng) {
  if (steps == 0) throw ConfigError("steps must be at least 1");
  ChainResult result;
  Sentence current = initial;
  result.history.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const StepOutcome o = mh_step(current, proposer, target, rng);
    result.history.push_back(StepRecord{current, target.log_pi(current), o.accepted, o.log_accept, target.error(current)});
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.history.size(); ++i)
    if (result.history[i].log_pi > result.history[best].log_pi) best = i;
  result.best = result.history[best].sentence;
  result.best_log_pi = result.history[best].log_pi;
  result.best_error = result.history[best].error;
  result.metrics = summarize(result.history);
  return result;
}

std::string history_jsonl(const ChainResult& result, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    const StepRecord& r = result.history[i];
    nlohmann::ordered_json line;
    line["step"] = i + 1;
    line["sentence"] = detokenize(r.sentence, vocab);
    line["log_pi"] = r.log_pi;
    line["accepted"] = r.accepted;
    if (std::isfinite(r.log_accept))
      line["log_A"] = r.log_accept;
    else
      line["log_A"] = nullptr;
    line["constraint_error"] = r.error;
    out += line.dump();
    out += '\n';
  }
  return out;
}

Sentence initial_sentence(const std::vector<TokenId>& keywords, TokenId pad, std::size_t min_len, std::size_t max_len) {
  Sentence x{keywords};
  while (x.size() < min_len) x.tokens.push_back(pad);
  if (x.size() > max_len)
    throw ConfigError("initial sentence has " + std::to_string(x.size()) + " tokens, more than max_len " +
                      std::to_string(max_len));
  return x;
}

std::map<Sentence, double> exact_distribution(Target& target, std::size_t min_len, std::size_t max_len) {
  const CategoryPartition& partition = target.partition();
  std::vector<TokenId> words;
  for (TokenId t = 0; t < partition.vocab_size(); ++t)
    if (t != partition.mask()) words.push_back(t);
  if (words.size() > 8 || max_len > 4)
    throw ConfigError("exact enumeration is limited to 8 words and sentences of at most 4 tokens");
  if (min_len < 1 || min_len > max_len) throw ConfigError("exact enumeration needs 1 <= min_len <= max_len");

  std::vector<std::pair<Sentence, double>> states;
  for (std::size_t len = min_len; len <= max_len; ++len) {
    std::vector<std::size_t> digits(len, 0);
    for (;;) {
      Sentence x;
      for (std::size_t d : digits) x.tokens.push_back(words[d]);
      states.emplace_back(x, target.log_pi(x));
      std::size_t i = len;
      while (i > 0 && ++digits[i - 1] == words.size()) digits[--i] = 0;
      if (i == 0) break;
    }
  }
  std::vector<double> logs;
  for (const auto& s : states) logs.push_back(s.second);
  const double z = log_sum_exp(logs);
  std::map<Sentence, double> out;
  for (const auto& [x, lp] : states) out.emplace(x, std::exp(lp - z));
  return out;
}

}  // namespace tsmh
