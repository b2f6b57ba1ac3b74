#pragma once

// Reference computations used by the tests. They rebuild each quantity by
// brute force from the LM, the formulas and the partition, without going
// through the proposal or sampler code they check.

#include <map>
#include <span>
#include <vector>

#include "tsmh/cgmh.hpp"
#include "tsmh/proposal.hpp"

namespace tsmh::testing {

/// Direct recursive evaluation of the formulas on a category sequence.
int oracle_error(const std::vector<Formula>& formulas, std::span<const CategoryId> cats,
                 const CategoryPartition& partition);

/// All ascending subsets of {0..m-1} of size min(k, m), lexicographic.
std::vector<std::vector<std::size_t>> subsets(std::size_t m, std::size_t k);

struct OracleTemplate {
  std::vector<Slot> slots;
  std::vector<EditOp> ops;
  int error = 0;
};

/// Odometer over op tuples (last position fastest), first provenance kept.
std::vector<OracleTemplate> oracle_templates(const Sentence& x, std::span<const std::size_t> positions,
                                             const CategoryPartition& partition, const std::vector<Formula>& formulas,
                                             std::size_t max_len);

/// Normalized group probabilities, beta^(e - e_min) / sum, by error value.
std::map<int, double> oracle_group_probs(const std::vector<int>& errors, double beta);

struct WeightedFill {
  Sentence y;
  double log_p = 0.0;
};

/// Every instantiation of the template with its sequential left-to-right fill
/// probability. Singleton categories contribute probability one.
std::vector<WeightedFill> oracle_fills(const std::vector<Slot>& slots, const LmBackend& lm,
                                       const CategoryPartition& partition);

/// log P_LM + log max(Phi_soft, floor), straight from the backends.
double oracle_weight(const Sentence& y, const LmBackend& lm, const SoftScorer* soft);

/// For a group whose member j yields log-weight lw with probability exp(lp)
/// (member j given as a list of (lp, lw) pairs), the expected template-selection
/// share E[w / (w + sum of the other members' weights)] of every outcome, via
/// E[w/(w+R)] = int_0^inf w e^{-tw} E[e^{-tR}] dt on a log-time grid.
std::vector<std::vector<double>> expected_shares(const std::vector<std::vector<std::pair<double, double>>>& members);

/// Marginal TSMH proposal Q(. | x), every auxiliary fill integrated out, built
/// entirely from the oracle pieces above.
std::map<Sentence, double> oracle_tsmh_marginal(const Sentence& x, std::size_t k, std::size_t max_len,
                                                const CategoryPartition& partition,
                                                const std::vector<Formula>& formulas, double beta,
                                                const LmBackend& lm, const SoftScorer* soft);

/// The same marginal assembled from the library's search and fill_log_prob.
std::map<Sentence, double> library_tsmh_marginal(TsmhProposer& proposer, Target& target, const Sentence& x);

/// Oracle log-probability of one TSMH path once the other fills are fixed.
double oracle_path_log_prob(const Sentence& x, std::span<const std::size_t> positions,
                            const std::vector<Slot>& slots, const Sentence& y, std::span<const Sentence> others,
                            std::size_t k, std::size_t max_len, const CategoryPartition& partition,
                            const std::vector<Formula>& formulas, double beta, const LmBackend& lm,
                            const SoftScorer* soft);

struct CgmhPath {
  OpKind op = OpKind::Replace;
  std::size_t position = 0;  // edited index; for insert the index of the new word
  Sentence y;
  double log_q = 0.0;
};

/// Every single-edit path from x with its probability.
std::vector<CgmhPath> oracle_cgmh_paths(const Sentence& x, std::size_t max_len, const CgmhOptions& options,
                                        const Vocabulary& vocab, const LmBackend& lm);
std::map<Sentence, double> oracle_cgmh_marginal(const Sentence& x, std::size_t max_len, const CgmhOptions& options,
                                                const Vocabulary& vocab, const LmBackend& lm);

}  // namespace tsmh::testing
