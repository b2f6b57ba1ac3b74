#pragma once

#include "tsmh/proposal.hpp"

namespace tsmh {

/// Relative weights of the three single-word edits; renormalized over the
/// edits valid at the current length.
struct CgmhOptions {
  double p_replace = 1.0;
  double p_insert = 1.0;
  double p_delete = 1.0;
};

/// Single-word replace/insert/delete proposal. The new word is drawn from the
/// LM's conditional over the whole vocabulary at the edited slot.
///
/// In the record, positions = {edited index} (for insert: index of the new
/// word), log_p_pos = position choice, log_p_group = op choice, log_p_fill =
/// word choice, log_p_template = 0.
class CgmhProposer final : public Proposer {
 public:
  CgmhProposer(Target& target, std::size_t max_len, CgmhOptions options = {});

  std::string_view name() const override { return "cgmh"; }
  ProposalRecord propose(const Sentence& x, Rng& rng) override;

  /// log probability of choosing `kind` at sentence length m; -inf if invalid.
  double log_p_op(OpKind kind, std::size_t m) const;

  /// log probability that one proposal from x applies `kind` at `position`
  /// and yields y; -inf when it cannot.
  double path_log_prob(const Sentence& x, OpKind kind, std::size_t position, const Sentence& y) const;

 private:
  Target* target_;
  std::size_t max_len_;
  CgmhOptions options_;
  std::vector<TokenId> words_;
};

}  // namespace tsmh
