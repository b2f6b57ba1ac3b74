#include "tsmh/cgmh.hpp"

#include <algorithm>
#include <cmath>

#include "tsmh/errors.hpp"
#include "tsmh/logmath.hpp"

namespace tsmh {

CgmhProposer::CgmhProposer(Target& target, std::size_t max_len, CgmhOptions options)
    : target_(&target), max_len_(max_len), options_(options) {
  if (max_len == 0) throw ConfigError("max_len must be positive");
  for (double p : {options.p_replace, options.p_insert, options.p_delete})
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("CGMH op weights must be finite and non-negative");
  if (!(options.p_replace > 0.0)) throw ConfigError("CGMH replace weight must be positive");
  const auto& partition = target.partition();
  for (TokenId t = 0; t < partition.vocab_size(); ++t)
    if (t != partition.mask()) words_.push_back(t);
}

double CgmhProposer::log_p_op(OpKind kind, std::size_t m) const {
  const double ins = m < max_len_ ? options_.p_insert : 0.0;
  const double del = m > 1 ? options_.p_delete : 0.0;
  const double total = options_.p_replace + ins + del;
  double p = 0.0;
  switch (kind) {
    case OpKind::Replace:
      p = options_.p_replace;
      break;
    case OpKind::Insert:
      p = ins;
      break;
    case OpKind::Delete:
      p = del;
      break;
    case OpKind::None:
      p = 0.0;
      break;
  }
  return p > 0.0 ? std::log(p / total) : kNegInf;
}

double CgmhProposer::path_log_prob(const Sentence& x, OpKind kind, std::size_t position, const Sentence& y) const {
  const std::size_t m = x.size();
  const double op = log_p_op(kind, m);
  if (op == kNegInf) return kNegInf;
  std::vector<TokenId> masked = x.tokens;
  if (kind == OpKind::Replace) {
    if (position >= m || y.size() != m) return kNegInf;
    masked[position] = target_->partition().mask();
  } else if (kind == OpKind::Insert) {
    if (position > m || y.size() != m + 1) return kNegInf;
    masked.insert(masked.begin() + static_cast<std::ptrdiff_t>(position), target_->partition().mask());
  } else {
    if (position >= m) return kNegInf;
    masked.erase(masked.begin() + static_cast<std::ptrdiff_t>(position));
    return masked == y.tokens ? op - std::log(static_cast<double>(m)) : kNegInf;
  }
  for (std::size_t i = 0; i < masked.size(); ++i)
    if (i != position && masked[i] != y.tokens[i]) return kNegInf;
  const auto fill = target_->lm().fill_logprobs(masked, position, words_);
  const auto at = std::lower_bound(words_.begin(), words_.end(), y.tokens[position]);
  if (at == words_.end() || *at != y.tokens[position]) return kNegInf;
  const double slots = static_cast<double>(kind == OpKind::Insert ? m + 1 : m);
  return op - std::log(slots) + fill[static_cast<std::size_t>(at - words_.begin())];
}

ProposalRecord CgmhProposer::propose(const Sentence& x, Rng& rng) {
  const LmBackend& lm = target_->lm();
  const TokenId mask = target_->partition().mask();
  const std::size_t m = x.size();
  ProposalRecord rec;

  const OpKind kinds[] = {OpKind::Replace, OpKind::Insert, OpKind::Delete};
  double lp[3];
  for (int i = 0; i < 3; ++i) lp[i] = log_p_op(kinds[i], m);
  const OpKind kind = kinds[rng.categorical_log(lp)];
  rec.log_p_group = log_p_op(kind, m);

  OpKind inverse = OpKind::Replace;
  std::size_t p = 0;
  if (kind == OpKind::Delete) {
    p = rng.below(m);
    rec.x_star = x;
    rec.x_star.tokens.erase(rec.x_star.tokens.begin() + static_cast<std::ptrdiff_t>(p));
    rec.log_p_pos = -std::log(static_cast<double>(m));
    inverse = OpKind::Insert;
  } else {
    p = rng.below(kind == OpKind::Insert ? m + 1 : m);
    std::vector<TokenId> masked = x.tokens;
    if (kind == OpKind::Insert)
      masked.insert(masked.begin() + static_cast<std::ptrdiff_t>(p), mask);
    else
      masked[p] = mask;
    const auto fill = lm.fill_logprobs(masked, p, words_);
    const std::size_t pick = rng.categorical_log(fill);
    masked[p] = words_[pick];
    rec.x_star = Sentence{std::move(masked)};
    rec.log_p_pos = -std::log(static_cast<double>(rec.x_star.size()));
    rec.log_p_fill = fill[pick];
    inverse = kind == OpKind::Insert ? OpKind::Delete : OpKind::Replace;
  }
  rec.positions = {p};
  rec.ops = {EditOp{kind, kNoCategory}};
  rec.log_q_forward = rec.log_p_pos + rec.log_p_group + rec.log_p_fill;
  rec.log_q_reverse = path_log_prob(rec.x_star, inverse, p, x);
  rec.template_count = 1;
  rec.group_size = 1;
  return rec;
}

}  // namespace tsmh
