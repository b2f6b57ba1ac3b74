#include "tsmh/proposal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tsmh/errors.hpp"
#include "tsmh/logmath.hpp"

namespace tsmh {

std::string to_string(const EditOp& op, const CategoryPartition& partition) {
  switch (op.kind) {
    case OpKind::None:
      return "none";
    case OpKind::Replace:
      return "replace[" + partition.category(op.category).name + "]";
    case OpKind::Insert:
      return "insert[" + partition.category(op.category).name + "]";
    case OpKind::Delete:
      return "delete";
  }
  return "?";
}

std::vector<EditOp> position_ops(const CategoryPartition& partition) {
  const auto cats = partition.nonempty();
  std::vector<EditOp> ops;
  ops.reserve(2 * cats.size() + 2);
  ops.push_back(EditOp::none());
  for (CategoryId c : cats) ops.push_back(EditOp::replace(c));
  for (CategoryId c : cats) ops.push_back(EditOp::insert(c));
  ops.push_back(EditOp::erase());
  return ops;
}

std::vector<Slot> apply_ops(const Sentence& x, std::span<const std::size_t> positions, std::span<const EditOp> ops,
                            const CategoryPartition& partition) {
  if (positions.size() != ops.size()) throw std::invalid_argument("apply_ops: one op per position required");
  std::vector<Slot> out;
  out.reserve(x.size() + ops.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const TokenId w = x.tokens[i];
    if (next < positions.size() && positions[next] == i) {
      const EditOp& op = ops[next++];
      switch (op.kind) {
        case OpKind::None:
          out.push_back(Slot::fixed(w, partition.category_of(w)));
          break;
        case OpKind::Replace:
          out.push_back(Slot::hole(op.category));
          break;
        case OpKind::Insert:
          out.push_back(Slot::hole(op.category));
          out.push_back(Slot::fixed(w, partition.category_of(w)));
          break;
        case OpKind::Delete:
          break;
      }
    } else {
      out.push_back(Slot::fixed(w, partition.category_of(w)));
    }
  }
  if (next != positions.size()) throw std::invalid_argument("apply_ops: positions out of range or unsorted");
  return out;
}

std::optional<std::size_t> TemplateSearch::find(const std::vector<Slot>& slots) const {
  auto it = index.find(slots);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

TemplateSearch enumerate_templates(const Sentence& x, std::span<const std::size_t> positions,
                                   const CategoryPartition& partition, const ConstraintSet& constraints,
                                   std::size_t max_len) {
  if (positions.empty()) throw std::invalid_argument("enumerate_templates: no positions");
  const std::vector<EditOp> choices = position_ops(partition);
  TemplateSearch out;
  std::vector<EditOp> ops(positions.size());

  auto visit = [&](auto&& self, std::size_t depth) -> void {
    if (depth == positions.size()) {
      ++out.raw_combinations;
      std::vector<Slot> slots = apply_ops(x, positions, ops, partition);
      if (slots.empty() || slots.size() > max_len) return;
      if (out.index.contains(slots)) return;
      const int error = constraints.error(slots);
      out.index.emplace(slots, out.templates.size());
      out.templates.push_back(Template{std::move(slots), ops, error});
      return;
    }
    for (const EditOp& op : choices) {
      ops[depth] = op;
      self(self, depth + 1);
    }
  };
  visit(visit, 0);

  std::vector<int> errors;
  for (const auto& t : out.templates) errors.push_back(t.error);
  std::sort(errors.begin(), errors.end());
  errors.erase(std::unique(errors.begin(), errors.end()), errors.end());
  const auto log_probs = group_log_probs(errors, constraints.beta());
  for (std::size_t g = 0; g < errors.size(); ++g) out.groups.push_back(TemplateGroup{errors[g], {}, log_probs[g]});
  out.group_of.resize(out.templates.size());
  for (std::size_t i = 0; i < out.templates.size(); ++i) {
    const auto g = static_cast<std::size_t>(std::lower_bound(errors.begin(), errors.end(), out.templates[i].error) -
                                            errors.begin());
    out.groups[g].members.push_back(i);
    out.group_of[i] = g;
  }
  return out;
}

std::vector<double> group_log_probs(std::span<const int> errors, double beta) {
  std::vector<double> out;
  if (errors.empty()) return out;
  const int best = *std::min_element(errors.begin(), errors.end());
  const double log_beta = std::log(beta);
  const double log_scale = std::log1p(-beta);
  for (int e : errors) out.push_back(log_scale + (e == best ? 0.0 : (e - best) * log_beta));
  const double z = log_sum_exp(out);
  for (double& v : out) v -= z;
  return out;
}

std::vector<std::size_t> select_positions(std::size_t m, std::size_t k, Rng& rng) {
  const std::size_t kk = std::min(k, m);
  std::vector<std::size_t> pool(m);
  for (std::size_t i = 0; i < m; ++i) pool[i] = i;
  for (std::size_t i = 0; i < kk; ++i) std::swap(pool[i], pool[i + rng.below(m - i)]);
  pool.resize(kk);
  std::sort(pool.begin(), pool.end());
  return pool;
}

double log_p_positions(std::size_t m, std::size_t k) { return -log_choose(m, std::min(k, m)); }

namespace {

std::vector<TokenId> masked_tokens(const std::vector<Slot>& slots, TokenId mask) {
  std::vector<TokenId> tokens;
  tokens.reserve(slots.size());
  for (const Slot& s : slots) tokens.push_back(s.placeholder ? mask : s.word);
  return tokens;
}

}  // namespace

Filled fill_template(const std::vector<Slot>& slots, const LmBackend& lm, const CategoryPartition& partition,
                     Rng& rng) {
  std::vector<TokenId> tokens = masked_tokens(slots, partition.mask());
  double log_p = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].placeholder) continue;
    const auto& members = partition.category(slots[i].category).members;
    if (members.size() == 1) {
      tokens[i] = members.front();
      continue;
    }
    const auto lp = lm.fill_logprobs(tokens, i, members);
    const std::size_t pick = rng.categorical_log(lp);
    tokens[i] = members[pick];
    log_p += lp[pick];
  }
  return Filled{Sentence{std::move(tokens)}, log_p};
}

double fill_log_prob(const std::vector<Slot>& slots, const Sentence& y, const LmBackend& lm,
                     const CategoryPartition& partition) {
  if (!instantiates(slots, y, partition)) return kNegInf;
  std::vector<TokenId> tokens = masked_tokens(slots, partition.mask());
  double log_p = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].placeholder) continue;
    const auto& members = partition.category(slots[i].category).members;
    tokens[i] = y.tokens[i];
    if (members.size() == 1) continue;
    tokens[i] = partition.mask();
    const auto lp = lm.fill_logprobs(tokens, i, members);
    const auto at = std::lower_bound(members.begin(), members.end(), y.tokens[i]) - members.begin();
    log_p += lp[static_cast<std::size_t>(at)];
    tokens[i] = y.tokens[i];
  }
  return log_p;
}

std::optional<InverseMove> invert_move(const Sentence& x, std::span<const std::size_t> positions,
                                       std::span<const EditOp> ops, const CategoryPartition& partition) {
  if (positions.size() != ops.size()) throw std::invalid_argument("invert_move: one op per position required");
  InverseMove inv;
  std::size_t next = 0;
  std::size_t j = 0;  // index in x*
  std::optional<CategoryId> pending_insert;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool selected = next < positions.size() && positions[next] == i;
    if (pending_insert) {
      if (selected) return std::nullopt;
      inv.positions.push_back(j);
      inv.ops.push_back(EditOp::insert(*pending_insert));
      pending_insert.reset();
      ++j;
      continue;
    }
    if (!selected) {
      ++j;
      continue;
    }
    const EditOp& op = ops[next++];
    switch (op.kind) {
      case OpKind::None:
        inv.positions.push_back(j++);
        inv.ops.push_back(EditOp::none());
        break;
      case OpKind::Replace:
        inv.positions.push_back(j++);
        inv.ops.push_back(EditOp::replace(partition.category_of(x.tokens[i])));
        break;
      case OpKind::Insert:
        inv.positions.push_back(j++);
        inv.ops.push_back(EditOp::erase());
        ++j;
        break;
      case OpKind::Delete:
        pending_insert = partition.category_of(x.tokens[i]);
        break;
    }
  }
  if (pending_insert) return std::nullopt;
  return inv;
}

// ---------------------------------------------------------------------------

namespace {

struct ReverseInfo {
  ReversePath path;
  TemplateSearch search;
  std::size_t template_index;
};

std::optional<ReverseInfo> reverse_from(const TemplateSearch& forward, const Sentence& x,
                                        std::span<const std::size_t> positions, const std::vector<Slot>& slots,
                                        const Sentence& y, const CategoryPartition& partition,
                                        const ConstraintSet& constraints, std::size_t k, std::size_t max_len) {
  const auto idx = forward.find(slots);
  if (!idx) throw std::invalid_argument("reverse_path: template not produced by the search");
  const auto inv = invert_move(x, positions, forward.templates[*idx].ops, partition);
  if (!inv || inv->positions.size() != std::min(k, y.size())) return std::nullopt;

  TemplateSearch back = enumerate_templates(y, inv->positions, partition, constraints, max_len);
  const auto back_idx = back.find(apply_ops(y, inv->positions, inv->ops, partition));
  if (!back_idx) return std::nullopt;
  const Template& t = back.templates[*back_idx];
  if (!instantiates(t.slots, x, partition)) return std::nullopt;

  // The kept provenance of the reverse template must lead back to this move.
  const auto again = invert_move(y, inv->positions, t.ops, partition);
  if (!again || !std::equal(again->positions.begin(), again->positions.end(), positions.begin(), positions.end()))
    return std::nullopt;
  if (apply_ops(x, positions, again->ops, partition) != slots) return std::nullopt;

  ReverseInfo info{ReversePath{y, inv->positions, t.slots}, std::move(back), *back_idx};
  return info;
}

}  // namespace

TsmhProposer::TsmhProposer(Target& target, std::size_t k, std::size_t max_len)
    : target_(&target), k_(k), max_len_(max_len) {
  if (k == 0) throw ConfigError("search width k must be at least 1");
  if (max_len == 0) throw ConfigError("max_len must be positive");
}

TemplateSearch TsmhProposer::search(const Sentence& x, std::span<const std::size_t> positions) const {
  return enumerate_templates(x, positions, target_->partition(), target_->constraints(), max_len_);
}

std::optional<ReversePath> TsmhProposer::reverse_path(const Sentence& x, std::span<const std::size_t> positions,
                                                      const std::vector<Slot>& slots, const Sentence& y) const {
  const auto info = reverse_from(search(x, positions), x, positions, slots, y, target_->partition(),
                                 target_->constraints(), k_, max_len_);
  if (!info) return std::nullopt;
  return info->path;
}

PathProbability TsmhProposer::path_probability(const Sentence& x, std::span<const std::size_t> positions,
                                               const std::vector<Slot>& slots, const Sentence& y,
                                               std::span<const Sentence> others) {
  const TemplateSearch s = search(x, positions);
  const auto idx = s.find(slots);
  if (!idx) throw std::invalid_argument("path_probability: template not produced by the search");
  const TemplateGroup& g = s.groups[s.group_of[*idx]];
  if (others.size() + 1 != g.members.size())
    throw std::invalid_argument("path_probability: need one fill per other group member");

  PathProbability p;
  p.log_p_pos = log_p_positions(x.size(), k_);
  p.log_p_group = g.log_prob;
  p.log_p_fill = fill_log_prob(slots, y, target_->lm(), target_->partition());
  std::vector<double> w{target_->weight(y)};
  for (const Sentence& o : others) w.push_back(target_->weight(o));
  p.log_p_template = w.front() - log_sum_exp(w);
  return p;
}

ProposalRecord TsmhProposer::propose(const Sentence& x, Rng& rng) {
  const CategoryPartition& partition = target_->partition();
  const LmBackend& lm = target_->lm();
  ProposalRecord rec;

  rec.positions = select_positions(x.size(), k_, rng);
  rec.log_p_pos = log_p_positions(x.size(), k_);

  const TemplateSearch fwd = search(x, rec.positions);
  rec.raw_combinations = fwd.raw_combinations;
  rec.template_count = fwd.templates.size();

  std::vector<double> group_lp;
  for (const auto& g : fwd.groups) group_lp.push_back(g.log_prob);
  const TemplateGroup& group = fwd.groups[rng.categorical_log(group_lp)];
  rec.log_p_group = group.log_prob;
  rec.group_size = group.members.size();

  std::vector<Filled> fills;
  std::vector<double> weights;
  for (std::size_t m : group.members) {
    fills.push_back(fill_template(fwd.templates[m].slots, lm, partition, rng));
    weights.push_back(target_->weight(fills.back().sentence));
  }
  const std::size_t pick = rng.categorical_log(weights);
  const Template& chosen = fwd.templates[group.members[pick]];
  for (std::size_t i = 0; i < fills.size(); ++i)
    if (i != pick) rec.forward_others.push_back(fills[i].sentence);
  rec.x_star = fills[pick].sentence;
  rec.ops = chosen.ops;
  rec.slots = chosen.slots;
  rec.template_error = chosen.error;
  rec.log_p_fill = fills[pick].log_p;
  rec.log_p_template = weights[pick] - log_sum_exp(weights);
  rec.log_q_forward = rec.log_p_pos + rec.log_p_group + rec.log_p_fill + rec.log_p_template;

  const auto info = reverse_from(fwd, x, rec.positions, rec.slots, rec.x_star, partition, target_->constraints(), k_,
                                 max_len_);
  if (!info) {
    rec.log_q_reverse = kNegInf;
    return rec;
  }
  rec.reverse_positions = info->path.positions;
  rec.reverse_slots = info->path.slots;
  if (rec.x_star == x && info->path.positions == rec.positions && info->path.slots == rec.slots) {
    rec.reverse_others = rec.forward_others;
    rec.log_q_reverse = rec.log_q_forward;
    return rec;
  }

  const TemplateSearch& back = info->search;
  const TemplateGroup& back_group = back.groups[back.group_of[info->template_index]];
  std::vector<double> back_weights;
  for (std::size_t m : back_group.members) {
    if (m == info->template_index) {
      back_weights.push_back(target_->weight(x));
    } else {
      rec.reverse_others.push_back(fill_template(back.templates[m].slots, lm, partition, rng).sentence);
      back_weights.push_back(target_->weight(rec.reverse_others.back()));
    }
  }
  const auto self =
      std::find(back_group.members.begin(), back_group.members.end(), info->template_index) - back_group.members.begin();
  rec.log_q_reverse = log_p_positions(rec.x_star.size(), k_) + back_group.log_prob +
                      fill_log_prob(info->path.slots, x, lm, partition) +
                      (back_weights[static_cast<std::size_t>(self)] - log_sum_exp(back_weights));
  return rec;
}

}  // namespace tsmh
