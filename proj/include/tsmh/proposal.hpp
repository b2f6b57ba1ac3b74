#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tsmh/rng.hpp"
#include "tsmh/target.hpp"
#include "tsmh/template.hpp"

namespace tsmh {

enum class OpKind : std::uint8_t { None, Replace, Insert, Delete };

struct EditOp {
  OpKind kind = OpKind::None;
  CategoryId category = kNoCategory;  // Replace and Insert only

  static EditOp none() { return {}; }
  static EditOp replace(CategoryId c) { return {OpKind::Replace, c}; }
  static EditOp insert(CategoryId c) { return {OpKind::Insert, c}; }
  static EditOp erase() { return {OpKind::Delete, kNoCategory}; }

  bool operator==(const EditOp&) const = default;
};

std::string to_string(const EditOp& op, const CategoryPartition& partition);

/// Operations at one position in enumeration order: None, Replace(c) for each
/// non-empty category, Insert(c) for each, Delete. Size 2|V|+2.
std::vector<EditOp> position_ops(const CategoryPartition& partition);

/// Applies one op per selected position (0-based, ascending) against the
/// original sentence. Insert(c) puts a placeholder before the word; Replace(c)
/// swaps the word for a placeholder.
std::vector<Slot> apply_ops(const Sentence& x, std::span<const std::size_t> positions, std::span<const EditOp> ops,
                            const CategoryPartition& partition);

struct Template {
  std::vector<Slot> slots;
  std::vector<EditOp> ops;  // provenance: one op per selected position
  int error = 0;
};

struct TemplateGroup {
  int error = 0;
  std::vector<std::size_t> members;  // indices into TemplateSearch::templates, ascending
  double log_prob = 0.0;
};

/// Result of the tree search at one (sentence, positions) pair.
struct TemplateSearch {
  std::vector<Template> templates;    // deduplicated, first-seen order
  std::vector<TemplateGroup> groups;  // ascending error
  std::vector<std::size_t> group_of;  // template index -> group index
  std::size_t raw_combinations = 0;

  std::optional<std::size_t> find(const std::vector<Slot>& slots) const;

  std::unordered_map<std::vector<Slot>, std::size_t, SlotSequenceHash> index;
};

/// Depth-first enumeration of every op combination over the positions.
/// Templates that are empty or longer than max_len are pruned; duplicates keep
/// the first provenance.
TemplateSearch enumerate_templates(const Sentence& x, std::span<const std::size_t> positions,
                                   const CategoryPartition& partition, const ConstraintSet& constraints,
                                   std::size_t max_len);

/// Normalized log-probabilities of groups with the given (ascending, distinct)
/// errors: proportional to (1 - beta) beta^(C_i - C_min).
std::vector<double> group_log_probs(std::span<const int> errors, double beta);

/// Uniform k'-subset of {0..m-1}, k' = min(k, m), ascending.
std::vector<std::size_t> select_positions(std::size_t m, std::size_t k, Rng& rng);
/// log 1/C(m, k').
double log_p_positions(std::size_t m, std::size_t k);

struct Filled {
  Sentence sentence;
  double log_p = 0.0;
};

/// Fills placeholders left to right; each draw comes from the LM's conditional
/// over the placeholder's category with later placeholders still masked.
Filled fill_template(const std::vector<Slot>& slots, const LmBackend& lm, const CategoryPartition& partition,
                     Rng& rng);
/// Probability that fill_template produces exactly y; -inf when y does not
/// instantiate the template.
double fill_log_prob(const std::vector<Slot>& slots, const Sentence& y, const LmBackend& lm,
                     const CategoryPartition& partition);

struct InverseMove {
  std::vector<std::size_t> positions;  // at x*, ascending
  std::vector<EditOp> ops;
};

/// Positions and ops at x* that undo (positions, ops) applied to x, assuming
/// the placeholders are filled. Deleting word i is undone by inserting before
/// word i+1, so i+1 must exist and be unselected; otherwise nullopt.
std::optional<InverseMove> invert_move(const Sentence& x, std::span<const std::size_t> positions,
                                       std::span<const EditOp> ops, const CategoryPartition& partition);

/// One full proposal and its probabilities. For TSMH the four factors are
/// P_pos, P_group, P_fill, P_template; CGMH reuses them as position, op, word
/// and 1.
struct ProposalRecord {
  Sentence x_star;
  std::vector<std::size_t> positions;
  std::vector<EditOp> ops;
  std::vector<Slot> slots;
  int template_error = 0;
  double log_p_pos = 0.0;
  double log_p_group = 0.0;
  double log_p_fill = 0.0;
  double log_p_template = 0.0;
  double log_q_forward = 0.0;
  double log_q_reverse = 0.0;
  std::size_t raw_combinations = 0;
  std::size_t template_count = 0;
  std::size_t group_size = 0;
  // TSMH only: fills of the other group members on both sides, and the
  // reverse path (empty positions when there is none).
  std::vector<Sentence> forward_others;
  std::vector<Sentence> reverse_others;
  std::vector<std::size_t> reverse_positions;
  std::vector<Slot> reverse_slots;
};

class Proposer {
 public:
  virtual ~Proposer() = default;
  virtual std::string_view name() const = 0;
  virtual ProposalRecord propose(const Sentence& x, Rng& rng) = 0;
};

/// Deterministic probability of one proposal path once the fills of the other
/// group members are fixed.
struct PathProbability {
  double log_p_pos = 0.0;
  double log_p_group = 0.0;
  double log_p_fill = 0.0;
  double log_p_template = 0.0;
  double total() const { return log_p_pos + log_p_group + log_p_fill + log_p_template; }
};

struct ReversePath {
  Sentence x_star;
  std::vector<std::size_t> positions;
  std::vector<Slot> slots;
};

class TsmhProposer final : public Proposer {
 public:
  TsmhProposer(Target& target, std::size_t k, std::size_t max_len);

  std::string_view name() const override { return "tsmh"; }
  ProposalRecord propose(const Sentence& x, Rng& rng) override;

  std::size_t k() const { return k_; }
  std::size_t max_len() const { return max_len_; }

  TemplateSearch search(const Sentence& x, std::span<const std::size_t> positions) const;

  /// Probability of proposing y from x through (positions, slots), where
  /// `others` holds one fill for every other member of the template's group,
  /// in member order.
  PathProbability path_probability(const Sentence& x, std::span<const std::size_t> positions,
                                   const std::vector<Slot>& slots, const Sentence& y,
                                   std::span<const Sentence> others);

  /// The path from y back to x pairing with the forward path, or nullopt when
  /// the forward path has no reverse (its proposal is then rejected).
  std::optional<ReversePath> reverse_path(const Sentence& x, std::span<const std::size_t> positions,
                                          const std::vector<Slot>& slots, const Sentence& y) const;

 private:
  Target* target_;
  std::size_t k_;
  std::size_t max_len_;
};

}  // namespace tsmh
