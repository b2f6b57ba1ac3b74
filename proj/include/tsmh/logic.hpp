#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsmh/template.hpp"
#include "tsmh/vocab.hpp"

namespace tsmh {

/// Propositional formula over indicator variables w_i[CATEGORY] ("the i-th
/// word is in CATEGORY"). Positions are 1-based. Immutable; copies share nodes.
class Formula {
 public:
  enum class Kind { Var, Not, And, Or };

  static Formula var(int position, std::string category);
  static Formula negate(Formula operand);
  static Formula conj(Formula lhs, Formula rhs);
  static Formula disj(Formula lhs, Formula rhs);

  Kind kind() const { return node_->kind; }
  int position() const { return node_->position; }
  const std::string& category() const { return node_->category; }
  const Formula& lhs() const { return node_->children.at(0); }
  const Formula& rhs() const { return node_->children.at(1); }
  const Formula& operand() const { return node_->children.at(0); }

  /// Structural equality.
  bool operator==(const Formula& other) const;

  /// Prints in the constraint DSL with minimal parentheses; conjunctions under a
  /// disjunction are always parenthesised. parse(print(f)) == f.
  std::string to_string() const;

  /// Distinct category names referenced, in first-appearance order.
  std::vector<std::string> categories() const;

 private:
  struct Node {
    Kind kind;
    int position = 0;
    std::string category;
    std::vector<Formula> children;
  };
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

/// Grammar (whitespace-insensitive):
///   expr   := term { "|" term }
///   term   := factor { "&" factor }
///   factor := "!" factor | "(" expr ")" | var
///   var    := "w" digits "[" name "]"
/// Throws SyntaxError with a 1-based column.
Formula parse_formula(std::string_view text);
/// Also rejects categories the partition does not define.
Formula parse_formula(std::string_view text, const CategoryPartition& partition);

/// Formula resolved against a partition for fast repeated evaluation.
class CompiledFormula {
 public:
  CompiledFormula(const Formula& formula, const CategoryPartition& partition);

  /// Var(i, V) is true iff i <= cats.size() and cats[i-1] == V.
  bool evaluate(std::span<const CategoryId> cats) const { return eval(root_, cats); }

 private:
  struct Node {
    Formula::Kind kind;
    std::size_t position;  // 0-based for Var
    CategoryId category;
    int lhs = -1;
    int rhs = -1;
  };
  int build(const Formula& f, const CategoryPartition& partition);
  bool eval(int index, std::span<const CategoryId> cats) const;

  std::vector<Node> nodes_;
  int root_ = -1;
};

std::vector<CategoryId> sentence_categories(const Sentence& x, const CategoryPartition& partition);

bool eval_sentence(const Formula& f, const Sentence& x, const CategoryPartition& partition);
bool eval_template(const Formula& f, const std::vector<Slot>& slots, const CategoryPartition& partition);

/// M hard constraints plus the per-violation penalty beta in (0, 1).
class ConstraintSet {
 public:
  ConstraintSet(std::vector<Formula> formulas, const CategoryPartition& partition, double beta);

  std::size_t size() const { return formulas_.size(); }
  const std::vector<Formula>& formulas() const { return formulas_; }
  double beta() const { return beta_; }
  double log_beta() const { return log_beta_; }

  /// Number of violated formulas, in [0, M].
  int error(std::span<const CategoryId> cats) const;
  int error(const Sentence& x, const CategoryPartition& partition) const;
  int error(const std::vector<Slot>& slots) const;

  /// log of beta^C.
  double log_hard_score(int error) const { return error == 0 ? 0.0 : error * log_beta_; }
  double hard_score(int error) const;

 private:
  std::vector<Formula> formulas_;
  std::vector<CompiledFormula> compiled_;
  double beta_;
  double log_beta_;
};

/// w1[K] | w2[K] | ... | w_max_len[K]
Formula keyword_constraint(std::string_view category, std::size_t max_len);
/// Exactly one position in 1..max_len holds K.
Formula keyword_exactly_once(std::string_view category, std::size_t max_len);
Formula exactly_once(std::string_view category, std::size_t max_len);

/// Relaxed: w1[QWH] and AUX at exactly one of positions 2, 3. Strict also
/// requires exactly one QWH and exactly one AUX over 1..max_len.
std::vector<Formula> interrogative_formulas(const CategoryPartition& partition, bool strict, std::size_t max_len);
/// w1[VERB] | (w1[ADV] & w2[VERB])
std::vector<Formula> imperative_formulas(const CategoryPartition& partition);

ConstraintSet interrogative_constraints(const CategoryPartition& partition, bool strict, std::size_t max_len,
                                        double beta);
ConstraintSet imperative_constraints(const CategoryPartition& partition, double beta);

}  // namespace tsmh
