#include "tsmh/logic.hpp"

#include <cctype>
#include <cmath>

#include "tsmh/errors.hpp"

namespace tsmh {

Formula Formula::var(int position, std::string category) {
  if (position < 1) throw InputError("variable positions are 1-based");
  return Formula(std::make_shared<const Node>(Node{Kind::Var, position, std::move(category), {}}));
}

Formula Formula::negate(Formula operand) {
  return Formula(std::make_shared<const Node>(Node{Kind::Not, 0, {}, {std::move(operand)}}));
}

Formula Formula::conj(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Kind::And, 0, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::disj(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Kind::Or, 0, {}, {std::move(lhs), std::move(rhs)}}));
}

bool Formula::operator==(const Formula& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case Kind::Var:
      return position() == other.position() && category() == other.category();
    case Kind::Not:
      return operand() == other.operand();
    default:
      return lhs() == other.lhs() && rhs() == other.rhs();
  }
}

namespace {

void print(const Formula& f, std::string& out);

void print_child(const Formula& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print(child, out);
  if (parens) out += ')';
}

void print(const Formula& f, std::string& out) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Var:
      out += 'w';
      out += std::to_string(f.position());
      out += '[';
      out += f.category();
      out += ']';
      break;
    case K::Not:
      out += '!';
      print_child(f.operand(), f.operand().kind() == K::And || f.operand().kind() == K::Or, out);
      break;
    case K::And:
      print_child(f.lhs(), f.lhs().kind() == K::Or, out);
      out += '&';
      print_child(f.rhs(), f.rhs().kind() == K::Or || f.rhs().kind() == K::And, out);
      break;
    case K::Or:
      print_child(f.lhs(), f.lhs().kind() == K::And, out);
      out += '|';
      print_child(f.rhs(), f.rhs().kind() == K::And || f.rhs().kind() == K::Or, out);
      break;
  }
}

void collect(const Formula& f, std::vector<std::string>& names) {
  if (f.kind() == Formula::Kind::Var) {
    for (const auto& n : names)
      if (n == f.category()) return;
    names.push_back(f.category());
  } else if (f.kind() == Formula::Kind::Not) {
    collect(f.operand(), names);
  } else {
    collect(f.lhs(), names);
    collect(f.rhs(), names);
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Formula parse() {
    Formula f = expr();
    skip_ws();
    if (pos_ < text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, pos_ + 1); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Formula expr() {
    Formula f = term();
    while (accept('|')) f = Formula::disj(f, term());
    return f;
  }

  Formula term() {
    Formula f = factor();
    while (accept('&')) f = Formula::conj(f, factor());
    return f;
  }

  Formula factor() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (accept('!')) return Formula::negate(factor());
    if (accept('(')) {
      Formula f = expr();
      if (!accept(')')) fail(pos_ < text_.size() ? "expected ')'" : "unexpected end of input, expected ')'");
      return f;
    }
    return variable();
  }

  Formula variable() {
    if (text_[pos_] != 'w') fail(std::string("expected variable 'w<i>[NAME]', found '") + text_[pos_] + "'");
    ++pos_;
    const std::size_t digits_start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == digits_start) fail("expected position digits after 'w'");
    const std::string digits(text_.substr(digits_start, pos_ - digits_start));
    if (digits.size() > 6) fail("position too large");
    const int position = std::stoi(digits);
    if (position < 1) {
      pos_ = digits_start;
      fail("positions are 1-based");
    }
    if (pos_ >= text_.size() || text_[pos_] != '[') fail("expected '['");
    ++pos_;
    const std::size_t name_start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ']' && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == name_start) fail("expected category name");
    if (pos_ >= text_.size() || text_[pos_] != ']') fail("expected ']'");
    std::string name(text_.substr(name_start, pos_ - name_start));
    ++pos_;
    return Formula::var(position, std::move(name));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string Formula::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

std::vector<std::string> Formula::categories() const {
  std::vector<std::string> names;
  collect(*this, names);
  return names;
}

Formula parse_formula(std::string_view text) { return Parser(text).parse(); }

Formula parse_formula(std::string_view text, const CategoryPartition& partition) {
  Formula f = parse_formula(text);
  for (const auto& name : f.categories())
    if (!partition.find(name)) throw InputError("unknown category '" + name + "' in formula '" + std::string(text) + "'");
  return f;
}

// ---------------------------------------------------------------------------

CompiledFormula::CompiledFormula(const Formula& formula, const CategoryPartition& partition) {
  root_ = build(formula, partition);
}

int CompiledFormula::build(const Formula& f, const CategoryPartition& partition) {
  Node node{f.kind(), 0, kNoCategory};
  switch (f.kind()) {
    case Formula::Kind::Var: {
      auto c = partition.find(f.category());
      if (!c) throw InputError("unknown category '" + f.category() + "'");
      node.position = static_cast<std::size_t>(f.position() - 1);
      node.category = *c;
      break;
    }
    case Formula::Kind::Not:
      node.lhs = build(f.operand(), partition);
      break;
    default:
      node.lhs = build(f.lhs(), partition);
      node.rhs = build(f.rhs(), partition);
      break;
  }
  nodes_.push_back(node);
  return static_cast<int>(nodes_.size() - 1);
}

bool CompiledFormula::eval(int index, std::span<const CategoryId> cats) const {
  const Node& n = nodes_[static_cast<std::size_t>(index)];
  switch (n.kind) {
    case Formula::Kind::Var:
      return n.position < cats.size() && cats[n.position] == n.category;
    case Formula::Kind::Not:
      return !eval(n.lhs, cats);
    case Formula::Kind::And:
      return eval(n.lhs, cats) && eval(n.rhs, cats);
    case Formula::Kind::Or:
      return eval(n.lhs, cats) || eval(n.rhs, cats);
  }
  return false;
}

std::vector<CategoryId> sentence_categories(const Sentence& x, const CategoryPartition& partition) {
  std::vector<CategoryId> cats;
  cats.reserve(x.tokens.size());
  for (TokenId t : x.tokens) cats.push_back(partition.category_of(t));
  return cats;
}

bool eval_sentence(const Formula& f, const Sentence& x, const CategoryPartition& partition) {
  return CompiledFormula(f, partition).evaluate(sentence_categories(x, partition));
}

bool eval_template(const Formula& f, const std::vector<Slot>& slots, const CategoryPartition& partition) {
  return CompiledFormula(f, partition).evaluate(slot_categories(slots));
}

// ---------------------------------------------------------------------------

ConstraintSet::ConstraintSet(std::vector<Formula> formulas, const CategoryPartition& partition, double beta)
    : formulas_(std::move(formulas)), beta_(beta), log_beta_(std::log(beta)) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie strictly between 0 and 1");
  compiled_.reserve(formulas_.size());
  for (const auto& f : formulas_) compiled_.emplace_back(f, partition);
}

int ConstraintSet::error(std::span<const CategoryId> cats) const {
  int violated = 0;
  for (const auto& f : compiled_)
    if (!f.evaluate(cats)) ++violated;
  return violated;
}

int ConstraintSet::error(const Sentence& x, const CategoryPartition& partition) const {
  return error(sentence_categories(x, partition));
}

int ConstraintSet::error(const std::vector<Slot>& slots) const { return error(slot_categories(slots)); }

double ConstraintSet::hard_score(int error) const { return std::exp(log_hard_score(error)); }

// ---------------------------------------------------------------------------

Formula keyword_constraint(std::string_view category, std::size_t max_len) {
  if (max_len == 0) throw ConfigError("max_len must be positive");
  Formula f = Formula::var(1, std::string(category));
  for (std::size_t i = 2; i <= max_len; ++i) f = Formula::disj(f, Formula::var(static_cast<int>(i), std::string(category)));
  return f;
}

Formula exactly_once(std::string_view category, std::size_t max_len) {
  if (max_len == 0) throw ConfigError("max_len must be positive");
  const std::string name(category);
  auto only_at = [&](std::size_t i) {
    Formula f = Formula::var(static_cast<int>(i), name);
    for (std::size_t j = 1; j <= max_len; ++j)
      if (j != i) f = Formula::conj(f, Formula::negate(Formula::var(static_cast<int>(j), name)));
    return f;
  };
  Formula f = only_at(1);
  for (std::size_t i = 2; i <= max_len; ++i) f = Formula::disj(f, only_at(i));
  return f;
}

Formula keyword_exactly_once(std::string_view category, std::size_t max_len) { return exactly_once(category, max_len); }

namespace {
void require(const CategoryPartition& partition, std::string_view name) {
  if (!partition.find(name)) throw ConfigError("partition lacks required category '" + std::string(name) + "'");
}
}  // namespace

std::vector<Formula> interrogative_formulas(const CategoryPartition& partition, bool strict, std::size_t max_len) {
  require(partition, "QWH");
  require(partition, "AUX");
  std::vector<Formula> out;
  out.push_back(parse_formula("w1[QWH]"));
  out.push_back(parse_formula("(w2[AUX] & !w3[AUX]) | (w3[AUX] & !w2[AUX])"));
  if (strict) {
    out.push_back(exactly_once("QWH", max_len));
    out.push_back(exactly_once("AUX", max_len));
  }
  return out;
}

std::vector<Formula> imperative_formulas(const CategoryPartition& partition) {
  require(partition, "VERB");
  require(partition, "ADV");
  return {parse_formula("w1[VERB] | (w1[ADV] & w2[VERB])")};
}

ConstraintSet interrogative_constraints(const CategoryPartition& partition, bool strict, std::size_t max_len,
                                        double beta) {
  return ConstraintSet(interrogative_formulas(partition, strict, max_len), partition, beta);
}

ConstraintSet imperative_constraints(const CategoryPartition& partition, double beta) {
  return ConstraintSet(imperative_formulas(partition), partition, beta);
}

}  // namespace tsmh
