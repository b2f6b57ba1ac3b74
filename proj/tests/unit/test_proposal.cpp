#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tsmh/logmath.hpp"
#include "tsmh/proposal.hpp"

using namespace tsmh;
using namespace tsmh::testing;

namespace {

// Any instantiation of every other member of the template's group.
std::vector<Sentence> some_others(TsmhProposer& proposer, Target& target, const Sentence& x,
                                  const std::vector<std::size_t>& pos, const std::vector<Slot>& slots) {
  const auto search = proposer.search(x, pos);
  const auto t = *search.find(slots);
  std::vector<Sentence> out;
  for (std::size_t m : search.groups[search.group_of[t]].members)
    if (m != t) out.push_back(oracle_fills(search.templates[m].slots, target.lm(), target.partition()).front().y);
  return out;
}

}  // namespace

TEST_CASE("position subsets are uniform") {
  Rng rng(42);
  std::map<std::vector<std::size_t>, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[select_positions(5, 3, rng)]++;
  CHECK(counts.size() == 10);
  double chi2 = 0;
  for (const auto& [s, c] : counts) chi2 += (c - n / 10.0) * (c - n / 10.0) / (n / 10.0);
  CHECK(chi2 < 27.88);  // chi-square, 9 dof, p = 0.001
  CHECK(std::exp(log_p_positions(5, 3)) == doctest::Approx(0.1));

  CHECK(select_positions(2, 3, rng) == std::vector<std::size_t>{0, 1});
  CHECK(log_p_positions(2, 3) == 0.0);
}

TEST_CASE("raw combinations and the identity template") {
  auto w = make_toy_world();
  const auto x = w->sentence("what is paris");
  const auto search = enumerate_templates(x, std::vector<std::size_t>{0, 2}, w->partition, *w->constraints, 3);
  CHECK(search.raw_combinations == 64);
  CHECK(search.templates.size() <= 64);

  const auto one = enumerate_templates(x, std::vector<std::size_t>{1}, w->partition, *w->constraints, 3);
  const Template& first = one.templates.front();
  CHECK(first.ops == std::vector<EditOp>{EditOp::none()});
  CHECK(instantiates(first.slots, x, w->partition));
  CHECK(first.error == w->constraints->error(x, w->partition));
}

TEST_CASE("tree search matches a flat enumeration") {
  auto w = make_toy_world({.beta = 0.3, .max_len = 4});
  for (const Sentence& x : all_sentences(w->vocab, 1, 3)) {
    for (const auto& positions : subsets(x.size(), 2)) {
      const auto lib = enumerate_templates(x, positions, w->partition, *w->constraints, 4);
      const auto ref = oracle_templates(x, positions, w->partition, w->constraints->formulas(), 4);
      REQUIRE(lib.templates.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(lib.templates[i].slots == ref[i].slots);
        CHECK(lib.templates[i].ops == ref[i].ops);
        CHECK(lib.templates[i].error == ref[i].error);
      }
    }
  }
}

TEST_CASE("group probabilities") {
  const int two[] = {0, 2};
  const auto lp = group_log_probs(two, 0.5);
  CHECK(std::exp(lp[0]) == doctest::Approx(0.8));
  CHECK(std::exp(lp[1]) == doctest::Approx(0.2));
  const int one[] = {3};
  CHECK(group_log_probs(one, 0.5)[0] == doctest::Approx(0.0));
  const int many[] = {1, 2, 3};
  CHECK(std::exp(group_log_probs(many, 1e-10)[0]) >= 1 - 1e-9);
}

TEST_CASE("fill probabilities") {
  const auto v = Vocabulary::from_words({"a1", "a2", "a3", "b1", "b2", "b3", "b4", "s", "x"});
  const auto p = CategoryPartition::from_lists(
      {{"A", {"a1", "a2", "a3"}}, {"B", {"b1", "b2", "b3", "b4"}}, {"S", {"s"}}}, "X", v);
  const NGramModel uniform(v, 2);
  Rng rng(1);
  const auto a = *p.find("A"), b = *p.find("B"), s = *p.find("S");
  const std::vector<Slot> two{Slot::hole(a), Slot::fixed(v.id("x"), *p.find("X")), Slot::hole(b)};
  const Filled f = fill_template(two, uniform, p, rng);
  CHECK(f.log_p == doctest::Approx(std::log(1.0 / 12)));
  CHECK(fill_log_prob(two, f.sentence, uniform, p) == doctest::Approx(std::log(1.0 / 12)));

  const std::vector<Slot> fixed{Slot::fixed(v.id("x"), *p.find("X"))};
  CHECK(fill_template(fixed, uniform, p, rng).log_p == 0.0);
  const std::vector<Slot> forced{Slot::hole(s)};
  const Filled g = fill_template(forced, uniform, p, rng);
  CHECK(g.log_p == 0.0);
  CHECK(g.sentence.tokens == std::vector<TokenId>{v.id("s")});
  CHECK(fill_log_prob(forced, Sentence{{v.id("x")}}, uniform, p) == kNegInf);
}

TEST_CASE("fills agree with the sequential oracle") {
  auto w = make_toy_world();
  const auto oth = w->partition.residual();
  const auto qwh = *w->partition.find("QWH");
  const std::vector<Slot> slots{Slot::hole(qwh), Slot::hole(oth), Slot::fixed(w->vocab.id("is"), 1), Slot::hole(oth)};
  double total = 0;
  for (const auto& f : oracle_fills(slots, *w->lm, w->partition)) {
    CHECK(fill_log_prob(slots, f.y, *w->lm, w->partition) == doctest::Approx(f.log_p).epsilon(1e-12));
    total += std::exp(f.log_p);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("proposal frequencies match the marginal") {
  auto w = make_toy_world({.beta = 0.3, .max_len = 3, .sentiment = true});
  TsmhProposer proposer(*w->target, 2, 3);
  const auto x = w->sentence("paris is france");
  const auto q = library_tsmh_marginal(proposer, *w->target, x);
  std::map<Sentence, int> counts;
  Rng rng(7);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const ProposalRecord r = proposer.propose(x, rng);
    counts[r.x_star]++;
    CHECK(r.log_q_forward == doctest::Approx(r.log_p_pos + r.log_p_group + r.log_p_fill + r.log_p_template));
  }
  for (const auto& [y, c] : counts) REQUIRE(q.contains(y));
  for (const auto& [y, p] : q) {
    const double sd = std::sqrt(n * p * (1 - p));
    const auto it = counts.find(y);
    const double got = it == counts.end() ? 0 : it->second;
    CHECK(std::abs(got - n * p) <= 4 * sd + 1);
  }
}

TEST_CASE("equal candidates split evenly") {
  auto w = make_toy_world({.beta = 0.3, .max_len = 3});
  TsmhProposer proposer(*w->target, 1, 3);
  const auto x = w->sentence("what is paris");
  const std::vector<std::size_t> pos{0};
  const auto search = proposer.search(x, pos);
  const auto& slots = search.templates.front().slots;
  const auto size = search.groups[search.group_of[0]].members.size();
  REQUIRE(size > 1);
  const std::vector<Sentence> same(size - 1, x);
  const auto p = proposer.path_probability(x, pos, slots, x, same);
  CHECK(p.log_p_template == doctest::Approx(-std::log(static_cast<double>(size))));
  CHECK_THROWS(proposer.path_probability(x, pos, slots, x, {}));
}

TEST_CASE("identity move reverses onto itself") {
  auto w = make_toy_world();
  TsmhProposer proposer(*w->target, 2, 3);
  const auto x = w->sentence("what is paris");
  const std::vector<std::size_t> pos{0, 2};
  const auto search = proposer.search(x, pos);
  const auto& id = search.templates.front();
  CHECK(id.ops == std::vector<EditOp>{EditOp::none(), EditOp::none()});
  const auto rev = proposer.reverse_path(x, pos, id.slots, x);
  REQUIRE(rev);
  CHECK(rev->x_star == x);
  CHECK(rev->positions == pos);
  CHECK(rev->slots == id.slots);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto r = proposer.propose(x, rng);
    if (r.x_star == x && r.reverse_positions == r.positions && r.reverse_slots == r.slots)
      CHECK(r.log_q_reverse == r.log_q_forward);
  }
}

TEST_CASE("single replace reverses with the original word's fill") {
  auto w = make_toy_world();
  TsmhProposer proposer(*w->target, 1, 3);
  const auto x = w->sentence("paris is france");
  const auto y = w->sentence("paris is .");
  const std::vector<std::size_t> pos{2};
  const auto oth = w->partition.residual();
  const std::vector<Slot> slots{Slot::fixed(x.tokens[0], oth), Slot::fixed(x.tokens[1], 1), Slot::hole(oth)};
  const auto rev = proposer.reverse_path(x, pos, slots, y);
  REQUIRE(rev);
  CHECK(rev->positions == pos);
  CHECK(rev->slots == slots);
  const auto& members = w->partition.category(oth).members;
  std::vector<TokenId> masked{y.tokens[0], y.tokens[1], w->vocab.mask()};
  const auto lp = w->lm->fill_logprobs(masked, 2, members);
  const auto at = std::find(members.begin(), members.end(), x.tokens[2]) - members.begin();
  const auto back = proposer.path_probability(y, rev->positions, rev->slots, x,
                                              some_others(proposer, *w->target, y, rev->positions, rev->slots));
  CHECK(back.log_p_fill == doctest::Approx(lp[static_cast<std::size_t>(at)]));
}

TEST_CASE("inverse moves") {
  auto w = make_toy_world({.beta = 0.3, .max_len = 4});
  const auto oth = w->partition.residual();
  const auto x = w->sentence("paris is france");
  const std::vector<std::size_t> pos{0, 1};
  const std::vector<EditOp> del_keep{EditOp::erase(), EditOp::none()};
  CHECK_FALSE(invert_move(x, pos, del_keep, w->partition));  // the anchor word is selected
  const std::vector<std::size_t> apart{0, 2};
  const auto inv = invert_move(x, apart, del_keep, w->partition);
  REQUIRE(inv);
  CHECK(inv->positions == std::vector<std::size_t>{0, 1});
  CHECK(inv->ops == std::vector<EditOp>{EditOp::insert(oth), EditOp::none()});

  const std::vector<EditOp> del_del{EditOp::erase(), EditOp::erase()};
  CHECK_FALSE(invert_move(x, pos, del_del, w->partition));
  const std::vector<std::size_t> last{2};
  CHECK_FALSE(invert_move(x, last, std::vector<EditOp>{EditOp::erase()}, w->partition));

  const std::vector<EditOp> ins{EditOp::insert(oth), EditOp::replace(oth)};
  const auto inv2 = invert_move(x, pos, ins, w->partition);
  REQUIRE(inv2);
  CHECK(inv2->positions == std::vector<std::size_t>{0, 2});
  CHECK(inv2->ops == std::vector<EditOp>{EditOp::erase(), EditOp::replace(1)});
}

TEST_CASE("a question template is one step away") {
  const auto v = Vocabulary::load(data_dir() / "toy" / "vocab.txt");
  const auto p = CategoryPartition::load(data_dir() / "toy" / "categories.json", v);
  const ConstraintSet cs = interrogative_constraints(p, false, 16, 1e-10);
  const auto x = tokenize("paris is located in france .", v);
  const std::vector<std::size_t> pos{0, 1, 5};
  const auto search = enumerate_templates(x, pos, p, cs, 16);
  const auto aux = *p.find("AUX"), oth = p.residual();
  std::vector<Slot> want{Slot::hole(aux)};
  for (std::size_t i : {0, 2, 3, 4}) want.push_back(Slot::fixed(x.tokens[i], p.category_of(x.tokens[i])));
  want.push_back(Slot::hole(oth));
  CHECK(search.find(want).has_value());
  CHECK(search.raw_combinations == static_cast<std::size_t>(std::pow(2 * 3 + 2, 3)));
}
