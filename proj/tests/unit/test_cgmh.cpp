#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tsmh/cgmh.hpp"
#include "tsmh/errors.hpp"
#include "tsmh/logmath.hpp"

using namespace tsmh;
using namespace tsmh::testing;

TEST_CASE("op probabilities renormalize over valid edits") {
  auto w = make_toy_world();
  CgmhProposer p(*w->target, 3);
  CHECK(p.log_p_op(OpKind::Delete, 1) == kNegInf);
  CHECK(std::exp(p.log_p_op(OpKind::Replace, 1)) == doctest::Approx(0.5));
  CHECK(std::exp(p.log_p_op(OpKind::Replace, 2)) == doctest::Approx(1.0 / 3));
  CHECK(p.log_p_op(OpKind::Insert, 3) == kNegInf);
  CgmhProposer skewed(*w->target, 3, {.p_replace = 2, .p_insert = 1, .p_delete = 1});
  CHECK(std::exp(skewed.log_p_op(OpKind::Replace, 2)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(CgmhProposer(*w->target, 3, {.p_replace = 0}), ConfigError);
}

TEST_CASE("a one-word sentence is never shortened") {
  auto w = make_toy_world();
  CgmhProposer p(*w->target, 3);
  Rng rng(5);
  const auto x = w->sentence("paris");
  for (int i = 0; i < 2000; ++i) CHECK(p.propose(x, rng).x_star.size() >= 1);
}

TEST_CASE("replace reverse uses the original word's fill probability") {
  auto w = make_toy_world();
  CgmhProposer p(*w->target, 3);
  const auto x = w->sentence("paris is france");
  const auto y = w->sentence("paris is .");
  const auto words = w->vocab.real_ids();
  std::vector<TokenId> masked{x.tokens[0], x.tokens[1], w->vocab.mask()};
  const auto lp = w->lm->fill_logprobs(masked, 2, words);
  auto at = [&](TokenId t) { return lp[static_cast<std::size_t>(std::find(words.begin(), words.end(), t) - words.begin())]; };
  const double op = std::log(1.0 / 2), pos = std::log(1.0 / 3);  // no insert at max_len
  CHECK(p.path_log_prob(x, OpKind::Replace, 2, y) == doctest::Approx(op + pos + at(y.tokens[2])));
  CHECK(p.path_log_prob(y, OpKind::Replace, 2, x) == doctest::Approx(op + pos + at(x.tokens[2])));
  CHECK(p.path_log_prob(x, OpKind::Replace, 1, y) == kNegInf);
}

TEST_CASE("records describe the path taken") {
  auto w = make_toy_world();
  CgmhProposer p(*w->target, 3);
  Rng rng(9);
  std::map<OpKind, int> seen;
  for (const Sentence& x : all_sentences(w->vocab, 1, 3)) {
    for (int i = 0; i < 20; ++i) {
      const auto r = p.propose(x, rng);
      const OpKind op = r.ops.at(0).kind;
      ++seen[op];
      CHECK(r.log_q_forward == doctest::Approx(p.path_log_prob(x, op, r.positions[0], r.x_star)));
      const OpKind inv = op == OpKind::Insert ? OpKind::Delete : op == OpKind::Delete ? OpKind::Insert : OpKind::Replace;
      CHECK(r.log_q_reverse == doctest::Approx(p.path_log_prob(r.x_star, inv, r.positions[0], x)));
      CHECK(r.log_q_forward == doctest::Approx(r.log_p_pos + r.log_p_group + r.log_p_fill));
      CHECK(r.log_p_template == 0.0);
    }
  }
  CHECK(seen.size() == 3);
}

TEST_CASE("proposal sums to one and matches sampled frequencies") {
  auto w = make_toy_world();
  const CgmhOptions opt{.p_replace = 1, .p_insert = 2, .p_delete = 1};
  CgmhProposer p(*w->target, 3, opt);
  for (const Sentence& x : all_sentences(w->vocab, 1, 3)) {
    double total = 0;
    for (const auto& path : oracle_cgmh_paths(x, 3, opt, w->vocab, *w->lm)) {
      const double lq = p.path_log_prob(x, path.op, path.position, path.y);
      CHECK(lq == doctest::Approx(path.log_q).epsilon(1e-12));
      total += std::exp(lq);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  const auto x = w->sentence("what paris");
  const auto q = oracle_cgmh_marginal(x, 3, opt, w->vocab, *w->lm);
  Rng rng(1);
  std::map<Sentence, int> counts;
  const int n = 50000;
  for (int i = 0; i < n; ++i) counts[p.propose(x, rng).x_star]++;
  for (const auto& [y, pr] : q) {
    const double got = counts.contains(y) ? counts[y] : 0;
    CHECK(std::abs(got - n * pr) <= 4 * std::sqrt(n * pr * (1 - pr)) + 1);
  }
}
