#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tsmh/cgmh.hpp"
#include "tsmh/errors.hpp"
#include "tsmh/logmath.hpp"
#include "tsmh/sampler.hpp"

using namespace tsmh;
using namespace tsmh::testing;

TEST_CASE("acceptance is clamped and rejects missing reverses") {
  CHECK(log_acceptance(-5, -1, -2, -2) == 0.0);
  CHECK(log_acceptance(-1, -5, -2, -2) == doctest::Approx(-4.0));
  CHECK(log_acceptance(-1, -1, -3, -1) == 0.0);
  CHECK(log_acceptance(-1, 0, -1, kNegInf) == kNegInf);
}

TEST_CASE("log pi decomposes into its factors") {
  auto w = make_toy_world({.beta = 0.25, .max_len = 3, .sentiment = true});
  Target& t = *w->target;
  for (const Sentence& x : all_sentences(w->vocab, 1, 3)) {
    const double expected = w->lm->sentence_logscore(x.tokens) + std::log(std::max(w->soft->score(x), 1e-12)) +
                            oracle_error(w->constraints->formulas(), sentence_categories(x, w->partition), w->partition) *
                                std::log(0.25);
    CHECK(t.log_pi(x) == doctest::Approx(expected).epsilon(1e-12));
  }
  auto plain = make_toy_world({.beta = 0.25});
  const auto ok = plain->sentence("what is paris");
  CHECK(plain->target->error(ok) == 0);
  CHECK(plain->target->log_pi(ok) == plain->lm->sentence_logscore(ok.tokens));
  const auto one = plain->sentence("what paris is");
  const auto two = plain->sentence("paris is what");
  CHECK(plain->target->error(two) - plain->target->error(one) == 1);
  CHECK(plain->target->log_pi(two) - plain->lm->sentence_logscore(two.tokens) -
            (plain->target->log_pi(one) - plain->lm->sentence_logscore(one.tokens)) ==
        doctest::Approx(std::log(0.25)));
}

TEST_CASE("deleting a word from a fluent sentence is nearly always rejected") {
  const auto v = Vocabulary::load(data_dir() / "toy" / "vocab.txt");
  const auto p = CategoryPartition::load(data_dir() / "toy" / "categories.json", v);
  const auto lm = NGramModel::train(data_dir() / "toy" / "corpus.txt", 3, v);
  const ConstraintSet cs({}, p, 0.5);
  Target target(p, cs, lm);
  CgmhProposer cgmh(target, 16);
  const auto x = tokenize("paris is located in france .", v);
  const auto y = tokenize("paris located in france .", v);
  const double q_f = cgmh.path_log_prob(x, OpKind::Delete, 1, y);
  const double q_r = cgmh.path_log_prob(y, OpKind::Insert, 1, x);
  const double log_a = log_acceptance(target.log_pi(x), target.log_pi(y), q_f, q_r);
  MESSAGE("single-delete acceptance " << std::exp(log_a));
  CHECK(log_a < std::log(1e-3));
}

TEST_CASE("empirical acceptance matches the analytic rate") {
  auto w = make_toy_world({.beta = 0.3, .max_len = 3});
  Target& t = *w->target;
  CgmhProposer cgmh(t, 3);
  const auto x = w->sentence("paris what france");
  double analytic = 0;
  for (const auto& path : oracle_cgmh_paths(x, 3, {}, w->vocab, *w->lm)) {
    const OpKind inv = path.op == OpKind::Insert   ? OpKind::Delete
                       : path.op == OpKind::Delete ? OpKind::Insert
                                                   : OpKind::Replace;
    const double q_r = cgmh.path_log_prob(path.y, inv, path.position, x);
    analytic += std::exp(path.log_q + log_acceptance(t.log_pi(x), t.log_pi(path.y), path.log_q, q_r));
  }
  Rng rng(12);
  const int n = 100000;
  int accepted = 0;
  for (int i = 0; i < n; ++i) {
    Sentence s = x;
    accepted += mh_step(s, cgmh, t, rng).accepted;
  }
  const double sd = std::sqrt(n * analytic * (1 - analytic));
  CHECK(std::abs(accepted - n * analytic) <= 3 * sd);
}

TEST_CASE("chains: history, best state and metrics") {
  auto w = make_toy_world();
  TsmhProposer tsmh(*w->target, 2, 3);
  Rng rng(1);
  const auto start = w->sentence("what is paris");
  const ChainResult one = run_chain(start, 1, tsmh, *w->target, rng);
  CHECK(one.history.size() == 1);

  Rng a(77), b(77);
  const ChainResult r = run_chain(start, 300, tsmh, *w->target, a);
  const ChainResult r2 = run_chain(start, 300, tsmh, *w->target, b);
  CHECK(history_jsonl(r, w->vocab) == history_jsonl(r2, w->vocab));
  double best = kNegInf;
  int valid = 0, acc = 0;
  for (const auto& s : r.history) {
    best = std::max(best, s.log_pi);
    valid += s.error == 0;
    acc += s.accepted;
    CHECK(s.log_pi == w->target->log_pi(s.sentence));
  }
  CHECK(r.best_log_pi == best);
  CHECK(w->target->log_pi(r.best) == best);
  CHECK(r.metrics.valid_fraction == doctest::Approx(valid / 300.0));
  CHECK(r.metrics.acceptance_rate == doctest::Approx(acc / 300.0));
}

TEST_CASE("history lines") {
  auto w = make_toy_world();
  ChainResult r;
  r.history.push_back({w->sentence("what is paris"), -3.5, true, 0.0, 0});
  r.history.push_back({w->sentence("what is paris"), -3.5, false, kNegInf, 0});
  std::istringstream lines(history_jsonl(r, w->vocab));
  std::string line;
  std::getline(lines, line);
  CHECK(line == R"({"step":1,"sentence":"what is paris","log_pi":-3.5,"accepted":true,"log_A":0.0,"constraint_error":0})");
  std::getline(lines, line);
  CHECK(nlohmann::json::parse(line)["log_A"].is_null());
}

TEST_CASE("initial sentences") {
  const std::vector<TokenId> kw{4, 7};
  CHECK(initial_sentence(kw, 9, 4, 10).tokens == std::vector<TokenId>{4, 7, 9, 9});
  CHECK(initial_sentence(kw, 9, 1, 10).tokens == std::vector<TokenId>{4, 7});
  CHECK_THROWS_AS(initial_sentence(kw, 9, 2, 1), ConfigError);
}

TEST_CASE("exact distribution") {
  const auto v = Vocabulary::from_words({"a", "b", "c"});
  const auto p = CategoryPartition::from_lists({{"A", {"a"}}}, "R", v);
  const NGramModel uniform(v, 2);
  const ConstraintSet none({}, p, 0.5);
  Target t(p, none, uniform);
  const auto d = exact_distribution(t, 2, 2);
  CHECK(d.size() == 9);
  for (const auto& [x, pr] : d) CHECK(pr == doctest::Approx(1.0 / 9));

  const ConstraintSet first({parse_formula("w1[A]")}, p, 1e-12);
  Target strict(p, first, uniform);
  double mass = 0;
  for (const auto& [x, pr] : exact_distribution(strict, 1, 3))
    if (x.tokens[0] == v.id("a")) mass += pr;
  CHECK(mass > 1 - 1e-9);

  const auto big = Vocabulary::from_words({"1", "2", "3", "4", "5", "6", "7", "8", "9"});
  const auto bp = CategoryPartition::from_lists({}, "R", big);
  const NGramModel bl(big, 2);
  const ConstraintSet bn({}, bp, 0.5);
  Target bt(bp, bn, bl);
  CHECK_THROWS_AS(exact_distribution(bt, 1, 2), ConfigError);
  CHECK_THROWS_AS(exact_distribution(t, 1, 5), ConfigError);
}
