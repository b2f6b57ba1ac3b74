#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "tsmh/errors.hpp"
#include "tsmh/vocab.hpp"

using namespace tsmh;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("three-line vocabulary gets the mask appended") {
  const auto v = Vocabulary::load(write_temp("tsmh_v3.txt", "a\nb\nc\n"));
  CHECK(v.size() == 4);
  CHECK(v.word_count() == 3);
  CHECK(v.word(v.mask()) == Vocabulary::kMaskToken);
  CHECK(v.id("b") == 1);
}

TEST_CASE("duplicate token is reported with its line") {
  const auto msg = error_of([] { Vocabulary::load(write_temp("tsmh_vdup.txt", "a\na\n")); });
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK_THROWS_AS(Vocabulary::load(write_temp("tsmh_vempty.txt", "")), InputError);
}

TEST_CASE("toy vocabulary round-trips through save") {
  const auto path = testing::data_dir() / "toy" / "vocab.txt";
  const auto v = Vocabulary::load(path);
  const auto out = std::filesystem::temp_directory_path() / "tsmh_vsave.txt";
  v.save(out);
  std::ifstream a(path), b(out);
  std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
  CHECK(v.word(v.id("the")) == "the");
}

TEST_CASE("partition covers the vocabulary with a residual") {
  const auto v = Vocabulary::from_words({"what", "who", "is", "do", "paris", "."});
  const auto p = CategoryPartition::from_lists({{"QWH", {"what", "who"}}, {"AUX", {"is", "do"}}}, "OTH", v);
  CHECK(p.size() == 3);
  CHECK_NOTHROW(p.check_axioms());
  CHECK(p.category(p.category_of(v.id("who"))).name == "QWH");
  CHECK(p.category(p.category_of(v.id("paris"))).name == "OTH");
  CHECK_THROWS_AS(p.category_of(v.mask()), InputError);

  const auto only = CategoryPartition::from_lists({}, "OTH", v);
  CHECK(only.size() == 1);
  CHECK(only.category(0).members.size() == 6);
}

TEST_CASE("a word claimed twice names both categories") {
  const auto v = Vocabulary::from_words({"what", "do", "x"});
  const auto msg = error_of([&] { CategoryPartition::from_lists({{"QWH", {"do"}}, {"AUX", {"do"}}}, "OTH", v); });
  CHECK(msg.find("QWH") != std::string::npos);
  CHECK(msg.find("AUX") != std::string::npos);
  CHECK_THROWS_AS(CategoryPartition::from_lists({{"QWH", {"zzz"}}}, "OTH", v), InputError);
}

TEST_CASE("keyword categories are singletons placed before the residual") {
  const auto v = Vocabulary::from_words({"what", "is", "learning", "paris"});
  const auto p = CategoryPartition::from_lists({{"QWH", {"what"}}, {"AUX", {"is"}}}, "OTH", v);
  const auto q = p.with_keyword(v.id("learning"), "learning");
  REQUIRE(q.size() == 4);
  CHECK(q.category(2).name == "K:learning");
  CHECK(q.category(3).name == "OTH");
  CHECK(q.category(q.category_of(v.id("learning"))).members.size() == 1);
  CHECK_NOTHROW(q.check_axioms());

  const auto twice = q.with_keyword(v.id("learning"), "learning");
  CHECK(twice.size() == 4);

  const auto w = p.with_keyword(v.id("what"), "what");
  CHECK(w.category(*w.find("QWH")).members.empty());
  CHECK(w.nonempty().size() == 3);
  CHECK_NOTHROW(w.check_axioms());
}

TEST_CASE("tokenize splits terminal punctuation and rejects unknown words") {
  const auto v = Vocabulary::from_words({"paris", "is", "located", "in", "france", "."});
  const auto x = tokenize("Paris is located in France .", v);
  CHECK(x.size() == 6);
  CHECK(tokenize("paris is in france.", v).size() == 5);
  const auto msg = error_of([&] { tokenize("paris zzz", v); });
  CHECK(msg.find("zzz") != std::string::npos);
  CHECK(detokenize(x, v) == "paris is located in france .");
}

TEST_CASE("corpus lines round-trip through tokenize") {
  const auto v = Vocabulary::load(testing::data_dir() / "toy" / "vocab.txt");
  std::ifstream in(testing::data_dir() / "toy" / "corpus.txt");
  std::string line;
  for (int i = 0; i < 100 && std::getline(in, line); ++i) CHECK(detokenize(tokenize(line, v), v) == line);
}

TEST_CASE("sentence validation") {
  const auto v = Vocabulary::from_words({"a", "b"});
  CHECK_THROWS_AS(validate_sentence(Sentence{}, v, 4), InputError);
  CHECK_THROWS_AS(validate_sentence(Sentence{{0, 1, 0}}, v, 2), InputError);
  CHECK_THROWS_AS(validate_sentence(Sentence{{v.mask()}}, v, 2), InputError);
  CHECK_NOTHROW(validate_sentence(Sentence{{0, 1}}, v, 2));
}
