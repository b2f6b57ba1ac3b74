#include "fixtures.hpp"

namespace tsmh::testing {

std::filesystem::path source_dir() { return TSMH_SOURCE_DIR; }
std::filesystem::path data_dir() { return source_dir() / "data"; }
std::filesystem::path configs_dir() { return source_dir() / "configs"; }

std::unique_ptr<ToyWorld> make_toy_world(const ToyOptions& options) {
  auto w = std::make_unique<ToyWorld>();
  w->max_len = options.max_len;
  w->vocab = Vocabulary::from_words({"what", "is", "paris", "france", "."});
  w->partition = CategoryPartition::from_lists({{"QWH", {"what"}}, {"AUX", {"is"}}}, "OTH", w->vocab);

  std::vector<Sentence> corpus;
  for (const char* line : {"what is paris .", "paris is france .", "is paris france", "what is france",
                           "france is paris .", "paris ."})
    corpus.push_back(tokenize(line, w->vocab));
  w->lm = std::make_unique<NGramModel>(NGramModel::train(corpus, 3, w->vocab, 0.5));

  w->constraints = std::make_unique<ConstraintSet>(interrogative_formulas(w->partition, false, options.max_len),
                                                   w->partition, options.beta);
  if (options.sentiment) {
    auto lexicon = std::make_shared<LexiconSentiment>();
    lexicon->set(w->vocab.id("paris"), 1.0);
    lexicon->set(w->vocab.id("france"), -0.5);
    w->soft = std::make_shared<SentimentScorer>(lexicon, SentimentTarget::Positive);
  }
  w->target = std::make_unique<Target>(w->partition, *w->constraints, *w->lm, w->soft);
  return w;
}

std::vector<Sentence> all_sentences(const Vocabulary& vocab, std::size_t min_len, std::size_t max_len) {
  const auto ids = vocab.real_ids();
  std::vector<Sentence> out;
  for (std::size_t len = std::max<std::size_t>(min_len, 1); len <= max_len; ++len) {
    std::vector<std::size_t> digit(len, 0);
    for (;;) {
      Sentence s;
      for (std::size_t d : digit) s.tokens.push_back(ids[d]);
      out.push_back(std::move(s));
      std::size_t i = len;
      while (i > 0 && ++digit[i - 1] == ids.size()) digit[--i] = 0;
      if (i == 0) break;
    }
  }
  return out;
}

}  // namespace tsmh::testing
