#pragma once

#include <filesystem>
#include <memory>
#include <string_view>

#include "tsmh/lm.hpp"
#include "tsmh/logic.hpp"
#include "tsmh/soft.hpp"
#include "tsmh/target.hpp"
#include "tsmh/vocab.hpp"

namespace tsmh::testing {

std::filesystem::path source_dir();
std::filesystem::path data_dir();
std::filesystem::path configs_dir();

/// Five words, categories QWH = {what}, AUX = {is}, OTH = the rest, the relaxed
/// interrogative constraints and a smoothed trigram LM trained on a handful of
/// sentences.
struct ToyWorld {
  Vocabulary vocab;
  CategoryPartition partition;
  std::unique_ptr<NGramModel> lm;
  std::unique_ptr<ConstraintSet> constraints;
  SoftScorerPtr soft;
  std::unique_ptr<Target> target;
  std::size_t max_len = 3;

  Sentence sentence(std::string_view text) const { return tokenize(text, vocab); }
};

struct ToyOptions {
  double beta = 0.3;
  std::size_t max_len = 3;
  bool sentiment = false;  // multiply in a lexicon sentiment score
};

std::unique_ptr<ToyWorld> make_toy_world(const ToyOptions& options = {});

/// Every sentence over the vocabulary with length in [min_len, max_len].
std::vector<Sentence> all_sentences(const Vocabulary& vocab, std::size_t min_len, std::size_t max_len);

}  // namespace tsmh::testing
