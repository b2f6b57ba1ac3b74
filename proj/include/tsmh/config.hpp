#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsmh/cgmh.hpp"
#include "tsmh/lm.hpp"
#include "tsmh/logic.hpp"
#include "tsmh/soft.hpp"

namespace tsmh {

enum class TaskKind { Interrogative, Imperative, Sentiment, Custom };
enum class Method { Tsmh, Cgmh };

std::string_view to_string(TaskKind kind);
std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct ChainSpec {
  Method method = Method::Tsmh;
  std::size_t k = 3;
  std::optional<std::size_t> steps;  // unset: 100 for TSMH, 300 for CGMH
  double beta = 1e-10;
  std::uint64_t seed = 1;
  std::size_t max_len = 16;
  std::string pad = ".";
  std::size_t min_len = 0;  // initial-state padding target; 0 means max(2, k)
  std::optional<std::string> initial;  // starting text instead of the keywords
  CgmhOptions cgmh;

  std::size_t steps_for(Method m) const { return steps ? *steps : (m == Method::Tsmh ? 100 : 300); }
  std::size_t initial_min_len() const { return min_len ? min_len : std::max<std::size_t>(2, k); }
};

struct LmSpec {
  std::string backend = "ngram";  // ngram | bridge
  std::filesystem::path model;    // trained n-gram file
  std::filesystem::path corpus;   // or train at startup from this corpus
  std::size_t order = 3;
  double add_k = NGramModel::kDefaultAddK;
  std::string url;
};

struct SoftSpec {
  std::optional<std::string> similarity_reference;
  std::filesystem::path embeddings;
  SimilarityMode similarity_mode = SimilarityMode::Avg;
  std::string sentiment_backend;  // "", lexicon, bridge
  std::filesystem::path sentiment_lexicon;
  SentimentTarget sentiment_target = SentimentTarget::Positive;
};

struct TaskSpec {
  TaskKind kind = TaskKind::Interrogative;
  std::vector<std::string> keywords;
  bool strict = false;
  bool keyword_once = false;
  std::filesystem::path vocab;
  std::filesystem::path categories;
  std::filesystem::path pos_lexicon;
  std::vector<std::string> formulas;
  ChainSpec chain;
  LmSpec lm;
  SoftSpec soft;
  std::uint64_t config_hash = 0;  // FNV-1a of the config file bytes

  /// Fully resolved spec, defaults included.
  nlohmann::ordered_json to_json() const;
};

/// Parses TOML text. Relative paths resolve against base_dir. Throws
/// ConfigError naming the offending key on unknown keys, type errors, bad
/// values, or missing referenced files.
TaskSpec parse_config(std::string_view text, const std::filesystem::path& base_dir);
TaskSpec validate_config(const std::filesystem::path& path);

/// Category partition from a POS lexicon (word<TAB>TAGS): VERB, ADV, OTH
/// residual. The first of VERB/ADV among a word's tags decides.
CategoryPartition pos_partition(const std::filesystem::path& lexicon, const Vocabulary& vocab);

/// Everything a chain needs for one keyword set. Heap-allocated so the
/// partition and constraints keep stable addresses for Target.
struct Task {
  CategoryPartition partition;
  ConstraintSet constraints;
  SoftScorerPtr soft;
  std::vector<TokenId> keywords;
};

/// Shared, read-only resources of a config.
struct TaskResources {
  std::shared_ptr<const Vocabulary> vocab;
  std::shared_ptr<const CategoryPartition> base_partition;
  std::shared_ptr<const LmBackend> lm;
  std::shared_ptr<const SentimentBackend> sentiment;
  std::shared_ptr<const EmbeddingTable> embeddings;
};

/// lm_override uses the CLI syntax ngram:<path> or bridge:<url>.
TaskResources load_resources(const TaskSpec& spec, const std::string& lm_override = "");

/// Builds the partition, constraints and soft scorer for one keyword set.
/// Throws InputError when a keyword is out of vocabulary.
std::unique_ptr<Task> build_task(const TaskSpec& spec, const TaskResources& res, const std::vector<std::string>& keywords);

}  // namespace tsmh
