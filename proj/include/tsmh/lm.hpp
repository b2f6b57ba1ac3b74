#pragma once

#include <cstdint>
#include <array>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "tsmh/vocab.hpp"

namespace tsmh {

/// Language-model scoring contract used by the sampler.
class LmBackend {
 public:
  virtual ~LmBackend() = default;

  /// Unnormalized sentence log-score (pseudo-log-likelihood). Comparable only
  /// between sentences scored by the same backend.
  virtual double sentence_logscore(std::span<const TokenId> tokens) const = 0;

  /// log P(candidate at mask_index | rest), normalized over `candidates`.
  /// tokens[mask_index] must be the mask. Other mask tokens are treated as
  /// unknown context. Throws std::invalid_argument for an empty candidate set.
  virtual std::vector<double> fill_logprobs(std::span<const TokenId> tokens, std::size_t mask_index,
                                            std::span<const TokenId> candidates) const = 0;
};

/// Add-k smoothed n-gram model with backoff to shorter histories when a
/// history was never observed:
///
///   P(w | h) = (c(h, w) + k) / (c(h) + k |U|)     if c(h) > 0 or |h| = 0
///            = P(w | h minus its oldest symbol)   otherwise
///
/// The outcome set U is every vocabulary word plus end-of-sentence, so
/// |U| == vocab.size() (the mask is never predicted). Sentences are padded with
/// order-1 start symbols.
///
/// Sentence scores are pseudo-likelihoods: each position's conditional given
/// the rest of the sentence is the product of the n-gram windows covering it,
/// renormalized over the vocabulary words.
class NGramModel final : public LmBackend {
 public:
  static constexpr double kDefaultAddK = 0.01;
  static constexpr std::size_t kMaxOrder = 4;

  /// Untrained model: every conditional is uniform over U.
  NGramModel(const Vocabulary& vocab, std::size_t order, double add_k = kDefaultAddK);

  static NGramModel train(const std::vector<Sentence>& corpus, std::size_t order, const Vocabulary& vocab,
                          double add_k = kDefaultAddK);
  /// One sentence per line; blank lines skipped. Throws InputError on OOV
  /// tokens (with line number) or when no sentence is found.
  static NGramModel train(const std::filesystem::path& corpus, std::size_t order, const Vocabulary& vocab,
                          double add_k = kDefaultAddK);

  void save(const std::filesystem::path& path) const;
  /// Throws BackendError on bad magic/version or a vocabulary mismatch.
  static NGramModel load(const std::filesystem::path& path, const Vocabulary& vocab);

  std::size_t order() const { return order_; }
  double add_k() const { return add_k_; }
  std::size_t outcome_count() const { return outcomes_; }
  std::uint32_t bos() const { return bos_; }
  std::uint32_t eos() const { return eos_; }

  /// log P(outcome | history); only the last order-1 history symbols are used,
  /// missing ones count as start symbols.
  double log_prob(std::span<const std::uint32_t> history, std::uint32_t outcome) const;

  double sentence_logscore(std::span<const TokenId> tokens) const override;
  std::vector<double> fill_logprobs(std::span<const TokenId> tokens, std::size_t mask_index,
                                    std::span<const TokenId> candidates) const override;

  bool operator==(const NGramModel& other) const;

 private:
  using Table = std::unordered_map<std::uint64_t, std::uint32_t>;

  void add_sentence(const Sentence& s);
  std::uint64_t count(const Table& table, std::uint64_t key) const;
  /// Sum of log-probs of every window covering `pos` in the padded sequence,
  /// with `candidate` placed at `pos`. Windows touching another mask are skipped.
  double window_score(std::span<const std::uint32_t> padded, std::size_t pos, std::uint32_t candidate) const;
  std::vector<std::uint32_t> pad(std::span<const TokenId> tokens) const;
  /// log sum over words of window_score at `pos`, memoized by the surrounding context.
  double normalizer(std::span<const std::uint32_t> padded, std::size_t pos) const;

  struct ContextKey {
    std::array<std::uint32_t, 2 * (kMaxOrder - 1)> symbols{};
    bool operator==(const ContextKey&) const = default;
  };
  struct ContextKeyHash {
    std::size_t operator()(const ContextKey& k) const noexcept;
  };
  struct NormalizerCache {
    std::mutex mutex;
    std::unordered_map<ContextKey, double, ContextKeyHash> values;
  };

  std::size_t order_;
  double add_k_;
  std::uint64_t vocab_fingerprint_;
  std::size_t vocab_size_;
  std::uint32_t mask_;
  std::uint32_t bos_;
  std::uint32_t eos_;
  std::size_t outcomes_;
  std::vector<TokenId> words_;
  std::uint64_t total_ = 0;
  std::vector<Table> grams_;     // grams_[k]: counts of k-grams, k = 1..order
  std::vector<Table> contexts_;  // contexts_[k]: counts of (k-1)-gram histories followed by anything
  std::shared_ptr<NormalizerCache> cache_ = std::make_shared<NormalizerCache>();
};

}  // namespace tsmh
