#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "tsmh/vocab.hpp"

namespace tsmh {

/// word2vec-text embeddings restricted to a vocabulary.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  /// Accepts an optional "count dim" header line. Words outside the vocabulary
  /// are ignored. Throws InputError on ragged rows or non-finite values.
  static EmbeddingTable load(const std::filesystem::path& path, const Vocabulary& vocab);

  void add(TokenId token, std::vector<float> vector);
  const std::vector<float>* find(TokenId token) const;
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<TokenId, std::vector<float>> vectors_;
};

enum class SimilarityMode { Min, Avg };

/// For each embedded word of x, the best cosine against the embedded words of y,
/// mapped from [-1, 1] to [0, 1]; aggregated by min or mean. Words without a
/// (non-zero) embedding are skipped; no usable pair gives 0.
double similarity_score(const Sentence& x, const Sentence& y, const EmbeddingTable& emb, SimilarityMode mode);

/// Positive-sentiment probability of a sentence.
class SentimentBackend {
 public:
  virtual ~SentimentBackend() = default;
  virtual double positive(const Sentence& x) const = 0;
};

/// logistic(sum of word polarities / sqrt(m)).
class LexiconSentiment final : public SentimentBackend {
 public:
  LexiconSentiment() = default;
  /// word<TAB>polarity per line; unknown words are ignored.
  static LexiconSentiment load(const std::filesystem::path& path, const Vocabulary& vocab);
  void set(TokenId token, double polarity) { polarity_[token] = polarity; }
  double positive(const Sentence& x) const override;

 private:
  std::unordered_map<TokenId, double> polarity_;
};

/// Soft constraint: maps a sentence into [0, 1].
class SoftScorer {
 public:
  virtual ~SoftScorer() = default;
  virtual double score(const Sentence& x) const = 0;
};

using SoftScorerPtr = std::shared_ptr<const SoftScorer>;

class ConstantScorer final : public SoftScorer {
 public:
  explicit ConstantScorer(double value = 1.0);
  double score(const Sentence&) const override { return value_; }

 private:
  double value_;
};

class SimilarityScorer final : public SoftScorer {
 public:
  SimilarityScorer(Sentence reference, std::shared_ptr<const EmbeddingTable> embeddings, SimilarityMode mode);
  double score(const Sentence& x) const override;

 private:
  Sentence reference_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  SimilarityMode mode_;
};

enum class SentimentTarget { Positive, Negative };

class SentimentScorer final : public SoftScorer {
 public:
  SentimentScorer(std::shared_ptr<const SentimentBackend> backend, SentimentTarget target);
  double score(const Sentence& x) const override;

 private:
  std::shared_ptr<const SentimentBackend> backend_;
  SentimentTarget target_;
};

/// Product of member scores; empty means the constant 1.
class ProductScorer final : public SoftScorer {
 public:
  explicit ProductScorer(std::vector<SoftScorerPtr> members) : members_(std::move(members)) {}
  double score(const Sentence& x) const override;

 private:
  std::vector<SoftScorerPtr> members_;
};

SoftScorerPtr compose(std::vector<SoftScorerPtr> scorers);

}  // namespace tsmh
