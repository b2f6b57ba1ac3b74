#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace tsmh {

using TokenId = std::uint32_t;
using CategoryId = std::uint32_t;

inline constexpr CategoryId kNoCategory = std::numeric_limits<CategoryId>::max();

/// Ordered set of unique lowercase tokens with dense ids. Always contains the
/// reserved mask placeholder, which never appears in a sentence.
class Vocabulary {
 public:
  static constexpr std::string_view kMaskToken = "[MASK]";
  static constexpr std::string_view kUnkToken = "<unk>";

  /// Ids follow input order; the mask is appended when absent.
  /// Throws InputError on duplicates or an empty word list.
  static Vocabulary from_words(const std::vector<std::string>& words);
  static Vocabulary load(const std::filesystem::path& path);

  /// Writes one token per line, omitting the mask when it was appended.
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return words_.size(); }
  /// Number of real (non-mask) tokens.
  std::size_t word_count() const { return words_.size() - 1; }
  TokenId mask() const { return mask_; }
  bool mask_appended() const { return mask_appended_; }

  std::optional<TokenId> find(std::string_view word) const;
  /// Throws InputError for unknown words.
  TokenId id(std::string_view word) const;
  const std::string& word(TokenId id) const { return words_.at(id); }
  const std::vector<std::string>& words() const { return words_; }

  /// All ids except the mask, ascending.
  std::vector<TokenId> real_ids() const;

  /// FNV-1a over the ordered token list; identifies the vocabulary in model files.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId mask_ = 0;
  bool mask_appended_ = false;
};

/// A sentence is the MCMC state: a bounded sequence of non-mask token ids.
struct Sentence {
  std::vector<TokenId> tokens;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
  auto operator<=>(const Sentence&) const = default;
};

struct SentenceHash {
  std::size_t operator()(const Sentence& s) const noexcept;
  std::size_t operator()(const std::vector<TokenId>& tokens) const noexcept;
};

/// Throws InputError unless 1 <= length <= max_len and no token is the mask or out of range.
void validate_sentence(const Sentence& x, const Vocabulary& vocab, std::size_t max_len);

/// Whitespace split + lowercase. A token with trailing punctuation that is not
/// itself in the vocabulary is split when both parts are. Throws InputError
/// listing every out-of-vocabulary token, unless the vocabulary defines "<unk>".
Sentence tokenize(std::string_view text, const Vocabulary& vocab);
std::string detokenize(const Sentence& x, const Vocabulary& vocab);

struct Category {
  std::string name;
  std::vector<TokenId> members;  // ascending
  bool residual = false;
};

/// Disjoint cover of the vocabulary (mask excluded) by named categories.
/// Names are stored without brackets ("QWH"); keyword singletons are "K:<word>".
class CategoryPartition {
 public:
  /// Builds from {"categories":[{"name":..,"members":[..]} | {"name":..,"residual":true}]}.
  static CategoryPartition from_json(const nlohmann::json& spec, const Vocabulary& vocab);
  static CategoryPartition load(const std::filesystem::path& path, const Vocabulary& vocab);
  /// Builds from explicit lists; the residual (if named) receives unclaimed words.
  static CategoryPartition from_lists(const std::vector<std::pair<std::string, std::vector<std::string>>>& lists,
                                      const std::string& residual_name, const Vocabulary& vocab);

  static std::string keyword_category_name(std::string_view keyword) { return "K:" + std::string(keyword); }

  /// Carves a singleton category for the keyword out of its current category,
  /// placed just before the residual. Idempotent.
  CategoryPartition with_keyword(TokenId keyword, std::string_view word) const;

  std::size_t size() const { return categories_.size(); }
  const Category& category(CategoryId c) const { return categories_.at(c); }
  const std::vector<Category>& categories() const { return categories_; }
  std::optional<CategoryId> find(std::string_view name) const;
  CategoryId residual() const { return residual_; }

  /// Throws InputError for the mask or an unknown id.
  CategoryId category_of(TokenId token) const;
  /// Unchecked lookup for hot loops; returns kNoCategory for the mask.
  CategoryId category_of_unchecked(TokenId token) const { return of_token_[token]; }

  /// Categories with at least one member, in partition order.
  std::vector<CategoryId> nonempty() const;

  /// Throws InputError when disjointness or coverage fails.
  void check_axioms() const;

  std::size_t vocab_size() const { return of_token_.size(); }
  TokenId mask() const { return mask_; }

 private:
  void reindex();

  std::vector<Category> categories_;
  std::vector<CategoryId> of_token_;
  CategoryId residual_ = kNoCategory;
  TokenId mask_ = 0;
};

}  // namespace tsmh
