#include "tsmh/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "tsmh/errors.hpp"

namespace tsmh {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_terminal_punct(char c) { return c == '.' || c == '?' || c == '!' || c == ',' || c == ';' || c == ':'; }

}  // namespace

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
  if (words.empty()) throw InputError("vocabulary is empty");
  Vocabulary v;
  v.words_.reserve(words.size() + 1);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string& w = words[i];
    if (w.empty()) throw InputError("empty token at line " + std::to_string(i + 1));
    if (!v.index_.emplace(w, static_cast<TokenId>(v.words_.size())).second)
      throw InputError("duplicate token '" + w + "' at line " + std::to_string(i + 1));
    v.words_.push_back(w);
  }
  if (auto m = v.find(kMaskToken)) {
    v.mask_ = *m;
  } else {
    v.mask_ = static_cast<TokenId>(v.words_.size());
    v.index_.emplace(std::string(kMaskToken), v.mask_);
    v.words_.emplace_back(kMaskToken);
    v.mask_appended_ = true;
  }
  if (v.words_.size() == 1) throw InputError("vocabulary has no tokens besides the mask");
  return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vocabulary file " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    words.push_back(line);
  }
  // A trailing newline produces no extra entry with getline; blank lines are errors.
  if (words.empty()) throw InputError("vocabulary file " + path.string() + " is empty");
  return from_words(words);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write vocabulary file " + path.string());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (mask_appended_ && i == mask_) continue;
    out << words_[i] << '\n';
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view word) const {
  if (auto id = find(word)) return *id;
  throw InputError("token '" + std::string(word) + "' is not in the vocabulary");
}

std::vector<TokenId> Vocabulary::real_ids() const {
  std::vector<TokenId> ids;
  ids.reserve(word_count());
  for (TokenId i = 0; i < words_.size(); ++i)
    if (i != mask_) ids.push_back(i);
  return ids;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& w : words_) {
    for (unsigned char c : w) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  }
  return h;
}

std::size_t SentenceHash::operator()(const std::vector<TokenId>& tokens) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ tokens.size();
  for (TokenId t : tokens) {
    h ^= t + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

std::size_t SentenceHash::operator()(const Sentence& s) const noexcept { return (*this)(s.tokens); }

void validate_sentence(const Sentence& x, const Vocabulary& vocab, std::size_t max_len) {
  if (x.tokens.empty()) throw InputError("sentence is empty");
  if (x.tokens.size() > max_len)
    throw InputError("sentence length " + std::to_string(x.tokens.size()) + " exceeds max_len " +
                     std::to_string(max_len));
  for (TokenId t : x.tokens) {
    if (t >= vocab.size()) throw InputError("token id out of range");
    if (t == vocab.mask()) throw InputError("sentence contains the mask placeholder");
  }
}

Sentence tokenize(std::string_view text, const Vocabulary& vocab) {
  std::istringstream in{std::string(text)};
  std::string raw;
  Sentence out;
  std::vector<std::string> missing;
  const auto unk = vocab.find(Vocabulary::kUnkToken);
  auto push = [&](const std::string& tok) {
    if (auto id = vocab.find(tok); id && *id != vocab.mask()) {
      out.tokens.push_back(*id);
    } else if (unk) {
      out.tokens.push_back(*unk);
    } else {
      missing.push_back(tok);
    }
  };
  while (in >> raw) {
    std::string tok = lowercase(raw);
    if (tok.size() > 1 && is_terminal_punct(tok.back()) && !vocab.find(tok)) {
      const std::string head = tok.substr(0, tok.size() - 1);
      const std::string punct(1, tok.back());
      if (vocab.find(head) && vocab.find(punct)) {
        push(head);
        push(punct);
        continue;
      }
    }
    push(tok);
  }
  if (!missing.empty()) {
    std::string msg = "out-of-vocabulary tokens:";
    for (const auto& m : missing) msg += " '" + m + "'";
    throw InputError(msg);
  }
  return out;
}

std::string detokenize(const Sentence& x, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < x.tokens.size(); ++i) {
    if (i) out += ' ';
    out += vocab.word(x.tokens[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

void CategoryPartition::reindex() {
  std::fill(of_token_.begin(), of_token_.end(), kNoCategory);
  for (CategoryId c = 0; c < categories_.size(); ++c) {
    for (TokenId t : categories_[c].members) {
      if (of_token_[t] != kNoCategory)
        throw InputError("word id " + std::to_string(t) + " claimed by both '" + categories_[of_token_[t]].name +
                         "' and '" + categories_[c].name + "'");
      of_token_[t] = c;
    }
  }
}

CategoryPartition CategoryPartition::from_lists(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& lists, const std::string& residual_name,
    const Vocabulary& vocab) {
  CategoryPartition p;
  p.mask_ = vocab.mask();
  p.of_token_.assign(vocab.size(), kNoCategory);
  std::vector<std::string> owner(vocab.size());
  for (const auto& [name, members] : lists) {
    if (p.find(name)) throw InputError("duplicate category name '" + name + "'");
    Category cat{name, {}, false};
    for (const auto& w : members) {
      auto id = vocab.find(w);
      if (!id || *id == vocab.mask())
        throw InputError("category '" + name + "' member '" + w + "' is not in the vocabulary");
      if (!owner[*id].empty() && owner[*id] != name)
        throw InputError("word '" + w + "' claimed by both '" + owner[*id] + "' and '" + name + "'");
      owner[*id] = name;
      cat.members.push_back(*id);
    }
    std::sort(cat.members.begin(), cat.members.end());
    cat.members.erase(std::unique(cat.members.begin(), cat.members.end()), cat.members.end());
    p.categories_.push_back(std::move(cat));
  }
  if (!residual_name.empty()) {
    if (p.find(residual_name)) throw InputError("duplicate category name '" + residual_name + "'");
    Category res{residual_name, {}, true};
    for (TokenId t = 0; t < vocab.size(); ++t)
      if (t != vocab.mask() && owner[t].empty()) res.members.push_back(t);
    p.residual_ = static_cast<CategoryId>(p.categories_.size());
    p.categories_.push_back(std::move(res));
  }
  p.reindex();
  p.check_axioms();
  return p;
}

CategoryPartition CategoryPartition::from_json(const nlohmann::json& spec, const Vocabulary& vocab) {
  if (!spec.is_object() || !spec.contains("categories") || !spec["categories"].is_array())
    throw InputError("category spec must be an object with a 'categories' array");
  for (auto it = spec.begin(); it != spec.end(); ++it)
    if (it.key() != "categories") throw InputError("category spec: unknown key '" + it.key() + "'");

  std::vector<std::pair<std::string, std::vector<std::string>>> lists;
  std::string residual;
  std::size_t residual_index = 0;
  std::size_t index = 0;
  for (const auto& entry : spec["categories"]) {
    const std::string where = "categories[" + std::to_string(index) + "]";
    if (!entry.is_object()) throw InputError(where + ": expected an object");
    for (auto it = entry.begin(); it != entry.end(); ++it)
      if (it.key() != "name" && it.key() != "members" && it.key() != "residual")
        throw InputError(where + ": unknown key '" + it.key() + "'");
    if (!entry.contains("name") || !entry["name"].is_string()) throw InputError(where + ".name: expected a string");
    const std::string name = entry["name"].get<std::string>();
    const bool is_residual = entry.contains("residual") && entry["residual"].is_boolean() && entry["residual"].get<bool>();
    if (is_residual) {
      if (!residual.empty()) throw InputError(where + ": more than one residual category");
      if (entry.contains("members")) throw InputError(where + ": residual category cannot list members");
      residual = name;
      residual_index = index;
    } else {
      if (!entry.contains("members") || !entry["members"].is_array())
        throw InputError(where + ".members: expected an array of strings");
      std::vector<std::string> members;
      for (const auto& m : entry["members"]) {
        if (!m.is_string()) throw InputError(where + ".members: expected strings");
        members.push_back(m.get<std::string>());
      }
      lists.emplace_back(name, std::move(members));
    }
    ++index;
  }
  CategoryPartition p = from_lists(lists, residual, vocab);
  // Restore the residual to its declared position.
  if (!residual.empty() && residual_index < lists.size()) {
    Category res = std::move(p.categories_.back());
    p.categories_.pop_back();
    p.categories_.insert(p.categories_.begin() + static_cast<std::ptrdiff_t>(residual_index), std::move(res));
    p.residual_ = static_cast<CategoryId>(residual_index);
    p.reindex();
  }
  p.check_axioms();
  return p;
}

CategoryPartition CategoryPartition::load(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open category spec " + path.string());
  nlohmann::json spec;
  try {
    in >> spec;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("category spec " + path.string() + ": " + e.what());
  }
  return from_json(spec, vocab);
}

CategoryPartition CategoryPartition::with_keyword(TokenId keyword, std::string_view word) const {
  const std::string name = keyword_category_name(word);
  const CategoryId current = category_of(keyword);
  if (categories_[current].name == name) return *this;
  if (find(name)) throw InputError("category '" + name + "' already exists with different members");

  CategoryPartition p = *this;
  auto& members = p.categories_[current].members;
  members.erase(std::find(members.begin(), members.end(), keyword));
  const std::size_t insert_at = residual_ == kNoCategory ? p.categories_.size() : residual_;
  p.categories_.insert(p.categories_.begin() + static_cast<std::ptrdiff_t>(insert_at), Category{name, {keyword}, false});
  if (residual_ != kNoCategory) p.residual_ = residual_ + 1;
  p.reindex();
  p.check_axioms();
  return p;
}

std::optional<CategoryId> CategoryPartition::find(std::string_view name) const {
  for (CategoryId c = 0; c < categories_.size(); ++c)
    if (categories_[c].name == name) return c;
  return std::nullopt;
}

CategoryId CategoryPartition::category_of(TokenId token) const {
  if (token >= of_token_.size()) throw InputError("token id out of range");
  if (token == mask_) throw InputError("the mask placeholder has no category");
  const CategoryId c = of_token_[token];
  if (c == kNoCategory) throw InputError("token id " + std::to_string(token) + " is not covered by any category");
  return c;
}

std::vector<CategoryId> CategoryPartition::nonempty() const {
  std::vector<CategoryId> out;
  for (CategoryId c = 0; c < categories_.size(); ++c)
    if (!categories_[c].members.empty()) out.push_back(c);
  return out;
}

void CategoryPartition::check_axioms() const {
  std::vector<int> seen(of_token_.size(), 0);
  std::size_t residuals = 0;
  for (CategoryId c = 0; c < categories_.size(); ++c) {
    if (categories_[c].residual) ++residuals;
    for (TokenId t : categories_[c].members) {
      if (t >= seen.size()) throw InputError("category '" + categories_[c].name + "' has an out-of-range member");
      if (t == mask_) throw InputError("category '" + categories_[c].name + "' contains the mask placeholder");
      if (++seen[t] > 1) throw InputError("categories overlap on token id " + std::to_string(t));
      if (of_token_[t] != c) throw InputError("category index is stale for token id " + std::to_string(t));
    }
  }
  if (residuals > 1) throw InputError("more than one residual category");
  for (TokenId t = 0; t < seen.size(); ++t)
    if (t != mask_ && seen[t] != 1) throw InputError("token id " + std::to_string(t) + " is not covered by any category");
}

}  // namespace tsmh
