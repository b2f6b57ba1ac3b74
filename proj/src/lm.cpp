#include "tsmh/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "tsmh/errors.hpp"
#include "tsmh/logmath.hpp"

namespace tsmh {

namespace {

constexpr char kMagic[11] = {'T', 'S', 'M', 'H', '-', 'N', 'G', 'R', 'A', 'M', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint64_t pack(std::span<const std::uint32_t> symbols) {
  std::uint64_t key = 0;
  for (std::uint32_t s : symbols) key = (key << 16) | s;
  return key;
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw BackendError("n-gram model file is truncated");
  return v;
}

}  // namespace

NGramModel::NGramModel(const Vocabulary& vocab, std::size_t order, double add_k)
    : order_(order),
      add_k_(add_k),
      vocab_fingerprint_(vocab.fingerprint()),
      vocab_size_(vocab.size()),
      mask_(vocab.mask()),
      bos_(static_cast<std::uint32_t>(vocab.size())),
      eos_(static_cast<std::uint32_t>(vocab.size() + 1)),
      outcomes_(vocab.size()),
      words_(vocab.real_ids()),
      grams_(order + 1),
      contexts_(order + 1) {
  if (order < 1 || order > kMaxOrder) throw ConfigError("n-gram order must be between 1 and 4");
  if (!(add_k > 0.0)) throw ConfigError("add-k constant must be positive");
  if (vocab.size() + 2 > 0xFFFF) throw ConfigError("vocabulary too large for the n-gram key encoding");
}

void NGramModel::add_sentence(const Sentence& s) {
  std::vector<std::uint32_t> seq = pad(s.tokens);
  for (std::size_t e = order_ - 1; e < seq.size(); ++e) {
    ++total_;
    for (std::size_t k = 1; k <= order_; ++k) {
      std::span<const std::uint32_t> gram(seq.data() + e + 1 - k, k);
      ++grams_[k][pack(gram)];
      if (k > 1) ++contexts_[k][pack(gram.first(k - 1))];
    }
  }
}

NGramModel NGramModel::train(const std::vector<Sentence>& corpus, std::size_t order, const Vocabulary& vocab,
                             double add_k) {
  if (corpus.empty()) throw InputError("training corpus is empty");
  NGramModel m(vocab, order, add_k);
  for (const auto& s : corpus) {
    for (TokenId t : s.tokens)
      if (t >= vocab.size() || t == vocab.mask()) throw InputError("corpus sentence contains an invalid token");
    m.add_sentence(s);
  }
  return m;
}

NGramModel NGramModel::train(const std::filesystem::path& corpus, std::size_t order, const Vocabulary& vocab,
                             double add_k) {
  std::ifstream in(corpus);
  if (!in) throw InputError("cannot open corpus " + corpus.string());
  std::vector<Sentence> sentences;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      sentences.push_back(tokenize(line, vocab));
    } catch (const InputError& e) {
      throw InputError(corpus.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (sentences.empty()) throw InputError("training corpus " + corpus.string() + " is empty");
  return train(sentences, order, vocab, add_k);
}

std::vector<std::uint32_t> NGramModel::pad(std::span<const TokenId> tokens) const {
  std::vector<std::uint32_t> seq(order_ - 1, bos_);
  seq.insert(seq.end(), tokens.begin(), tokens.end());
  seq.push_back(eos_);
  return seq;
}

std::uint64_t NGramModel::count(const Table& table, std::uint64_t key) const {
  auto it = table.find(key);
  return it == table.end() ? 0 : it->second;
}

double NGramModel::log_prob(std::span<const std::uint32_t> history, std::uint32_t outcome) const {
  std::uint32_t buf[kMaxOrder];
  const std::size_t h = order_ - 1;
  // Right-align the history, padding with start symbols.
  for (std::size_t i = 0; i < h; ++i) {
    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(history.size()) - static_cast<std::ptrdiff_t>(h) +
                               static_cast<std::ptrdiff_t>(i);
    buf[i] = src >= 0 ? history[static_cast<std::size_t>(src)] : bos_;
  }
  buf[h] = outcome;
  const double denom_k = add_k_ * static_cast<double>(outcomes_);
  for (std::size_t k = order_; k >= 1; --k) {
    std::span<const std::uint32_t> gram(buf + (order_ - k), k);
    const std::uint64_t ctx = k == 1 ? total_ : count(contexts_[k], pack(gram.first(k - 1)));
    if (k == 1 || ctx > 0) {
      const double c = static_cast<double>(count(grams_[k], pack(gram)));
      return std::log((c + add_k_) / (static_cast<double>(ctx) + denom_k));
    }
  }
  return kNegInf;  // unreachable
}

double NGramModel::window_score(std::span<const std::uint32_t> padded, std::size_t pos,
                                std::uint32_t candidate) const {
  double score = 0.0;
  std::uint32_t window[kMaxOrder];
  const std::size_t last_end = std::min(pos + order_ - 1, padded.size() - 1);
  for (std::size_t end = pos; end <= last_end; ++end) {
    const std::size_t begin = end + 1 - order_;
    bool blocked = false;
    for (std::size_t i = 0; i < order_; ++i) {
      const std::size_t at = begin + i;
      std::uint32_t sym = padded[at];
      if (at == pos) {
        sym = candidate;
      } else if (sym == mask_) {
        blocked = true;
        break;
      }
      window[i] = sym;
    }
    if (blocked) continue;
    score += log_prob(std::span<const std::uint32_t>(window, order_ - 1), window[order_ - 1]);
  }
  return score;
}

std::size_t NGramModel::ContextKeyHash::operator()(const ContextKey& k) const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint32_t s : k.symbols) h = (h ^ s) * 1099511628211ULL;
  return static_cast<std::size_t>(h);
}

double NGramModel::normalizer(std::span<const std::uint32_t> padded, std::size_t pos) const {
  // Everything window_score reads besides the candidate: order-1 symbols on
  // each side, with positions past the end marked absent.
  constexpr std::uint32_t kAbsent = 0xFFFFFFFFu;
  ContextKey key;
  key.symbols.fill(kAbsent);
  const std::size_t h = order_ - 1;
  for (std::size_t i = 0; i < h; ++i) {
    key.symbols[i] = padded[pos - h + i];
    const std::size_t right = pos + 1 + i;
    key.symbols[h + i] = right < padded.size() ? padded[right] : kAbsent;
  }
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->values.find(key); it != cache_->values.end()) return it->second;
  }
  std::vector<double> scores(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) scores[i] = window_score(padded, pos, words_[i]);
  const double z = log_sum_exp(scores);
  std::lock_guard lock(cache_->mutex);
  if (cache_->values.size() >= (1u << 20)) cache_->values.clear();
  cache_->values.emplace(key, z);
  return z;
}

double NGramModel::sentence_logscore(std::span<const TokenId> tokens) const {
  const std::vector<std::uint32_t> seq = pad(tokens);
  double total = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const std::size_t pos = t + order_ - 1;
    total += window_score(seq, pos, tokens[t]) - normalizer(seq, pos);
  }
  return total;
}

std::vector<double> NGramModel::fill_logprobs(std::span<const TokenId> tokens, std::size_t mask_index,
                                              std::span<const TokenId> candidates) const {
  if (candidates.empty()) throw std::invalid_argument("fill_logprobs: empty candidate set");
  if (mask_index >= tokens.size() || tokens[mask_index] != mask_)
    throw std::invalid_argument("fill_logprobs: mask_index does not point at the mask");
  const std::vector<std::uint32_t> seq = pad(tokens);
  const std::size_t pos = mask_index + order_ - 1;
  std::vector<double> out(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = window_score(seq, pos, candidates[i]);
  const double z = log_sum_exp(out);
  for (double& v : out) v -= z;
  return out;
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw BackendError("cannot write model file " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<std::uint32_t>(order_));
  write_pod(out, add_k_);
  write_pod(out, vocab_fingerprint_);
  write_pod(out, static_cast<std::uint64_t>(vocab_size_));
  write_pod(out, total_);
  auto dump = [&](const Table& table) {
    std::vector<std::pair<std::uint64_t, std::uint32_t>> entries(table.begin(), table.end());
    std::sort(entries.begin(), entries.end());
    write_pod(out, static_cast<std::uint64_t>(entries.size()));
    for (const auto& [k, v] : entries) {
      write_pod(out, k);
      write_pod(out, v);
    }
  };
  for (std::size_t k = 1; k <= order_; ++k) {
    dump(grams_[k]);
    dump(contexts_[k]);
  }
  if (!out) throw BackendError("failed writing model file " + path.string());
}

NGramModel NGramModel::load(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendError("cannot open model file " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw BackendError(path.string() + " is not a TSMH n-gram model");
  if (read_pod<std::uint32_t>(in) != kFormatVersion) throw BackendError("unsupported n-gram model version");
  const auto order = read_pod<std::uint32_t>(in);
  const auto add_k = read_pod<double>(in);
  const auto fingerprint = read_pod<std::uint64_t>(in);
  const auto vocab_size = read_pod<std::uint64_t>(in);
  if (fingerprint != vocab.fingerprint() || vocab_size != vocab.size())
    throw BackendError("model " + path.string() + " was trained on a different vocabulary");
  NGramModel m(vocab, order, add_k);
  m.total_ = read_pod<std::uint64_t>(in);
  auto slurp = [&](Table& table) {
    const auto n = read_pod<std::uint64_t>(in);
    table.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto k = read_pod<std::uint64_t>(in);
      table.emplace(k, read_pod<std::uint32_t>(in));
    }
  };
  for (std::size_t k = 1; k <= m.order_; ++k) {
    slurp(m.grams_[k]);
    slurp(m.contexts_[k]);
  }
  return m;
}

bool NGramModel::operator==(const NGramModel& o) const {
  return order_ == o.order_ && add_k_ == o.add_k_ && vocab_fingerprint_ == o.vocab_fingerprint_ &&
         total_ == o.total_ && grams_ == o.grams_ && contexts_ == o.contexts_;
}

}  // namespace tsmh
