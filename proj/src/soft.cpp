#include "tsmh/soft.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tsmh/errors.hpp"

namespace tsmh {

namespace {

double clamp01(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, 0.0, 1.0);
}

double norm(const std::vector<float>& v) {
  double s = 0.0;
  for (float f : v) s += static_cast<double>(f) * f;
  return std::sqrt(s);
}

}  // namespace

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embedding file " + path.string());
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<float> values;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        const float v = std::stof(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        values.push_back(v);
      } catch (const std::exception&) {
        throw InputError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
    }
    if (line_no == 1 && values.size() == 1 && word.find_first_not_of("0123456789") == std::string::npos) continue;
    if (values.empty()) throw InputError(path.string() + ":" + std::to_string(line_no) + ": missing vector");
    if (table.dimension_ == 0) table.dimension_ = values.size();
    if (values.size() != table.dimension_)
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.dimension_) + " values, found " + std::to_string(values.size()));
    for (float v : values)
      if (!std::isfinite(v)) throw InputError(path.string() + ":" + std::to_string(line_no) + ": non-finite value");
    if (auto id = vocab.find(word); id && *id != vocab.mask()) table.vectors_[*id] = std::move(values);
  }
  return table;
}

void EmbeddingTable::add(TokenId token, std::vector<float> vector) {
  if (dimension_ == 0) dimension_ = vector.size();
  if (vector.size() != dimension_) throw InputError("embedding dimension mismatch");
  for (float v : vector)
    if (!std::isfinite(v)) throw InputError("non-finite embedding value");
  vectors_[token] = std::move(vector);
}

const std::vector<float>* EmbeddingTable::find(TokenId token) const {
  auto it = vectors_.find(token);
  return it == vectors_.end() ? nullptr : &it->second;
}

double similarity_score(const Sentence& x, const Sentence& y, const EmbeddingTable& emb, SimilarityMode mode) {
  struct Unit {
    const std::vector<float>* v;
    double n;
  };
  auto usable = [&](const Sentence& s) {
    std::vector<Unit> out;
    for (TokenId t : s.tokens) {
      const auto* v = emb.find(t);
      if (!v) continue;
      const double n = norm(*v);
      if (n > 0.0) out.push_back({v, n});
    }
    return out;
  };
  const auto xs = usable(x);
  const auto ys = usable(y);
  if (xs.empty() || ys.empty()) return 0.0;

  double agg = mode == SimilarityMode::Min ? 1.0 : 0.0;
  for (const Unit& a : xs) {
    double best = -1.0;
    for (const Unit& b : ys) {
      double dot = 0.0;
      for (std::size_t i = 0; i < a.v->size(); ++i) dot += static_cast<double>((*a.v)[i]) * (*b.v)[i];
      best = std::max(best, std::clamp(dot / (a.n * b.n), -1.0, 1.0));
    }
    const double mapped = (best + 1.0) / 2.0;
    if (mode == SimilarityMode::Min)
      agg = std::min(agg, mapped);
    else
      agg += mapped;
  }
  if (mode == SimilarityMode::Avg) agg /= static_cast<double>(xs.size());
  return clamp01(agg);
}

LexiconSentiment LexiconSentiment::load(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open sentiment lexicon " + path.string());
  LexiconSentiment lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected word<TAB>polarity");
    double polarity = 0.0;
    try {
      polarity = std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": bad polarity");
    }
    if (!std::isfinite(polarity)) throw InputError(path.string() + ":" + std::to_string(line_no) + ": bad polarity");
    if (auto id = vocab.find(line.substr(0, tab))) lex.set(*id, polarity);
  }
  return lex;
}

double LexiconSentiment::positive(const Sentence& x) const {
  if (x.tokens.empty()) return 0.5;
  double sum = 0.0;
  for (TokenId t : x.tokens)
    if (auto it = polarity_.find(t); it != polarity_.end()) sum += it->second;
  const double z = sum / std::sqrt(static_cast<double>(x.tokens.size()));
  return 1.0 / (1.0 + std::exp(-z));
}

ConstantScorer::ConstantScorer(double value) : value_(clamp01(value)) {}

SimilarityScorer::SimilarityScorer(Sentence reference, std::shared_ptr<const EmbeddingTable> embeddings,
                                   SimilarityMode mode)
    : reference_(std::move(reference)), embeddings_(std::move(embeddings)), mode_(mode) {
  if (!embeddings_) throw ConfigError("similarity scorer needs an embedding table");
}

double SimilarityScorer::score(const Sentence& x) const {
  return similarity_score(x, reference_, *embeddings_, mode_);
}

SentimentScorer::SentimentScorer(std::shared_ptr<const SentimentBackend> backend, SentimentTarget target)
    : backend_(std::move(backend)), target_(target) {
  if (!backend_) throw ConfigError("sentiment scorer needs a backend");
}

double SentimentScorer::score(const Sentence& x) const {
  const double p = clamp01(backend_->positive(x));
  return target_ == SentimentTarget::Positive ? p : 1.0 - p;
}

double ProductScorer::score(const Sentence& x) const {
  double acc = 1.0;
  for (const auto& m : members_) acc *= m->score(x);
  return clamp01(acc);
}

SoftScorerPtr compose(std::vector<SoftScorerPtr> scorers) {
  if (scorers.empty()) return std::make_shared<ConstantScorer>(1.0);
  if (scorers.size() == 1) return scorers.front();
  return std::make_shared<ProductScorer>(std::move(scorers));
}

}  // namespace tsmh
