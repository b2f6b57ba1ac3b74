#include "tsmh/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "tsmh/bridge.hpp"
#include "tsmh/errors.hpp"

namespace tsmh {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Interrogative:
      return "interrogative";
    case TaskKind::Imperative:
      return "imperative";
    case TaskKind::Sentiment:
      return "sentiment";
    case TaskKind::Custom:
      return "custom";
  }
  return "?";
}

std::string_view to_string(Method method) { return method == Method::Tsmh ? "tsmh" : "cgmh"; }

Method parse_method(std::string_view text) {
  if (text == "tsmh") return Method::Tsmh;
  if (text == "cgmh") return Method::Cgmh;
  throw ConfigError("unknown method '" + std::string(text) + "' (expected tsmh or cgmh)");
}

namespace {

/// Typed accessors over one TOML table that remember which keys were read.
class Section {
 public:
  Section(const toml::table* table, std::string path) : table_(table), path_(std::move(path)) {}

  bool present() const { return table_ != nullptr; }

  const toml::node* raw(const std::string& key) {
    known_.insert(key);
    return table_ ? table_->get(key) : nullptr;
  }

  std::optional<std::string> str(const std::string& key) {
    const auto* n = raw(key);
    if (!n) return std::nullopt;
    if (!n->is_string()) fail(key, "expected a string");
    return n->value<std::string>();
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const auto* n = raw(key);
    if (!n) return std::nullopt;
    if (!n->is_integer()) fail(key, "expected an integer");
    return n->value<std::int64_t>();
  }

  std::optional<std::size_t> count(const std::string& key, std::int64_t min) {
    auto v = integer(key);
    if (!v) return std::nullopt;
    if (*v < min) fail(key, "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(*v);
  }

  std::optional<double> number(const std::string& key) {
    const auto* n = raw(key);
    if (!n) return std::nullopt;
    if (!n->is_number()) fail(key, "expected a number");
    return n->value<double>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto* n = raw(key);
    if (!n) return std::nullopt;
    if (!n->is_boolean()) fail(key, "expected true or false");
    return n->value<bool>();
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) {
    const auto* n = raw(key);
    if (!n) return std::nullopt;
    const auto* arr = n->as_array();
    if (!arr) fail(key, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& item : *arr) {
      if (!item.is_string()) fail(key, "expected an array of strings");
      out.push_back(*item.value<std::string>());
    }
    return out;
  }

  /// Unknown keys are errors.
  void finish() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      if (!known_.contains(std::string(k.str())))
        throw ConfigError("unknown key '" + qualified(std::string(k.str())) + "'");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(qualified(key) + ": " + what);
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const toml::table* table_;
  std::string path_;
  std::set<std::string> known_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::filesystem::path existing_file(Section& s, const std::string& key, const std::filesystem::path& base,
                                    bool required) {
  auto v = s.str(key);
  if (!v) {
    if (required) s.fail(key, "is required");
    return {};
  }
  auto path = resolve(base, *v).lexically_normal();
  if (!std::filesystem::is_regular_file(path)) s.fail(key, "file not found: " + path.string());
  return path;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) h = (h ^ c) * 1099511628211ULL;
  return h;
}

}  // namespace

TaskSpec parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML syntax error at line " << e.source().begin.line << ", column " << e.source().begin.column << ": "
        << e.description();
    throw ConfigError(msg.str());
  }

  for (const auto& [k, v] : root) {
    const std::string key(k.str());
    if (key != "task" && key != "chain" && key != "lm" && key != "soft") throw ConfigError("unknown key '" + key + "'");
    if (!v.is_table()) throw ConfigError(key + ": expected a table");
  }

  TaskSpec spec;
  spec.config_hash = fnv1a(text);

  Section task(root["task"].as_table(), "task");
  if (!task.present()) throw ConfigError("missing [task] section");
  const auto kind = task.str("kind");
  if (!kind) task.fail("kind", "is required");
  if (*kind == "interrogative")
    spec.kind = TaskKind::Interrogative;
  else if (*kind == "imperative")
    spec.kind = TaskKind::Imperative;
  else if (*kind == "sentiment")
    spec.kind = TaskKind::Sentiment;
  else if (*kind == "custom")
    spec.kind = TaskKind::Custom;
  else
    task.fail("kind", "expected interrogative, imperative, sentiment or custom, got '" + *kind + "'");
  spec.keywords = task.strings("keywords").value_or(std::vector<std::string>{});
  spec.strict = task.boolean("strict").value_or(false);
  spec.keyword_once = task.boolean("keyword_once").value_or(false);
  spec.vocab = existing_file(task, "vocab", base_dir, true);
  const bool needs_categories = spec.kind == TaskKind::Interrogative || spec.kind == TaskKind::Custom;
  spec.categories = existing_file(task, "categories", base_dir, needs_categories);
  spec.pos_lexicon = existing_file(task, "pos_lexicon", base_dir, spec.kind == TaskKind::Imperative);
  spec.formulas = task.strings("formulas").value_or(std::vector<std::string>{});
  if (spec.kind == TaskKind::Custom && spec.formulas.empty() && spec.keywords.empty())
    task.fail("formulas", "a custom task needs formulas or keywords");
  if (spec.kind != TaskKind::Custom && !spec.formulas.empty())
    task.fail("formulas", "only allowed for kind = \"custom\"");
  for (const auto& f : spec.formulas) {
    try {
      parse_formula(f);
    } catch (const SyntaxError& e) {
      task.fail("formulas", e.what());
    }
  }
  task.finish();

  Section chain(root["chain"].as_table(), "chain");
  if (auto m = chain.str("method")) {
    try {
      spec.chain.method = parse_method(*m);
    } catch (const ConfigError& e) {
      chain.fail("method", e.what());
    }
  }
  spec.chain.k = chain.count("k", 1).value_or(spec.chain.k);
  spec.chain.steps = chain.count("steps", 1);
  if (auto b = chain.number("beta")) {
    if (!(*b > 0.0 && *b < 1.0)) chain.fail("beta", "must lie strictly between 0 and 1");
    spec.chain.beta = *b;
  }
  if (auto s = chain.integer("seed")) {
    if (*s < 0) chain.fail("seed", "must be non-negative");
    spec.chain.seed = static_cast<std::uint64_t>(*s);
  }
  spec.chain.max_len = chain.count("max_len", 1).value_or(spec.chain.max_len);
  spec.chain.pad = chain.str("pad").value_or(spec.chain.pad);
  spec.chain.min_len = chain.count("min_len", 1).value_or(0);
  if (spec.chain.min_len > spec.chain.max_len) chain.fail("min_len", "exceeds max_len");
  spec.chain.initial = chain.str("initial");
  spec.chain.cgmh.p_replace = chain.number("cgmh_replace").value_or(1.0);
  spec.chain.cgmh.p_insert = chain.number("cgmh_insert").value_or(1.0);
  spec.chain.cgmh.p_delete = chain.number("cgmh_delete").value_or(1.0);
  if (!(spec.chain.cgmh.p_replace > 0.0)) chain.fail("cgmh_replace", "must be positive");
  if (spec.chain.cgmh.p_insert < 0.0) chain.fail("cgmh_insert", "must be non-negative");
  if (spec.chain.cgmh.p_delete < 0.0) chain.fail("cgmh_delete", "must be non-negative");
  chain.finish();

  Section lm(root["lm"].as_table(), "lm");
  spec.lm.backend = lm.str("backend").value_or("ngram");
  if (spec.lm.backend != "ngram" && spec.lm.backend != "bridge")
    lm.fail("backend", "expected ngram or bridge, got '" + spec.lm.backend + "'");
  spec.lm.model = existing_file(lm, "model", base_dir, false);
  spec.lm.corpus = existing_file(lm, "corpus", base_dir, false);
  spec.lm.order = lm.count("order", 1).value_or(3);
  if (spec.lm.order > NGramModel::kMaxOrder) lm.fail("order", "must be at most 4");
  if (auto a = lm.number("add_k")) {
    if (!(*a > 0.0)) lm.fail("add_k", "must be positive");
    spec.lm.add_k = *a;
  }
  spec.lm.url = lm.str("url").value_or("");
  lm.finish();

  Section soft(root["soft"].as_table(), "soft");
  spec.soft.similarity_reference = soft.str("similarity_reference");
  spec.soft.embeddings = existing_file(soft, "embeddings", base_dir, spec.soft.similarity_reference.has_value());
  if (auto mode = soft.str("similarity_mode")) {
    if (*mode == "min")
      spec.soft.similarity_mode = SimilarityMode::Min;
    else if (*mode == "avg")
      spec.soft.similarity_mode = SimilarityMode::Avg;
    else
      soft.fail("similarity_mode", "expected min or avg");
  }
  spec.soft.sentiment_backend = soft.str("sentiment").value_or("");
  if (!spec.soft.sentiment_backend.empty() && spec.soft.sentiment_backend != "lexicon" &&
      spec.soft.sentiment_backend != "bridge")
    soft.fail("sentiment", "expected lexicon or bridge");
  spec.soft.sentiment_lexicon = existing_file(soft, "sentiment_lexicon", base_dir, spec.soft.sentiment_backend == "lexicon");
  if (auto target = soft.str("sentiment_target")) {
    if (*target == "positive")
      spec.soft.sentiment_target = SentimentTarget::Positive;
    else if (*target == "negative")
      spec.soft.sentiment_target = SentimentTarget::Negative;
    else
      soft.fail("sentiment_target", "expected positive or negative");
  }
  soft.finish();

  if (spec.kind == TaskKind::Sentiment && spec.soft.sentiment_backend.empty())
    throw ConfigError("soft.sentiment: required for kind = \"sentiment\"");
  return spec;
}

TaskSpec validate_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

nlohmann::ordered_json TaskSpec::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = {{"kind", tsmh::to_string(kind)},
               {"keywords", keywords},
               {"strict", strict},
               {"keyword_once", keyword_once},
               {"vocab", vocab.string()},
               {"categories", categories.string()},
               {"pos_lexicon", pos_lexicon.string()},
               {"formulas", formulas}};
  j["chain"] = {{"method", tsmh::to_string(chain.method)},
                {"k", chain.k},
                {"steps", chain.steps_for(chain.method)},
                {"beta", chain.beta},
                {"seed", chain.seed},
                {"max_len", chain.max_len},
                {"pad", chain.pad},
                {"min_len", chain.initial_min_len()},
                {"initial", chain.initial ? nlohmann::ordered_json(*chain.initial) : nlohmann::ordered_json(nullptr)},
                {"cgmh_replace", chain.cgmh.p_replace},
                {"cgmh_insert", chain.cgmh.p_insert},
                {"cgmh_delete", chain.cgmh.p_delete}};
  j["lm"] = {{"backend", lm.backend}, {"model", lm.model.string()}, {"corpus", lm.corpus.string()},
             {"order", lm.order},     {"add_k", lm.add_k},            {"url", lm.url}};
  j["soft"] = {{"similarity_reference",
                soft.similarity_reference ? nlohmann::ordered_json(*soft.similarity_reference) : nlohmann::ordered_json(nullptr)},
               {"embeddings", soft.embeddings.string()},
               {"similarity_mode", soft.similarity_mode == SimilarityMode::Min ? "min" : "avg"},
               {"sentiment", soft.sentiment_backend},
               {"sentiment_lexicon", soft.sentiment_lexicon.string()},
               {"sentiment_target", soft.sentiment_target == SentimentTarget::Positive ? "positive" : "negative"}};
  return j;
}

// ---------------------------------------------------------------------------

CategoryPartition pos_partition(const std::filesystem::path& lexicon, const Vocabulary& vocab) {
  std::ifstream in(lexicon);
  if (!in) throw InputError("cannot open POS lexicon " + lexicon.string());
  std::vector<std::string> verbs, adverbs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw InputError(lexicon.string() + ":" + std::to_string(line_no) + ": expected word<TAB>TAGS");
    const std::string word = line.substr(0, tab);
    if (!vocab.find(word)) continue;
    std::istringstream tags(line.substr(tab + 1));
    std::string tag;
    while (tags >> tag) {
      if (tag == "VERB") {
        verbs.push_back(word);
        break;
      }
      if (tag == "ADV") {
        adverbs.push_back(word);
        break;
      }
    }
  }
  return CategoryPartition::from_lists({{"VERB", verbs}, {"ADV", adverbs}}, "OTH", vocab);
}

TaskResources load_resources(const TaskSpec& spec, const std::string& lm_override) {
  TaskResources res;
  auto vocab = std::make_shared<Vocabulary>(Vocabulary::load(spec.vocab));
  res.vocab = vocab;

  switch (spec.kind) {
    case TaskKind::Interrogative:
    case TaskKind::Custom:
      res.base_partition = std::make_shared<CategoryPartition>(CategoryPartition::load(spec.categories, *vocab));
      break;
    case TaskKind::Imperative:
      res.base_partition = std::make_shared<CategoryPartition>(pos_partition(spec.pos_lexicon, *vocab));
      break;
    case TaskKind::Sentiment:
      res.base_partition = std::make_shared<CategoryPartition>(
          spec.categories.empty() ? CategoryPartition::from_lists({}, "OTH", *vocab)
                                  : CategoryPartition::load(spec.categories, *vocab));
      break;
  }

  std::string backend = spec.lm.backend;
  std::string target = backend == "bridge" ? spec.lm.url : spec.lm.model.string();
  if (!lm_override.empty()) {
    const auto colon = lm_override.find(':');
    if (colon == std::string::npos) throw ConfigError("--lm expects ngram:<path> or bridge:<url>");
    backend = lm_override.substr(0, colon);
    target = lm_override.substr(colon + 1);
    if (backend != "ngram" && backend != "bridge") throw ConfigError("--lm expects ngram:<path> or bridge:<url>");
  }

  std::shared_ptr<BridgeClient> client;
  auto bridge_client = [&](const std::string& url) {
    if (!client) client = std::make_shared<BridgeClient>(url);
    return client;
  };

  if (backend == "bridge") {
    if (target.empty()) throw ConfigError("lm.url: required for the bridge backend");
    res.lm = std::make_shared<BridgeLm>(bridge_client(target), *vocab);
  } else if (!target.empty()) {
    res.lm = std::make_shared<NGramModel>(NGramModel::load(target, *vocab));
  } else if (!spec.lm.corpus.empty()) {
    res.lm = std::make_shared<NGramModel>(NGramModel::train(spec.lm.corpus, spec.lm.order, *vocab, spec.lm.add_k));
  } else {
    throw ConfigError("lm: set model or corpus for the ngram backend");
  }

  if (spec.soft.sentiment_backend == "lexicon") {
    res.sentiment = std::make_shared<LexiconSentiment>(LexiconSentiment::load(spec.soft.sentiment_lexicon, *vocab));
  } else if (spec.soft.sentiment_backend == "bridge") {
    const std::string url = backend == "bridge" ? target : spec.lm.url;
    if (url.empty()) throw ConfigError("soft.sentiment = \"bridge\" needs lm.url");
    res.sentiment = std::make_shared<BridgeSentiment>(bridge_client(url), *vocab);
  }
  if (spec.soft.similarity_reference)
    res.embeddings = std::make_shared<EmbeddingTable>(EmbeddingTable::load(spec.soft.embeddings, *vocab));
  return res;
}

std::unique_ptr<Task> build_task(const TaskSpec& spec, const TaskResources& res,
                                 const std::vector<std::string>& keywords) {
  const Vocabulary& vocab = *res.vocab;
  if (keywords.empty() && spec.kind != TaskKind::Custom && spec.kind != TaskKind::Imperative)
    throw InputError("task kind " + std::string(to_string(spec.kind)) + " needs at least one keyword");

  std::vector<std::string> missing;
  std::vector<TokenId> ids;
  for (const auto& w : keywords) {
    auto id = vocab.find(w);
    if (!id || *id == vocab.mask())
      missing.push_back(w);
    else
      ids.push_back(*id);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& w : missing) list += (list.empty() ? "" : ", ") + w;
    throw InputError("out-of-vocabulary keywords: " + list);
  }

  CategoryPartition partition = *res.base_partition;
  for (std::size_t i = 0; i < ids.size(); ++i) partition = partition.with_keyword(ids[i], keywords[i]);
  partition.check_axioms();

  const std::size_t L = spec.chain.max_len;
  std::vector<Formula> formulas;
  switch (spec.kind) {
    case TaskKind::Interrogative:
      formulas = interrogative_formulas(partition, spec.strict, L);
      break;
    case TaskKind::Imperative:
      formulas = imperative_formulas(partition);
      break;
    case TaskKind::Sentiment:
      break;
    case TaskKind::Custom:
      for (const auto& f : spec.formulas) formulas.push_back(parse_formula(f, partition));
      break;
  }
  std::set<std::string> seen;
  for (const auto& w : keywords) {
    if (!seen.insert(w).second) continue;
    const std::string name = CategoryPartition::keyword_category_name(w);
    formulas.push_back(spec.keyword_once ? keyword_exactly_once(name, L) : keyword_constraint(name, L));
  }

  std::vector<SoftScorerPtr> scorers;
  if (spec.soft.similarity_reference)
    scorers.push_back(std::make_shared<SimilarityScorer>(tokenize(*spec.soft.similarity_reference, vocab),
                                                         res.embeddings, spec.soft.similarity_mode));
  if (res.sentiment) scorers.push_back(std::make_shared<SentimentScorer>(res.sentiment, spec.soft.sentiment_target));

  return std::make_unique<Task>(Task{partition, ConstraintSet(formulas, partition, spec.chain.beta),
                                     compose(std::move(scorers)), ids});
}

}  // namespace tsmh
