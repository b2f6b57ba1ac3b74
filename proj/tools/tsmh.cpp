#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "tsmh/errors.hpp"
#include "tsmh/report.hpp"

namespace {

using namespace tsmh;

constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

int cmd_generate(const std::string& config, const std::string& method, const std::string& inputs,
                 std::optional<std::uint64_t> seed, const std::string& out, const std::string& lm, std::size_t jobs) {
  TaskSpec spec = validate_config(config);
  GenerateOptions opt;
  opt.method = method.empty() ? spec.chain.method : parse_method(method);
  opt.seed = seed.value_or(spec.chain.seed);
  opt.jobs = jobs;
  const auto res = load_resources(spec, lm);
  std::vector<std::vector<std::string>> keyword_sets;
  if (!inputs.empty())
    keyword_sets = read_keyword_inputs(inputs);
  else
    keyword_sets.push_back(spec.keywords);
  const RunReport report = run_generate(spec, res, keyword_sets, opt, out);
  std::ifstream summary(std::filesystem::path(out) / "report.txt");
  std::cout << summary.rdbuf();
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& out) {
  const Comparison c = compare_reports(RunReport::load(a), RunReport::load(b));
  std::cout << c.table();
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw InputError("cannot write " + out);
    f << c.to_json().dump(2) << "\n";
  }
  return 0;
}

int cmd_train(const std::string& corpus, const std::string& vocab_path, std::size_t order, double add_k,
              const std::string& out) {
  const Vocabulary vocab = Vocabulary::load(vocab_path);
  const NGramModel model = NGramModel::train(std::filesystem::path(corpus), order, vocab, add_k);
  model.save(out);
  std::cout << "wrote " << out << " (order " << order << ", " << vocab.word_count() << " words)\n";
  return 0;
}

int cmd_exact(const std::string& config, const std::string& keywords, std::size_t min_len, std::size_t max_len,
              const std::string& method, std::size_t steps, std::size_t burn_in, std::optional<std::uint64_t> seed,
              std::size_t top, const std::string& lm) {
  TaskSpec spec = validate_config(config);
  const auto res = load_resources(spec, lm);
  const auto task = build_task(spec, res, keywords.empty() ? spec.keywords : split_words(keywords));
  Target target(task->partition, task->constraints, *res.lm, task->soft);
  const auto dist = exact_distribution(target, min_len, max_len);

  std::vector<std::pair<double, Sentence>> ranked;
  for (const auto& [x, p] : dist) ranked.emplace_back(p, x);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
  std::printf("%zu sentences of length %zu..%zu\n", dist.size(), min_len, max_len);
  for (std::size_t i = 0; i < std::min(top, ranked.size()); ++i)
    std::printf("%.6e  C=%d  %s\n", ranked[i].first, target.error(ranked[i].second),
                detokenize(ranked[i].second, *res.vocab).c_str());

  if (steps == 0) return 0;
  const Method m = method.empty() ? spec.chain.method : parse_method(method);
  const std::size_t chain_max = std::min(max_len, spec.chain.max_len);
  Rng rng(seed.value_or(spec.chain.seed));
  std::unique_ptr<Proposer> proposer;
  if (m == Method::Tsmh)
    proposer = std::make_unique<TsmhProposer>(target, spec.chain.k, chain_max);
  else
    proposer = std::make_unique<CgmhProposer>(target, chain_max, spec.chain.cgmh);
  // TSMH chains never shrink below k tokens.
  const std::size_t chain_min = m == Method::Tsmh ? std::max(min_len, spec.chain.k) : min_len;
  const auto chain_dist = chain_min == min_len ? dist : exact_distribution(target, chain_min, max_len);
  if (chain_dist.empty()) throw InputError("no sentences of length >= " + std::to_string(chain_min));
  Sentence x = std::max_element(chain_dist.begin(), chain_dist.end(), [](const auto& l, const auto& r) {
                 return l.second < r.second;
               })->first;
  std::map<Sentence, double> counts;
  for (std::size_t s = 0; s < burn_in + steps; ++s) {
    mh_step(x, *proposer, target, rng);
    if (s >= burn_in) counts[x] += 1.0;
  }
  double tv = 0.0;
  for (const auto& [y, p] : chain_dist) {
    auto it = counts.find(y);
    tv += std::abs(p - (it == counts.end() ? 0.0 : it->second / static_cast<double>(steps)));
  }
  for (const auto& [y, c] : counts)
    if (!chain_dist.contains(y)) tv += c / static_cast<double>(steps);
  std::printf("%s chain: %zu steps after %zu burn-in, lengths %zu..%zu, TV distance %.4f\n",
              std::string(to_string(m)).c_str(), steps, burn_in, chain_min, max_len, tv / 2.0);
  return 0;
}

int cmd_verify(const std::string& dir) {
  const auto problems = verify_report(dir);
  for (const auto& p : problems) std::cout << p << "\n";
  std::cout << (problems.empty() ? "report verified\n" : "report does NOT match its histories\n");
  return problems.empty() ? 0 : 1;
}

int cmd_validate(const std::string& config) {
  std::cout << validate_config(config).to_json().dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained sentence generation with tree-search Metropolis-Hastings"};
  app.require_subcommand(1);

  std::string config, method, inputs, out, lm, corpus, vocab, keywords, report_a, report_b;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::size_t order = 3, min_len = 1, max_len = 3, steps = 0, burn_in = 1000, top = 10;
  double add_k = NGramModel::kDefaultAddK;

  auto* gen = app.add_subcommand("generate", "Run one chain per keyword set");
  gen->add_option("--config", config, "Task config (TOML)")->required()->check(CLI::ExistingFile);
  gen->add_option("--method", method, "tsmh or cgmh (default: config)");
  gen->add_option("--inputs", inputs, "Keyword sets, one per line, tab-separated")->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "Run seed (default: config)");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--lm", lm, "ngram:<path> or bridge:<url>");
  gen->add_option("--jobs", jobs, "Worker threads");

  auto* cmp = app.add_subcommand("compare", "Compare two generate reports");
  cmp->add_option("a", report_a, "Report directory or report.json")->required();
  cmp->add_option("b", report_b, "Report directory or report.json")->required();
  cmp->add_option("--out", out, "Write the comparison as JSON");

  auto* train = app.add_subcommand("train-lm", "Train an n-gram model");
  train->add_option("--corpus", corpus, "One sentence per line")->required()->check(CLI::ExistingFile);
  train->add_option("--vocab", vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
  train->add_option("--order", order, "n-gram order (1-4)");
  train->add_option("--add-k", add_k, "Add-k smoothing constant");
  train->add_option("--out", out, "Model file")->required();

  auto* exact = app.add_subcommand("exact", "Exact target distribution on a toy space");
  exact->add_option("--config", config, "Task config (TOML)")->required()->check(CLI::ExistingFile);
  exact->add_option("--keywords", keywords, "Space-separated keywords (default: config)");
  exact->add_option("--min-len", min_len, "Shortest sentence");
  exact->add_option("--max-len", max_len, "Longest sentence (at most 4)");
  exact->add_option("--method", method, "Chain for the TV check: tsmh or cgmh");
  exact->add_option("--steps", steps, "Chain steps for a TV-distance check (0: skip)");
  exact->add_option("--burn-in", burn_in, "Discarded initial steps");
  exact->add_option("--seed", seed, "Chain seed");
  exact->add_option("--top", top, "Most probable sentences to print");
  exact->add_option("--lm", lm, "ngram:<path> or bridge:<url>");

  auto* verify = app.add_subcommand("verify-report", "Recompute a report from its JSONL histories");
  verify->add_option("dir", out, "Report directory")->required()->check(CLI::ExistingDirectory);

  auto* validate = app.add_subcommand("validate", "Print the fully resolved config");
  validate->add_option("--config", config, "Task config (TOML)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(config, method, inputs, seed, out, lm, jobs);
    if (*cmp) return cmd_compare(report_a, report_b, out);
    if (*train) return cmd_train(corpus, vocab, order, add_k, out);
    if (*exact) return cmd_exact(config, keywords, min_len, max_len, method, steps, burn_in, seed, top, lm);
    if (*verify) return cmd_verify(out);
    if (*validate) return cmd_validate(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
