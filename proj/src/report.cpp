#include "tsmh/report.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "tsmh/errors.hpp"
#include "tsmh/logmath.hpp"

namespace tsmh {

std::uint64_t input_seed(std::uint64_t run_seed, std::size_t index) {
  std::uint64_t z = run_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::vector<std::string>> read_keyword_inputs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open inputs " + path.string());
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> kws;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, '\t')) {
      std::istringstream words(field);
      std::string w;
      while (words >> w) {
        for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        kws.push_back(w);
      }
    }
    if (!kws.empty()) out.push_back(std::move(kws));
  }
  return out;
}

// ---------------------------------------------------------------------------

void RunReport::recompute_aggregates() {
  std::size_t n = 0, valid = 0;
  double log_pi = 0.0, accept = 0.0, hist_valid = 0.0;
  for (const auto& r : inputs) {
    if (r.skipped) continue;
    ++n;
    valid += r.best_error == 0;
    log_pi += r.best_log_pi;
    accept += r.metrics.acceptance_rate;
    hist_valid += r.metrics.valid_fraction;
  }
  const double d = n ? static_cast<double>(n) : 1.0;
  valid_percent = 100.0 * static_cast<double>(valid) / d;
  mean_best_log_pi = log_pi / d;
  mean_acceptance = accept / d;
  mean_history_valid = hist_valid / d;
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["steps"] = steps;
  j["k"] = k;
  j["valid_percent"] = valid_percent;
  j["mean_best_log_pi"] = mean_best_log_pi;
  j["mean_acceptance"] = mean_acceptance;
  j["mean_history_valid"] = mean_history_valid;
  auto& arr = j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& r : inputs) {
    nlohmann::ordered_json e;
    e["index"] = r.index;
    e["keywords"] = r.keywords;
    e["skipped"] = r.skipped;
    if (r.skipped) {
      e["reason"] = r.reason;
    } else {
      e["seed"] = r.seed;
      e["best"] = r.best;
      e["best_log_pi"] = r.best_log_pi;
      e["best_error"] = r.best_error;
      e["valid_fraction"] = r.metrics.valid_fraction;
      e["mean_log_pi"] = r.metrics.mean_log_pi;
      e["acceptance_rate"] = r.metrics.acceptance_rate;
      e["history"] = r.history_file;
    }
    arr.push_back(std::move(e));
  }
  return j;
}

RunReport RunReport::from_json(const nlohmann::json& j) {
  try {
    RunReport r;
    r.method = j.at("method").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::uint64_t>();
    r.steps = j.at("steps").get<std::size_t>();
    r.k = j.at("k").get<std::size_t>();
    r.valid_percent = j.at("valid_percent").get<double>();
    r.mean_best_log_pi = j.at("mean_best_log_pi").get<double>();
    r.mean_acceptance = j.at("mean_acceptance").get<double>();
    r.mean_history_valid = j.at("mean_history_valid").get<double>();
    for (const auto& e : j.at("inputs")) {
      InputResult in;
      in.index = e.at("index").get<std::size_t>();
      in.keywords = e.at("keywords").get<std::vector<std::string>>();
      in.skipped = e.at("skipped").get<bool>();
      if (in.skipped) {
        in.reason = e.at("reason").get<std::string>();
      } else {
        in.seed = e.at("seed").get<std::uint64_t>();
        in.best = e.at("best").get<std::string>();
        in.best_log_pi = e.at("best_log_pi").get<double>();
        in.best_error = e.at("best_error").get<int>();
        in.metrics.valid_fraction = e.at("valid_fraction").get<double>();
        in.metrics.mean_log_pi = e.at("mean_log_pi").get<double>();
        in.metrics.acceptance_rate = e.at("acceptance_rate").get<double>();
        in.history_file = e.at("history").get<std::string>();
      }
      r.inputs.push_back(std::move(in));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
}

RunReport RunReport::load(const std::filesystem::path& path) {
  std::filesystem::path file = std::filesystem::is_directory(path) ? path / "report.json" : path;
  std::ifstream in(file);
  if (!in) throw InputError("cannot open report " + file.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("report " + file.string() + " is not valid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------

ChainResult run_single(const TaskSpec& spec, const TaskResources& res, const std::vector<std::string>& keywords,
                       Method method, std::uint64_t seed) {
  const auto task = build_task(spec, res, keywords);
  const Vocabulary& vocab = *res.vocab;
  Sentence initial;
  if (spec.chain.initial) {
    initial = tokenize(*spec.chain.initial, vocab);
  } else {
    initial = initial_sentence(task->keywords, vocab.id(spec.chain.pad), spec.chain.initial_min_len(),
                               spec.chain.max_len);
  }
  validate_sentence(initial, vocab, spec.chain.max_len);

  Target target(task->partition, task->constraints, *res.lm, task->soft);
  Rng rng(seed);
  const std::size_t steps = spec.chain.steps_for(method);
  if (method == Method::Tsmh) {
    TsmhProposer proposer(target, spec.chain.k, spec.chain.max_len);
    return run_chain(initial, steps, proposer, target, rng);
  }
  CgmhProposer proposer(target, spec.chain.max_len, spec.chain.cgmh);
  return run_chain(initial, steps, proposer, target, rng);
}

namespace {

std::string history_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "chains/input_%04zu.jsonl", index + 1);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

std::string join(const std::vector<std::string>& words, const char* sep) {
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : sep) + w;
  return out;
}

std::string summary_text(const RunReport& r) {
  std::ostringstream s;
  std::size_t skipped = 0;
  for (const auto& in : r.inputs) skipped += in.skipped;
  s << "method " << r.method << "  k " << r.k << "  steps " << r.steps << "  seed " << r.seed << "  config "
    << std::hex << r.config_hash << std::dec << "\n";
  s << "inputs " << r.inputs.size() << "  skipped " << skipped << "\n";
  s << std::fixed << std::setprecision(2) << "Valid% " << r.valid_percent << "  mean log pi(best) "
    << r.mean_best_log_pi << "  Accept% " << 100.0 * r.mean_acceptance << "\n";
  for (const auto& in : r.inputs) {
    if (in.skipped) s << "skipped [" << join(in.keywords, " ") << "]: " << in.reason << "\n";
  }
  return s.str();
}

}  // namespace

RunReport run_generate(const TaskSpec& spec, const TaskResources& res,
                       const std::vector<std::vector<std::string>>& inputs, const GenerateOptions& options,
                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "chains");
  RunReport report;
  report.method = std::string(to_string(options.method));
  report.seed = options.seed;
  report.config_hash = spec.config_hash;
  report.steps = spec.chain.steps_for(options.method);
  report.k = spec.chain.k;
  report.inputs.resize(inputs.size());

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= inputs.size()) return;
      InputResult& r = report.inputs[i];
      r.index = i;
      r.keywords = inputs[i];
      try {
        r.seed = input_seed(options.seed, i);
        const ChainResult chain = run_single(spec, res, inputs[i], options.method, r.seed);
        r.best = detokenize(chain.best, *res.vocab);
        r.best_log_pi = chain.best_log_pi;
        r.best_error = chain.best_error;
        r.metrics = chain.metrics;
        r.history_file = history_name(i);
        write_file(out_dir / r.history_file, history_jsonl(chain, *res.vocab));
      } catch (const InputError& e) {
        r = InputResult{};
        r.index = i;
        r.keywords = inputs[i];
        r.skipped = true;
        r.reason = e.what();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
        next = inputs.size();
        return;
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, inputs.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  report.recompute_aggregates();
  std::string best;
  for (const auto& r : report.inputs) best += (r.skipped ? "# skipped: " + r.reason : r.best) + "\n";
  write_file(out_dir / "best.txt", best);
  write_file(out_dir / "report.json", report.to_json().dump(2) + "\n");
  write_file(out_dir / "report.txt", summary_text(report));
  return report;
}

// ---------------------------------------------------------------------------

double sign_test_p(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) return 1.0;
  std::vector<double> terms;
  for (std::size_t i = wins; i <= n; ++i)
    terms.push_back(log_choose(n, i) - static_cast<double>(n) * std::log(2.0));
  return std::min(1.0, std::exp(log_sum_exp(terms)));
}

Comparison compare_reports(const RunReport& a, const RunReport& b) {
  if (a.inputs.size() != b.inputs.size()) throw InputError("reports cover different numbers of inputs");
  Comparison c;
  c.method_a = a.method;
  c.method_b = b.method;
  c.valid_a = a.valid_percent;
  c.valid_b = b.valid_percent;
  c.log_pi_a = a.mean_best_log_pi;
  c.log_pi_b = b.mean_best_log_pi;
  c.accept_a = a.mean_acceptance;
  c.accept_b = b.mean_acceptance;
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    const auto& x = a.inputs[i];
    const auto& y = b.inputs[i];
    if (x.keywords != y.keywords) throw InputError("reports differ at input " + std::to_string(i + 1));
    if (x.skipped || y.skipped) continue;
    ++c.paired;
    const bool vx = x.best_error == 0, vy = y.best_error == 0;
    c.valid_wins += vx && !vy;
    c.valid_losses += vy && !vx;
    c.accept_wins += x.metrics.acceptance_rate > y.metrics.acceptance_rate;
    c.accept_losses += x.metrics.acceptance_rate < y.metrics.acceptance_rate;
  }
  c.valid_sign_p = sign_test_p(c.valid_wins, c.valid_losses);
  c.accept_sign_p = sign_test_p(c.accept_wins, c.accept_losses);
  return c;
}

std::string Comparison::table() const {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << std::left << std::setw(16) << "metric" << std::setw(12) << method_a << std::setw(12) << method_b << "delta\n";
  s << std::setw(16) << "Valid%" << std::setw(12) << valid_a << std::setw(12) << valid_b << valid_a - valid_b << "\n";
  s << std::setw(16) << "log pi(best)" << std::setw(12) << log_pi_a << std::setw(12) << log_pi_b << log_pi_a - log_pi_b
    << "\n";
  s << std::setw(16) << "Accept%" << std::setw(12) << 100.0 * accept_a << std::setw(12) << 100.0 * accept_b
    << 100.0 * (accept_a - accept_b) << "\n";
  s << std::setprecision(4);
  s << "paired inputs " << paired << "\n";
  s << "sign test Valid:  " << valid_wins << " wins / " << valid_losses << " losses, p = " << valid_sign_p << "\n";
  s << "sign test Accept: " << accept_wins << " wins / " << accept_losses << " losses, p = " << accept_sign_p << "\n";
  return s.str();
}

nlohmann::ordered_json Comparison::to_json() const {
  return {{"method_a", method_a},       {"method_b", method_b},       {"paired", paired},
          {"valid_a", valid_a},         {"valid_b", valid_b},         {"log_pi_a", log_pi_a},
          {"log_pi_b", log_pi_b},       {"accept_a", accept_a},       {"accept_b", accept_b},
          {"valid_wins", valid_wins},   {"valid_losses", valid_losses}, {"valid_sign_p", valid_sign_p},
          {"accept_wins", accept_wins}, {"accept_losses", accept_losses}, {"accept_sign_p", accept_sign_p}};
}

// ---------------------------------------------------------------------------

std::vector<std::string> verify_report(const std::filesystem::path& report_dir) {
  const RunReport report = RunReport::load(report_dir);
  std::vector<std::string> problems;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };
  RunReport recomputed = report;
  for (auto& in : recomputed.inputs) {
    if (in.skipped) continue;
    const std::string tag = "input " + std::to_string(in.index + 1) + ": ";
    std::ifstream f(report_dir / in.history_file);
    if (!f) {
      problems.push_back(tag + "missing " + in.history_file);
      continue;
    }
    std::vector<StepRecord> history;
    std::vector<std::string> sentences;
    std::string line;
    try {
      while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        StepRecord r;
        r.log_pi = j.at("log_pi").get<double>();
        r.accepted = j.at("accepted").get<bool>();
        r.log_accept = j.at("log_A").is_null() ? kNegInf : j.at("log_A").get<double>();
        r.error = j.at("constraint_error").get<int>();
        sentences.push_back(j.at("sentence").get<std::string>());
        check(j.at("step").get<std::size_t>() == history.size() + 1, tag + "step numbering broken");
        history.push_back(r);
      }
    } catch (const nlohmann::json::exception& e) {
      problems.push_back(tag + "bad JSONL: " + e.what());
      continue;
    }
    if (history.empty()) {
      problems.push_back(tag + "empty history");
      continue;
    }
    check(history.size() == report.steps, tag + "history length differs from steps");
    std::size_t best = 0;
    for (std::size_t i = 1; i < history.size(); ++i)
      if (history[i].log_pi > history[best].log_pi) best = i;
    in.best = sentences[best];
    in.best_log_pi = history[best].log_pi;
    in.best_error = history[best].error;
    in.metrics = summarize(history);
  }
  recomputed.recompute_aggregates();

  for (std::size_t i = 0; i < report.inputs.size(); ++i) {
    const auto& a = report.inputs[i];
    const auto& b = recomputed.inputs[i];
    if (a.skipped) continue;
    const std::string tag = "input " + std::to_string(i + 1) + ": ";
    check(a.best == b.best, tag + "best sentence differs");
    check(a.best_log_pi == b.best_log_pi, tag + "best log pi differs");
    check(a.best_error == b.best_error, tag + "best constraint error differs");
    check(a.metrics.valid_fraction == b.metrics.valid_fraction, tag + "valid fraction differs");
    check(a.metrics.mean_log_pi == b.metrics.mean_log_pi, tag + "mean log pi differs");
    check(a.metrics.acceptance_rate == b.metrics.acceptance_rate, tag + "acceptance rate differs");
  }
  check(report.valid_percent == recomputed.valid_percent, "aggregate Valid% differs");
  check(report.mean_best_log_pi == recomputed.mean_best_log_pi, "aggregate mean log pi differs");
  check(report.mean_acceptance == recomputed.mean_acceptance, "aggregate acceptance differs");
  check(report.mean_history_valid == recomputed.mean_history_valid, "aggregate history Valid differs");
  return problems;
}

}  // namespace tsmh
