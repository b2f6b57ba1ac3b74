#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "tsmh/errors.hpp"
#include "tsmh/report.hpp"

using namespace tsmh;
namespace fs = std::filesystem;

namespace {

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("tsmh_report_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TaskSpec small_spec() {
  TaskSpec spec = validate_config(testing::configs_dir() / "interrogative.toml");
  spec.chain.steps = 20;
  return spec;
}

const std::vector<std::vector<std::string>> kInputs = {
    {"scientist", "release"}, {"machine", "ancient"}, {"describe", "album"}};

}  // namespace

TEST_CASE("sign test against the binomial tail") {
  CHECK(sign_test_p(10, 9) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sign_test_p(5, 0) == doctest::Approx(1.0 / 32).epsilon(1e-12));
  CHECK(sign_test_p(9, 1) == doctest::Approx(11.0 / 1024).epsilon(1e-12));
  CHECK(sign_test_p(0, 3) == 1.0);
  CHECK(sign_test_p(0, 0) == 1.0);
}

TEST_CASE("input seeds") {
  CHECK(input_seed(1, 0) == input_seed(1, 0));
  CHECK(input_seed(1, 0) != input_seed(1, 1));
  CHECK(input_seed(1, 0) != input_seed(2, 0));
}

TEST_CASE("keyword input files") {
  const auto dir = scratch("inputs");
  fs::create_directories(dir);
  std::ofstream(dir / "in.tsv") << "a\tb\n\nc\n";
  const auto sets = read_keyword_inputs(dir / "in.tsv");
  REQUIRE(sets.size() == 2);
  CHECK(sets[0] == std::vector<std::string>{"a", "b"});
  CHECK(sets[1] == std::vector<std::string>{"c"});
  CHECK_THROWS_AS(read_keyword_inputs(dir / "missing.tsv"), InputError);
}

TEST_CASE("generate writes one chain per input and verifies") {
  const TaskSpec spec = small_spec();
  const auto res = load_resources(spec);
  const auto dir = scratch("gen");
  const RunReport report = run_generate(spec, res, kInputs, {Method::Tsmh, 7, 1}, dir);
  REQUIRE(report.inputs.size() == 3);
  CHECK(report.steps == 20);
  for (const auto& in : report.inputs) CHECK(fs::exists(dir / in.history_file));

  std::istringstream best(read(dir / "best.txt"));
  std::size_t lines = 0;
  for (std::string line; std::getline(best, line);) ++lines;
  CHECK(lines == 3);

  CHECK(verify_report(dir).empty());
  const RunReport loaded = RunReport::load(dir);
  CHECK(loaded.to_json() == report.to_json());

  const Comparison same = compare_reports(report, loaded);
  CHECK(same.paired == 3);
  CHECK(same.valid_a == same.valid_b);
  CHECK(same.accept_a == same.accept_b);
  CHECK(same.valid_wins + same.valid_losses + same.accept_wins + same.accept_losses == 0);

  auto j = nlohmann::json::parse(read(dir / "report.json"));
  j["inputs"][0]["acceptance_rate"] = 0.987;
  std::ofstream(dir / "report.json") << j.dump(2);
  CHECK_FALSE(verify_report(dir).empty());
}

TEST_CASE("same seed, same bytes") {
  const TaskSpec spec = small_spec();
  const auto res = load_resources(spec);
  const auto a = scratch("det_a"), b = scratch("det_b");
  run_generate(spec, res, kInputs, {Method::Cgmh, 3, 1}, a);
  run_generate(spec, res, kInputs, {Method::Cgmh, 3, 1}, b);
  for (const char* f : {"report.json", "best.txt", "chains/input_0000.jsonl", "chains/input_0002.jsonl"}) {
    CAPTURE(f);
    CHECK(read(a / f) == read(b / f));
  }
}

TEST_CASE("compare rejects mismatched reports") {
  RunReport a, b;
  a.inputs.resize(2);
  b.inputs.resize(3);
  CHECK_THROWS_AS(compare_reports(a, b), InputError);
}
