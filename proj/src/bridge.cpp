#include "tsmh/bridge.hpp"

#include <cmath>
#include <cstdlib>
#include <unordered_map>

#include <httplib.h>

#include "tsmh/errors.hpp"
#include "tsmh/logmath.hpp"

namespace tsmh {

struct BridgeClient::Impl {
  explicit Impl(const std::string& url) : http(url) {}
  httplib::Client http;
};

BridgeClient::BridgeClient(const std::string& url, double timeout_seconds) : url_(url) {
  if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0)
    throw ConfigError("bridge url must start with http:// or https://, got '" + url + "'");
  impl_ = std::make_unique<Impl>(url);
  if (!impl_->http.is_valid()) throw ConfigError("invalid bridge url '" + url + "'");
  const auto secs = static_cast<time_t>(timeout_seconds);
  const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  impl_->http.set_connection_timeout(secs, usecs);
  impl_->http.set_read_timeout(secs, usecs);
  if (const char* token = std::getenv(kBridgeTokenEnv); token && *token)
    impl_->http.set_bearer_token_auth(token);
}

BridgeClient::~BridgeClient() = default;

nlohmann::json BridgeClient::health() {
  std::lock_guard lock(mutex_);
  auto res = impl_->http.Get("/healthz");
  if (!res) throw BackendError("bridge " + url_ + " unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendError("bridge /healthz returned HTTP " + std::to_string(res->status));
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("bridge /healthz sent invalid JSON: ") + e.what());
  }
  if (!body.is_object() || !body.contains("protocol") || body["protocol"] != kBridgeProtocol)
    throw BackendError("bridge does not speak " + std::string(kBridgeProtocol));
  return body;
}

nlohmann::json BridgeClient::post(const nlohmann::json& request) {
  std::lock_guard lock(mutex_);
  auto res = impl_->http.Post("/", request.dump(), "application/json");
  if (!res) throw BackendError("bridge " + url_ + " unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw BackendError("bridge returned HTTP " + std::to_string(res->status) + ": " + res->body);
  try {
    auto body = nlohmann::json::parse(res->body);
    if (!body.is_object()) throw BackendError("bridge response is not a JSON object");
    return body;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("bridge sent invalid JSON: ") + e.what());
  }
}

namespace {

double number_field(const nlohmann::json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_number()) throw BackendError(std::string("bridge response lacks numeric '") + key + "'");
  const double v = it->get<double>();
  if (std::isnan(v)) throw BackendError(std::string("bridge returned NaN for '") + key + "'");
  return v;
}

}  // namespace

double BridgeClient::score(const std::vector<std::string>& tokens) {
  return number_field(post({{"op", "score"}, {"tokens", tokens}}), "log_score");
}

std::vector<double> BridgeClient::fill(const std::vector<std::string>& tokens, std::size_t mask_index,
                                       const std::vector<std::string>& candidates) {
  const auto body =
      post({{"op", "fill"}, {"tokens", tokens}, {"mask_index", mask_index}, {"candidates", candidates}});
  auto it = body.find("log_probs");
  if (it == body.end() || !it->is_object()) throw BackendError("bridge fill response lacks 'log_probs'");
  if (it->size() != candidates.size()) throw BackendError("bridge fill response does not cover exactly the candidates");
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    auto v = it->find(c);
    if (v == it->end() || !v->is_number())
      throw BackendError("bridge fill response is missing candidate '" + c + "'");
    out.push_back(v->get<double>());
  }
  const double total = std::exp(log_sum_exp(out));
  if (!(std::abs(total - 1.0) <= 1e-6))
    throw BackendError("bridge fill distribution sums to " + std::to_string(total));
  return out;
}

double BridgeClient::sentiment(const std::vector<std::string>& tokens) {
  const double p = number_field(post({{"op", "sentiment"}, {"tokens", tokens}}), "positive");
  if (p < 0.0 || p > 1.0) throw BackendError("bridge sentiment outside [0, 1]");
  return p;
}

BridgeLm::BridgeLm(std::shared_ptr<BridgeClient> client, const Vocabulary& vocab)
    : client_(std::move(client)), vocab_(&vocab) {
  if (!client_) throw ConfigError("bridge LM needs a client");
  client_->health();
}

std::vector<std::string> BridgeLm::words(std::span<const TokenId> tokens) const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (TokenId t : tokens) out.push_back(vocab_->word(t));
  return out;
}

double BridgeLm::sentence_logscore(std::span<const TokenId> tokens) const { return client_->score(words(tokens)); }

std::vector<double> BridgeLm::fill_logprobs(std::span<const TokenId> tokens, std::size_t mask_index,
                                            std::span<const TokenId> candidates) const {
  if (candidates.empty()) throw std::invalid_argument("fill_logprobs: empty candidate set");
  if (mask_index >= tokens.size() || tokens[mask_index] != vocab_->mask())
    throw std::invalid_argument("fill_logprobs: mask_index does not point at the mask");
  return client_->fill(words(tokens), mask_index, words(candidates));
}

BridgeSentiment::BridgeSentiment(std::shared_ptr<BridgeClient> client, const Vocabulary& vocab)
    : client_(std::move(client)), vocab_(&vocab) {
  if (!client_) throw ConfigError("bridge sentiment needs a client");
  client_->health();
}

double BridgeSentiment::positive(const Sentence& x) const {
  std::vector<std::string> w;
  for (TokenId t : x.tokens) w.push_back(vocab_->word(t));
  return client_->sentiment(w);
}

}  // namespace tsmh
