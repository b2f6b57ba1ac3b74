#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsmh/lm.hpp"
#include "tsmh/soft.hpp"

namespace tsmh {

inline constexpr std::string_view kBridgeProtocol = "tsmh-bridge/1";
inline constexpr const char* kBridgeTokenEnv = "TSMH_BRIDGE_TOKEN";

/// JSON-over-HTTP client for the masked-LM bridge. Requests go to POST "/"
/// with an "op" field; GET /healthz must report the protocol version.
/// One in-flight request at a time per client.
class BridgeClient {
 public:
  /// url like "http://127.0.0.1:8808". The bearer token, if any, is read from
  /// TSMH_BRIDGE_TOKEN.
  explicit BridgeClient(const std::string& url, double timeout_seconds = 30.0);
  ~BridgeClient();
  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  /// Throws BackendError unless /healthz answers with the expected protocol.
  nlohmann::json health();

  double score(const std::vector<std::string>& tokens);
  /// Log-probs in candidate order. Throws BackendError if the response does not
  /// cover exactly the candidates or does not normalize to 1 +- 1e-6.
  std::vector<double> fill(const std::vector<std::string>& tokens, std::size_t mask_index,
                           const std::vector<std::string>& candidates);
  double sentiment(const std::vector<std::string>& tokens);

  const std::string& url() const { return url_; }

 private:
  nlohmann::json post(const nlohmann::json& request);

  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string url_;
  std::mutex mutex_;
};

class BridgeLm final : public LmBackend {
 public:
  /// Checks /healthz before returning.
  BridgeLm(std::shared_ptr<BridgeClient> client, const Vocabulary& vocab);

  double sentence_logscore(std::span<const TokenId> tokens) const override;
  std::vector<double> fill_logprobs(std::span<const TokenId> tokens, std::size_t mask_index,
                                    std::span<const TokenId> candidates) const override;

 private:
  std::vector<std::string> words(std::span<const TokenId> tokens) const;

  std::shared_ptr<BridgeClient> client_;
  const Vocabulary* vocab_;
};

class BridgeSentiment final : public SentimentBackend {
 public:
  BridgeSentiment(std::shared_ptr<BridgeClient> client, const Vocabulary& vocab);
  double positive(const Sentence& x) const override;

 private:
  std::shared_ptr<BridgeClient> client_;
  const Vocabulary* vocab_;
};

}  // namespace tsmh
