#ifndef CBT_REMOTE_HPP
#define CBT_REMOTE_HPP

// Adapter for classifiers served over HTTP. Request: POST <endpoint>/classify
// with {"texts": [...]}; response {"labels": [...], "scores": [[neg, neu, pos], ...]}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbt/classifier.hpp"
#include "cbt/error.hpp"
#include "cbt/http.hpp"
#include "cbt/label.hpp"

namespace cbt {

struct RemoteConfig {
  std::string endpoint;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  double timeout_s = 30.0;
  int retries = 2;
  int backoff_ms = 100;
};

inline constexpr double kRemoteSumTolerance = 1e-6;

/// Validates one /classify response body against the batch it answers.
inline std::vector<LabelDistribution> parse_classify_response(const std::string& body,
                                                              std::size_t expected) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorCode::ProtocolViolation, "response is not JSON");
  }
  if (!j.is_object() || !j.contains("scores") || !j["scores"].is_array())
    throw Error(ErrorCode::ProtocolViolation, "missing scores");
  const auto& scores = j["scores"];
  if (scores.size() != expected)
    throw Error(ErrorCode::ProtocolViolation, "expected " + std::to_string(expected) +
                                                  " score rows, got " +
                                                  std::to_string(scores.size()));
  if (j.contains("labels")) {
    const auto& labels = j["labels"];
    if (!labels.is_array() || labels.size() != expected)
      throw Error(ErrorCode::ProtocolViolation, "labels length");
    for (const auto& l : labels)
      if (!l.is_string() || !try_parse_label(l.get<std::string>()))
        throw Error(ErrorCode::ProtocolViolation, "bad label " + l.dump());
  }
  std::vector<LabelDistribution> out;
  out.reserve(expected);
  for (const auto& row : scores) {
    if (!row.is_array() || row.size() != kNumLabels)
      throw Error(ErrorCode::ProtocolViolation, "score row must have 3 entries");
    LabelDistribution d;
    for (std::size_t i = 0; i < kNumLabels; ++i) {
      if (!row[i].is_number()) throw Error(ErrorCode::ProtocolViolation, "non-numeric score");
      d.probs[i] = row[i].get<double>();
    }
    if (!d.valid(kRemoteSumTolerance))
      throw Error(ErrorCode::ProtocolViolation, "scores are not a distribution: " + row.dump());
    out.push_back(d);
  }
  return out;
}

class RemoteBackend : public Predictor {
 public:
  explicit RemoteBackend(RemoteConfig config)
      : config_(std::move(config)), endpoint_(parse_endpoint(config_.endpoint)) {
    if (config_.batch_size == 0) config_.batch_size = 1;
    if (config_.max_in_flight == 0) config_.max_in_flight = 1;
  }

  const RemoteConfig& config() const { return config_; }

  /// Splits `texts` into batches, keeps at most max_in_flight requests open
  /// and reassembles results in input order.
  std::vector<LabelDistribution> predict_batch(
      std::span<const std::string> texts) const override {
    std::vector<LabelDistribution> out(texts.size());
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s < texts.size(); s += config_.batch_size) starts.push_back(s);
    for (std::size_t w = 0; w < starts.size(); w += config_.max_in_flight) {
      const std::size_t window_end = std::min(starts.size(), w + config_.max_in_flight);
      std::vector<std::future<std::vector<LabelDistribution>>> pending;
      for (std::size_t b = w; b < window_end; ++b) {
        const std::size_t begin = starts[b];
        const std::size_t count = std::min(config_.batch_size, texts.size() - begin);
        auto batch = texts.subspan(begin, count);
        pending.push_back(std::async(std::launch::async, [this, batch] { return send(batch); }));
      }
      for (std::size_t b = w; b < window_end; ++b) {
        auto result = pending[b - w].get();
        std::copy(result.begin(), result.end(), out.begin() + static_cast<std::ptrdiff_t>(starts[b]));
      }
    }
    return out;
  }

 private:
  std::vector<LabelDistribution> send(std::span<const std::string> batch) const {
    nlohmann::json body;
    body["texts"] = std::vector<std::string>(batch.begin(), batch.end());
    HttpOptions options;
    options.timeout_s = config_.timeout_s;
    options.retries = config_.retries;
    options.backoff_ms = config_.backoff_ms;
    const auto response =
        post_json(endpoint_, join_path(endpoint_.path, "/classify"), body.dump(), options);
    return parse_classify_response(response, batch.size());
  }

  RemoteConfig config_;
  Endpoint endpoint_;
};

inline std::vector<LabelDistribution> predict_remote(const RemoteConfig& config,
                                                     const std::vector<std::string>& texts) {
  return RemoteBackend(config).predict_batch(texts);
}

}  // namespace cbt

#endif  // CBT_REMOTE_HPP
