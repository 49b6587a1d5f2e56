#ifndef CBT_CLASSIFIER_HPP
#define CBT_CLASSIFIER_HPP

// Reference multinomial bag-of-words polarity classifier and the evaluation
// metrics used across the pipeline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cbt/corpus.hpp"
#include "cbt/error.hpp"
#include "cbt/label.hpp"
#include "cbt/text.hpp"

namespace cbt {

struct LabelDistribution {
  std::array<double, kNumLabels> probs{};

  double operator[](Label l) const { return probs[index_of(l)]; }

  /// Highest-probability label; ties go to the lowest label in label order.
  Label argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < kNumLabels; ++i)
      if (probs[i] > probs[best]) best = i;
    return kAllLabels[best];
  }

  bool valid(double tolerance = 1e-9) const {
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0 && p <= 1.0)) return false;
      sum += p;
    }
    return std::abs(sum - 1.0) <= tolerance;
  }
};

/// Anything that can label a batch of texts: the reference model or a
/// remote backend. Output order equals input order.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::vector<LabelDistribution> predict_batch(
      std::span<const std::string> texts) const = 0;
};

/// Multinomial naive Bayes over case-folded tokens with additive smoothing.
/// Stores raw counts; priors and likelihoods are derived from them so that a
/// serialized model reproduces predictions bit-for-bit.
class ClassifierModel : public Predictor {
 public:
  ClassifierModel() = default;

  static ClassifierModel train(const Corpus& corpus, double alpha) {
    if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, corpus.name);
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    ClassifierModel m;
    m.alpha_ = alpha;
    for (const auto& r : corpus.records) {
      const std::size_t c = index_of(r.gold);
      ++m.doc_counts_[c];
      for (auto& tok : tokenize(r.text)) {
        auto [it, inserted] = m.vocab_.try_emplace(std::move(tok), m.token_counts_.size());
        if (inserted) m.token_counts_.push_back({});
        ++m.token_counts_[it->second][c];
        ++m.class_totals_[c];
      }
    }
    m.documents_ = corpus.size();
    return m;
  }

  bool trained() const { return documents_ > 0; }
  double alpha() const { return alpha_; }
  std::size_t vocabulary_size() const { return vocab_.size(); }
  std::size_t documents() const { return documents_; }

  bool is_trained_class(Label l) const { return doc_counts_[index_of(l)] > 0; }

  double prior(Label l) const {
    require_trained();
    return static_cast<double>(doc_counts_[index_of(l)]) / static_cast<double>(documents_);
  }

  /// Smoothed P(token | class); tokens outside the vocabulary get the
  /// smoothing mass alone.
  double likelihood(Label l, std::string_view token) const {
    require_trained();
    const std::size_t c = index_of(l);
    double count = 0.0;
    if (auto it = vocab_.find(std::string(token)); it != vocab_.end())
      count = static_cast<double>(token_counts_[it->second][c]);
    return (count + alpha_) / denominator(c);
  }

  LabelDistribution predict(std::string_view text) const {
    require_trained();
    const auto tokens = tokenize(text);
    std::array<double, kNumLabels> log_score{};
    double best = -INFINITY;
    for (Label l : kAllLabels) {
      const std::size_t c = index_of(l);
      if (doc_counts_[c] == 0) continue;
      double s = std::log(prior(l));
      const double log_denominator = std::log(denominator(c));
      for (const auto& tok : tokens) {
        double count = 0.0;
        if (auto it = vocab_.find(tok); it != vocab_.end())
          count = static_cast<double>(token_counts_[it->second][c]);
        s += std::log(count + alpha_) - log_denominator;
      }
      log_score[c] = s;
      best = std::max(best, s);
    }
    LabelDistribution d;
    double z = 0.0;
    for (Label l : kAllLabels) {
      const std::size_t c = index_of(l);
      if (doc_counts_[c] == 0) continue;
      d.probs[c] = std::exp(log_score[c] - best);
      z += d.probs[c];
    }
    for (double& p : d.probs) p /= z;
    return d;
  }

  std::vector<LabelDistribution> predict_batch(
      std::span<const std::string> texts) const override {
    std::vector<LabelDistribution> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(predict(t));
    return out;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "cbt-reference-nb/1";
    j["alpha"] = alpha_;
    j["documents"] = documents_;
    auto docs = nlohmann::ordered_json::object();
    for (Label l : kAllLabels) docs[std::string(to_string(l))] = doc_counts_[index_of(l)];
    j["class_documents"] = std::move(docs);
    std::map<std::string, std::array<std::size_t, kNumLabels>> sorted;
    for (const auto& [tok, idx] : vocab_) sorted.emplace(tok, token_counts_[idx]);
    auto tokens = nlohmann::ordered_json::object();
    for (const auto& [tok, counts] : sorted) tokens[tok] = counts;
    j["token_counts"] = std::move(tokens);
    return j;
  }

  static ClassifierModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("format").get<std::string>() != "cbt-reference-nb/1")
        throw Error(ErrorCode::InvalidArgument, "unknown model format");
      ClassifierModel m;
      m.alpha_ = j.at("alpha").get<double>();
      m.documents_ = j.at("documents").get<std::size_t>();
      for (Label l : kAllLabels)
        m.doc_counts_[index_of(l)] =
            j.at("class_documents").at(std::string(to_string(l))).get<std::size_t>();
      for (const auto& [tok, counts] : j.at("token_counts").items()) {
        m.vocab_.emplace(tok, m.token_counts_.size());
        auto c = counts.get<std::array<std::size_t, kNumLabels>>();
        m.token_counts_.push_back(c);
        for (std::size_t i = 0; i < kNumLabels; ++i) m.class_totals_[i] += c[i];
      }
      if (!(m.alpha_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("model file: ") + e.what());
    }
  }

  bool operator==(const ClassifierModel& other) const {
    return alpha_ == other.alpha_ && documents_ == other.documents_ &&
           doc_counts_ == other.doc_counts_ && to_json() == other.to_json();
  }

 private:
  void require_trained() const {
    if (!trained()) throw Error(ErrorCode::UntrainedModel, "model has no training data");
  }

  double denominator(std::size_t c) const {
    return static_cast<double>(class_totals_[c]) +
           alpha_ * static_cast<double>(vocab_.size());
  }

  double alpha_ = 1.0;
  std::size_t documents_ = 0;
  std::array<std::size_t, kNumLabels> doc_counts_{};
  std::array<std::size_t, kNumLabels> class_totals_{};
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<std::array<std::size_t, kNumLabels>> token_counts_;
};

inline ClassifierModel train_reference(const Corpus& corpus, double alpha) {
  return ClassifierModel::train(corpus, alpha);
}

inline std::vector<Label> predict_labels(const Predictor& predictor,
                                         std::span<const std::string> texts) {
  std::vector<Label> out;
  out.reserve(texts.size());
  for (const auto& d : predictor.predict_batch(texts)) out.push_back(d.argmax());
  return out;
}

inline std::vector<std::string> texts_of(const Corpus& corpus) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& r : corpus.records) texts.push_back(r.text);
  return texts;
}

inline std::vector<Label> golds_of(const Corpus& corpus) {
  std::vector<Label> golds;
  golds.reserve(corpus.size());
  for (const auto& r : corpus.records) golds.push_back(r.gold);
  return golds;
}

// ---------------------------------------------------------------------------
// Metrics

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct Metrics {
  double accuracy = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  std::array<ClassMetrics, kNumLabels> per_class{};
  std::size_t n = 0;
};

enum class Averaging { Weighted, Macro };

/// Per-class precision/recall/F1 with 0 for empty denominators. The averaged
/// fields are support-weighted by default; Macro averages over all three
/// labels. The field names keep the "weighted_" prefix in both modes.
inline Metrics evaluate(const std::vector<Label>& predictions, const std::vector<Label>& golds,
                        Averaging averaging = Averaging::Weighted) {
  if (predictions.size() != golds.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " vs " +
                                               std::to_string(golds.size()));
  if (golds.empty()) throw Error(ErrorCode::EmptyInput, "no predictions");
  std::array<std::size_t, kNumLabels> tp{}, predicted{}, support{};
  std::size_t correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const std::size_t p = index_of(predictions[i]);
    const std::size_t g = index_of(golds[i]);
    ++predicted[p];
    ++support[g];
    if (p == g) {
      ++tp[g];
      ++correct;
    }
  }
  Metrics m;
  m.n = golds.size();
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n);
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    auto& pc = m.per_class[c];
    pc.support = support[c];
    pc.precision = predicted[c] ? static_cast<double>(tp[c]) / predicted[c] : 0.0;
    pc.recall = support[c] ? static_cast<double>(tp[c]) / support[c] : 0.0;
    const double denom = pc.precision + pc.recall;
    pc.f1 = denom > 0.0 ? 2.0 * pc.precision * pc.recall / denom : 0.0;
  }
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    const double w = averaging == Averaging::Weighted
                         ? static_cast<double>(support[c]) / static_cast<double>(m.n)
                         : 1.0 / static_cast<double>(kNumLabels);
    m.weighted_precision += w * m.per_class[c].precision;
    m.weighted_recall += w * m.per_class[c].recall;
    m.weighted_f1 += w * m.per_class[c].f1;
  }
  // Support-weighted recall reduces to total true positives over n.
  if (averaging == Averaging::Weighted) m.weighted_recall = m.accuracy;
  return m;
}

}  // namespace cbt

#endif  // CBT_CLASSIFIER_HPP
