#ifndef CBT_PIPELINE_HPP
#define CBT_PIPELINE_HPP

// Experiment orchestration: the seven strategies, configuration files and
// the dataset-size vs accuracy analysis.

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cbt/augment.hpp"
#include "cbt/classifier.hpp"
#include "cbt/corpus.hpp"
#include "cbt/error.hpp"
#include "cbt/ontology.hpp"
#include "cbt/polarization.hpp"
#include "cbt/random.hpp"
#include "cbt/remote.hpp"

namespace cbt {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Strategy { Baseline, Gen1, Gen2, StdAug, ThrAug, IhtaGen1, IhtaGen2 };

inline constexpr std::array<Strategy, 7> kAllStrategies = {
    Strategy::Baseline, Strategy::Gen1,     Strategy::Gen2,    Strategy::StdAug,
    Strategy::ThrAug,   Strategy::IhtaGen1, Strategy::IhtaGen2};

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Baseline: return "baseline";
    case Strategy::Gen1: return "gen1";
    case Strategy::Gen2: return "gen2";
    case Strategy::StdAug: return "std-aug";
    case Strategy::ThrAug: return "thr-aug";
    case Strategy::IhtaGen1: return "ihta-gen1";
    case Strategy::IhtaGen2: return "ihta-gen2";
  }
  return "baseline";
}

inline std::optional<Strategy> try_parse_strategy(std::string_view text) {
  for (Strategy s : kAllStrategies)
    if (to_string(s) == text) return s;
  return std::nullopt;
}

inline bool uses_generalization(Strategy s) {
  return s == Strategy::Gen1 || s == Strategy::Gen2 || s == Strategy::IhtaGen1 ||
         s == Strategy::IhtaGen2;
}

inline bool uses_threshold(Strategy s) {
  return s == Strategy::ThrAug || s == Strategy::IhtaGen1 || s == Strategy::IhtaGen2;
}

inline bool uses_augmentation(Strategy s) { return s == Strategy::StdAug || uses_threshold(s); }

inline GeneralizationLevel level_of(Strategy s) {
  switch (s) {
    case Strategy::Gen1:
    case Strategy::IhtaGen1: return GeneralizationLevel::L1;
    case Strategy::Gen2:
    case Strategy::IhtaGen2: return GeneralizationLevel::L2;
    default: return GeneralizationLevel::L0;
  }
}

struct ProviderSpec {
  std::string kind = "thesaurus";  // "thesaurus" | "remote"
  std::filesystem::path thesaurus_path;
  RemoteProviderConfig remote;
};

struct ExperimentConfig {
  Strategy strategy = Strategy::Baseline;
  std::uint64_t seed = 42;
  double test_fraction = 0.2;
  double tau = 0.0;
  std::size_t k = 3;
  double alpha = 1.0;
  std::set<Category> target_categories = default_target_categories();
  std::optional<RemoteConfig> backend;  // empty = reference classifier
  ProviderSpec provider;
  std::filesystem::path ontology_path;
  std::filesystem::path corpus_path;
  // Relative paths resolve against this directory; not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
    return base_dir / p;
  }
};

namespace pipeline_detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ConfigError, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace pipeline_detail

/// Builds a config from its JSON form; field names mirror ExperimentConfig.
inline ExperimentConfig config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {}) {
  using pipeline_detail::get_or;
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  ExperimentConfig c;
  c.base_dir = base_dir;
  const auto strategy = get_or<std::string>(j, "strategy", "baseline");
  auto parsed = try_parse_strategy(strategy);
  if (!parsed) throw Error(ErrorCode::ConfigError, "unknown strategy " + strategy);
  c.strategy = *parsed;
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.test_fraction = get_or<double>(j, "test_fraction", c.test_fraction);
  c.tau = get_or<double>(j, "tau", c.tau);
  c.k = get_or<std::size_t>(j, "k", c.k);
  c.alpha = get_or<double>(j, "alpha", c.alpha);
  if (j.contains("target_categories")) {
    c.target_categories.clear();
    for (const auto& name : get_or<std::vector<std::string>>(j, "target_categories", {})) {
      auto cat = try_parse_category(name);
      if (!cat) throw Error(ErrorCode::ConfigError, "unknown category " + name);
      c.target_categories.insert(*cat);
    }
  }
  if (auto it = j.find("backend"); it != j.end() && !it->is_null()) {
    const auto kind = get_or<std::string>(*it, "kind", "reference");
    if (kind == "remote") {
      RemoteConfig r;
      r.endpoint = get_or<std::string>(*it, "endpoint", "");
      r.batch_size = get_or<std::size_t>(*it, "batch_size", r.batch_size);
      r.max_in_flight = get_or<std::size_t>(*it, "max_in_flight", r.max_in_flight);
      r.timeout_s = get_or<double>(*it, "timeout_s", r.timeout_s);
      r.retries = get_or<int>(*it, "retries", r.retries);
      r.backoff_ms = get_or<int>(*it, "backoff_ms", r.backoff_ms);
      if (r.endpoint.empty()) throw Error(ErrorCode::ConfigError, "remote backend needs endpoint");
      c.backend = r;
    } else if (kind != "reference") {
      throw Error(ErrorCode::ConfigError, "unknown backend kind " + kind);
    }
  }
  if (auto it = j.find("provider"); it != j.end() && !it->is_null()) {
    c.provider.kind = get_or<std::string>(*it, "kind", "thesaurus");
    if (c.provider.kind == "thesaurus") {
      c.provider.thesaurus_path = get_or<std::string>(*it, "path", "");
    } else if (c.provider.kind == "remote") {
      auto& r = c.provider.remote;
      r.endpoint = get_or<std::string>(*it, "endpoint", "");
      r.model = get_or<std::string>(*it, "model", "");
      r.api_key_env = get_or<std::string>(*it, "api_key_env", "");
      r.cache_dir = get_or<std::string>(*it, "cache_dir", "");
      r.timeout_s = get_or<double>(*it, "timeout_s", r.timeout_s);
      r.retries = get_or<int>(*it, "retries", r.retries);
      r.backoff_ms = get_or<int>(*it, "backoff_ms", r.backoff_ms);
    } else {
      throw Error(ErrorCode::ConfigError, "unknown provider kind " + c.provider.kind);
    }
  }
  c.ontology_path = get_or<std::string>(j, "ontology_path", "");
  c.corpus_path = get_or<std::string>(j, "corpus_path", "");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0))
    throw Error(ErrorCode::ConfigError, "test_fraction must be in (0, 1)");
  if (!(c.tau >= 0.0)) throw Error(ErrorCode::ConfigError, "tau must be >= 0");
  if (c.k == 0) throw Error(ErrorCode::ConfigError, "k must be >= 1");
  if (!(c.alpha > 0.0)) throw Error(ErrorCode::ConfigError, "alpha must be > 0");
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

/// Stable-order JSON echo of a config. The API key value is never included,
/// only the name of its environment variable.
inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["strategy"] = to_string(c.strategy);
  j["seed"] = c.seed;
  j["test_fraction"] = c.test_fraction;
  j["tau"] = c.tau;
  j["k"] = c.k;
  j["alpha"] = c.alpha;
  auto cats = nlohmann::ordered_json::array();
  for (Category cat : c.target_categories) cats.push_back(to_string(cat));
  j["target_categories"] = std::move(cats);
  nlohmann::ordered_json backend;
  if (c.backend) {
    backend["kind"] = "remote";
    backend["endpoint"] = c.backend->endpoint;
    backend["batch_size"] = c.backend->batch_size;
    backend["max_in_flight"] = c.backend->max_in_flight;
    backend["timeout_s"] = c.backend->timeout_s;
    backend["retries"] = c.backend->retries;
    backend["backoff_ms"] = c.backend->backoff_ms;
  } else {
    backend["kind"] = "reference";
  }
  j["backend"] = std::move(backend);
  nlohmann::ordered_json provider;
  provider["kind"] = c.provider.kind;
  if (c.provider.kind == "remote") {
    provider["endpoint"] = c.provider.remote.endpoint;
    provider["model"] = c.provider.remote.model;
    provider["api_key_env"] = c.provider.remote.api_key_env;
    provider["cache_dir"] = c.provider.remote.cache_dir.generic_string();
    provider["timeout_s"] = c.provider.remote.timeout_s;
    provider["retries"] = c.provider.remote.retries;
    provider["backoff_ms"] = c.provider.remote.backoff_ms;
  } else {
    provider["path"] = c.provider.thesaurus_path.generic_string();
  }
  j["provider"] = std::move(provider);
  j["ontology_path"] = c.ontology_path.generic_string();
  j["corpus_path"] = c.corpus_path.generic_string();
  return j;
}

// ---------------------------------------------------------------------------
// Inputs

struct ExperimentInputs {
  Corpus corpus;
  std::optional<TermOntology> ontology;
  std::optional<SynonymProvider> provider;
};

inline Corpus load_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return parse_corpus(in, path.filename().string());
}

inline TermOntology load_ontology_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return load_ontology(in);
}

inline SynonymProvider make_provider(const ExperimentConfig& config) {
  if (config.provider.kind == "remote") {
    RemoteProviderConfig remote = config.provider.remote;
    remote.cache_dir = config.resolve(remote.cache_dir);
    if (remote.endpoint.empty() || remote.cache_dir.empty())
      throw Error(ErrorCode::ConfigError, "remote provider needs endpoint and cache_dir");
    return SynonymProvider(std::move(remote));
  }
  if (config.provider.thesaurus_path.empty())
    throw Error(ErrorCode::ConfigError, "thesaurus provider needs a path");
  return SynonymProvider(Thesaurus::load_file(config.resolve(config.provider.thesaurus_path)));
}

/// Loads only what the configured strategy needs.
inline ExperimentInputs load_inputs(const ExperimentConfig& config) {
  ExperimentInputs inputs;
  if (config.corpus_path.empty()) throw Error(ErrorCode::ConfigError, "corpus_path is required");
  inputs.corpus = load_corpus_file(config.resolve(config.corpus_path));
  if (uses_generalization(config.strategy) || uses_threshold(config.strategy)) {
    if (config.ontology_path.empty())
      throw Error(ErrorCode::ConfigError, "ontology_path is required for this strategy");
    inputs.ontology = load_ontology_file(config.resolve(config.ontology_path));
  }
  if (uses_augmentation(config.strategy)) inputs.provider = make_provider(config);
  return inputs;
}

// ---------------------------------------------------------------------------
// Report

struct StageEntry {
  std::string stage;
  std::string detail;
  std::size_t records_in = 0;
  std::size_t records_out = 0;
};

struct AugmentedEntry {
  std::string id;
  std::string source_id;
  std::string synonym;
};

struct ExperimentReport {
  nlohmann::ordered_json config;
  Strategy strategy = Strategy::Baseline;
  Metrics overall;
  std::vector<std::pair<Category, Metrics>> per_category;
  std::size_t corpus_size = 0;
  std::size_t train_size_before = 0;
  std::size_t train_size_after = 0;
  std::size_t test_size = 0;
  std::optional<PolarizationReport> polarization;
  std::vector<std::string> selected_terms;
  std::vector<StageEntry> stages;
  std::vector<AugmentedEntry> augmented;
  std::vector<std::string> test_ids;
  std::string test_digest;
  Warnings warnings;
  double duration_ms = 0.0;
  std::string version{kVersion};
};

namespace pipeline_detail {

template <typename Fn>
auto run_stage(std::string_view name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + std::string(name) + "': " + e.detail());
  }
}

inline std::string categories_label(const std::set<Category>& cats) {
  std::string out;
  for (Category c : cats) {
    if (!out.empty()) out += ",";
    out += to_string(c);
  }
  return out.empty() ? "none" : out;
}

/// Either the freshly trained reference model or the configured backend.
class ModelHolder {
 public:
  ModelHolder(const ExperimentConfig& config, const Corpus& train) {
    if (config.backend) {
      remote_ = std::make_unique<RemoteBackend>(*config.backend);
    } else {
      model_ = ClassifierModel::train(train, config.alpha);
    }
  }
  const Predictor& predictor() const {
    if (remote_) return *remote_;
    return model_;
  }

 private:
  ClassifierModel model_;
  std::unique_ptr<RemoteBackend> remote_;
};

}  // namespace pipeline_detail

/// Runs one strategy end to end on in-memory inputs. Any module error aborts
/// the run; the error names the failing stage.
inline ExperimentReport run_experiment(const ExperimentConfig& config,
                                       const ExperimentInputs& inputs) {
  using pipeline_detail::run_stage;
  const auto started = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = config_to_json(config);
  report.strategy = config.strategy;
  report.corpus_size = inputs.corpus.size();
  const Strategy s = config.strategy;
  const GeneralizationLevel level = level_of(s);

  auto require_ontology = [&]() -> const TermOntology& {
    if (!inputs.ontology) throw Error(ErrorCode::ConfigError, "strategy needs an ontology");
    return *inputs.ontology;
  };
  auto require_provider = [&]() -> const SynonymProvider& {
    if (!inputs.provider) throw Error(ErrorCode::ConfigError, "strategy needs a synonym provider");
    return *inputs.provider;
  };
  auto generalize_step = [&](const Corpus& c, std::string_view what) {
    return run_stage("generalize", [&] {
      auto g = generalize_corpus(c, require_ontology(), level);
      report.warnings.add("generalize:unmapped", g.unmapped);
      report.stages.push_back({"generalize", std::string(what) + " L" + std::to_string(to_int(level)),
                               c.size(), g.corpus.size()});
      return std::move(g.corpus);
    });
  };

  Corpus working = inputs.corpus;
  if (s == Strategy::Gen1 || s == Strategy::Gen2) working = generalize_step(working, "corpus");

  Split parts = run_stage("split", [&] {
    auto sp = split(working, config.test_fraction, config.seed);
    report.stages.push_back({"split",
                             "test_fraction=" + std::to_string(config.test_fraction) +
                                 " seed=" + std::to_string(config.seed),
                             working.size(), sp.train.size() + sp.test.size()});
    return sp;
  });
  Corpus train = std::move(parts.train);
  Corpus test = std::move(parts.test);
  report.train_size_before = train.size();

  auto record_augmentation = [&](const AugmentResult& aug, const std::string& detail,
                                 std::size_t before) {
    report.warnings.merge(aug.warnings);
    report.stages.push_back({"augment", detail, before, aug.corpus.size()});
    for (const auto& r : aug.corpus.records)
      if (const auto* a = std::get_if<AugmentedSource>(&r.provenance))
        report.augmented.push_back({r.id, a->source_id, a->synonym});
  };

  if (s == Strategy::StdAug) {
    train = run_stage("augment", [&] {
      auto aug = standard_augment(train, config.target_categories, require_provider(), config.k);
      record_augmentation(aug,
                          "standard k=" + std::to_string(config.k) + " categories=" +
                              pipeline_detail::categories_label(config.target_categories),
                          train.size());
      return std::move(aug.corpus);
    });
  }

  if (uses_threshold(s)) {
    const auto& ontology = require_ontology();
    auto probe = run_stage("train-probe", [&] {
      report.stages.push_back({"train-probe", config.backend ? "remote backend" : "reference",
                               train.size(), train.size()});
      return pipeline_detail::ModelHolder(config, train);
    });
    auto polarization = run_stage("measure-polarization", [&] {
      auto pol = measure_all(probe.predictor(), train, ontology);
      report.warnings.add("polarization:unknown_term", pol.unknown_terms);
      report.stages.push_back({"measure-polarization",
                               std::to_string(pol.terms.size()) + " terms", train.size(),
                               train.size()});
      return pol;
    });
    auto selected = run_stage("select-polarized", [&] {
      auto sel = select_polarized(polarization.terms, config.tau);
      report.stages.push_back({"select-polarized",
                               "tau=" + std::to_string(config.tau) + " selected=" +
                                   std::to_string(sel.size()),
                               polarization.terms.size(), sel.size()});
      return sel;
    });
    report.selected_terms.assign(selected.begin(), selected.end());
    report.polarization = std::move(polarization);
    train = run_stage("augment", [&] {
      auto aug = threshold_augment(train, selected, require_provider(), config.k);
      record_augmentation(aug, "threshold k=" + std::to_string(config.k), train.size());
      return std::move(aug.corpus);
    });
  }

  if (s == Strategy::IhtaGen1 || s == Strategy::IhtaGen2) {
    train = generalize_step(train, "train");
    test = generalize_step(test, "test");
  }
  report.train_size_after = train.size();
  report.test_size = test.size();

  auto final_model = run_stage("train", [&] {
    report.stages.push_back({"train", config.backend ? "remote backend (not retrained)"
                                                     : "reference alpha=" + std::to_string(config.alpha),
                             train.size(), train.size()});
    return pipeline_detail::ModelHolder(config, train);
  });

  run_stage("evaluate", [&] {
    const auto predictions = predict_labels(final_model.predictor(), texts_of(test));
    const auto golds = golds_of(test);
    report.overall = evaluate(predictions, golds);
    for (Category c : kAllCategories) {
      std::vector<Label> p, g;
      for (std::size_t i = 0; i < test.size(); ++i) {
        if (test.records[i].category != c) continue;
        p.push_back(predictions[i]);
        g.push_back(golds[i]);
      }
      if (!g.empty()) report.per_category.emplace_back(c, evaluate(p, g));
    }
    report.stages.push_back({"evaluate", "test", test.size(), test.size()});
  });

  for (const auto& r : test.records) report.test_ids.push_back(r.id);
  report.test_digest = sha256_hex(serialize_corpus(test));
  report.duration_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, pipeline_detail::run_stage("load", [&] {
                          return load_inputs(config);
                        }));
}

// ---------------------------------------------------------------------------
// Dataset size vs accuracy

struct SizePoint {
  std::size_t size = 0;
  double accuracy = 0.0;
};

/// Trains the reference model on nested prefixes of one seeded shuffle of
/// the training split and scores each on the same held-out test split.
inline std::vector<SizePoint> accuracy_vs_size(const Corpus& corpus,
                                               const std::vector<std::size_t>& sizes,
                                               const ExperimentConfig& config) {
  if (sizes.empty()) throw Error(ErrorCode::InvalidArgument, "no sizes");
  if (sizes.front() == 0) throw Error(ErrorCode::InvalidArgument, "sizes must be positive");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1])
      throw Error(ErrorCode::NotAscending, "sizes must be strictly ascending");
  Split parts = split(corpus, config.test_fraction, config.seed);
  if (sizes.back() > parts.train.size())
    throw Error(ErrorCode::SizeExceedsCorpus, std::to_string(sizes.back()) + " > " +
                                                  std::to_string(parts.train.size()));
  std::vector<std::size_t> order(parts.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed);
  shuffle(std::span<std::size_t>(order), rng);

  const auto test_texts = texts_of(parts.test);
  const auto golds = golds_of(parts.test);
  std::vector<SizePoint> points;
  for (std::size_t size : sizes) {
    Corpus subset;
    subset.name = corpus.name + ":prefix-" + std::to_string(size);
    for (std::size_t i = 0; i < size; ++i) subset.records.push_back(parts.train.records[order[i]]);
    const auto model = ClassifierModel::train(subset, config.alpha);
    points.push_back({size, evaluate(predict_labels(model, test_texts), golds).accuracy});
  }
  return points;
}

}  // namespace cbt

#endif  // CBT_PIPELINE_HPP
