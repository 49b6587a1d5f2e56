// cbt: command-line front end for the bias-mitigation toolkit.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 backend/provider error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbt/cbt.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  bool quiet = false;
  bool timing = false;

  cbt::Format fmt() const { return format == "csv" ? cbt::Format::Csv : cbt::Format::Json; }
};

std::string default_data(const char* name) { return (fs::path(CBT_DATA_DIR) / name).string(); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cbt::Error(cbt::ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void note(const GlobalOptions& g, const std::string& message) {
  if (!g.quiet) std::cerr << message << '\n';
}

void report_warnings(const GlobalOptions& g, const cbt::Warnings& w) {
  for (const auto& [kind, count] : w.counts) note(g, "warning: " + kind + " x" + std::to_string(count));
}

std::set<cbt::Category> parse_categories(const std::string& list) {
  std::set<cbt::Category> out;
  if (cbt::trim(list).empty()) return out;
  for (const auto& name : cbt::split(list, ',')) {
    auto c = cbt::try_parse_category(cbt::ascii_fold(cbt::trim(name)));
    if (!c) throw CLI::ValidationError("--categories", "unknown category '" + name + "'");
    out.insert(*c);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& list) {
  std::vector<std::size_t> sizes;
  for (const auto& item : cbt::split(list, ',')) {
    const auto t = cbt::trim(item);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
      throw CLI::ValidationError("--sizes", "expected a comma-separated list of integers");
    sizes.push_back(std::stoull(t));
  }
  return sizes;
}

cbt::RemoteProviderConfig load_remote_provider(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw cbt::Error(cbt::ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  nlohmann::json wrapped = {{"provider", j}};
  wrapped["provider"]["kind"] = "remote";
  auto config = cbt::config_from_json(wrapped, path.parent_path());
  auto remote = config.provider.remote;
  remote.cache_dir = config.resolve(remote.cache_dir);
  if (remote.endpoint.empty() || remote.cache_dir.empty())
    throw cbt::Error(cbt::ErrorCode::ConfigError, "remote provider needs endpoint and cache_dir");
  return remote;
}

/// Kappa input is either a corpus (JSONL) or CSV rows of per-label counts
/// "negative,neutral,positive"; a non-numeric first row is treated as header.
std::vector<cbt::RatingRow> load_rating_matrix(const std::string& content) {
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '{')
    return cbt::rating_matrix(cbt::parse_corpus(content));
  std::vector<cbt::RatingRow> matrix;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (cbt::trim(line).empty() || line.front() == '#') continue;
    cbt::RatingRow row;
    bool numeric = true;
    for (const auto& cell : cbt::split(line, ',')) {
      const auto t = cbt::trim(cell);
      if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
        numeric = false;
        break;
      }
      row.push_back(std::stoi(t));
    }
    if (!numeric) {
      if (matrix.empty() && line_no == 1) continue;
      throw cbt::Error(cbt::ErrorCode::MalformedLine, "line " + std::to_string(line_no));
    }
    matrix.push_back(std::move(row));
  }
  return matrix;
}

std::unique_ptr<cbt::Predictor> make_predictor(const std::string& backend_url,
                                               const cbt::Corpus& corpus, double alpha) {
  if (!backend_url.empty()) {
    cbt::RemoteConfig rc;
    rc.endpoint = backend_url;
    return std::make_unique<cbt::RemoteBackend>(rc);
  }
  return std::make_unique<cbt::ClassifierModel>(cbt::train_reference(corpus, alpha));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cbt - demographic-term bias mitigation for polarity classifiers"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed (overrides config files)");
  app.add_option("--out", g.out, "Output path (default: stdout)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--quiet", g.quiet, "Suppress warnings on stderr");
  app.add_flag("--timing", g.timing, "Include wall-clock duration in experiment reports");

  std::string corpus_path;
  std::string ontology_path = default_data("ontology.tsv");
  std::string model_path;
  std::string backend_url;
  std::string thesaurus_path;
  std::string remote_cfg;
  std::string mode = "threshold";
  std::string strategy;
  std::string config_path;
  std::string sizes_list;
  std::string categories = "gender,religion";
  std::string annotations_path;
  double alpha = 1.0;
  double tau = 0.0;
  int level = 1;
  std::size_t k = 3;
  std::size_t n_perm = 999;
  std::size_t synth_n = 500;
  bool unique = false;
  bool groups_only = false;

  auto* validate = app.add_subcommand("validate", "Check a JSONL corpus against its schema");
  validate->add_option("corpus", corpus_path)->required();

  auto* stats = app.add_subcommand("stats", "Per-category counts and shares");
  stats->add_option("corpus", corpus_path)->required();
  stats->add_flag("--unique", unique, "Deduplicate by text first");

  auto* kappa = app.add_subcommand("kappa", "Fleiss' kappa over annotator labels");
  kappa->add_option("annotations", annotations_path, "Corpus JSONL or CSV of label counts")
      ->required();

  auto* generalize = app.add_subcommand("generalize", "Replace demographic terms hierarchically");
  generalize->add_option("--level", level)->required()->check(CLI::IsMember({1, 2}));
  generalize->add_option("--ontology", ontology_path)->capture_default_str();
  generalize->add_option("corpus", corpus_path)->required();

  auto* train = app.add_subcommand("train", "Train the reference classifier");
  train->add_option("--alpha", alpha)->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("corpus", corpus_path)->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a trained model on a corpus");
  eval->add_option("--model", model_path)->required();
  eval->add_option("corpus", corpus_path)->required();

  auto* polarize = app.add_subcommand("polarize", "Measure term polarization");
  polarize->add_option("--tau", tau)->capture_default_str()->check(CLI::NonNegativeNumber);
  polarize->add_option("--backend", backend_url, "Remote classifier base URL");
  polarize->add_option("--alpha", alpha)->capture_default_str()->check(CLI::PositiveNumber);
  polarize->add_option("--ontology", ontology_path)->capture_default_str();
  polarize->add_flag("--groups", groups_only, "Print the grouped 2-decimal view only");
  polarize->add_option("corpus", corpus_path)->required();

  auto* augment = app.add_subcommand("augment", "Predicate-synonym augmentation");
  augment->add_option("--mode", mode)->capture_default_str()->check(
      CLI::IsMember({"threshold", "standard"}));
  augment->add_option("--k", k)->capture_default_str()->check(CLI::PositiveNumber);
  auto* thesaurus_opt = augment->add_option("--thesaurus", thesaurus_path);
  auto* remote_opt = augment->add_option("--remote", remote_cfg, "Remote provider JSON config");
  thesaurus_opt->excludes(remote_opt);
  augment->add_option("--tau", tau)->capture_default_str()->check(CLI::NonNegativeNumber);
  augment->add_option("--backend", backend_url, "Remote classifier base URL");
  augment->add_option("--alpha", alpha)->capture_default_str()->check(CLI::PositiveNumber);
  augment->add_option("--ontology", ontology_path)->capture_default_str();
  augment->add_option("--categories", categories)->capture_default_str();
  augment->add_option("corpus", corpus_path)->required();

  auto* experiment = app.add_subcommand("experiment", "Run one strategy end to end");
  experiment->add_option("--strategy", strategy)->check(CLI::IsMember(
      {"baseline", "gen1", "gen2", "std-aug", "thr-aug", "ihta-gen1", "ihta-gen2"}));
  experiment->add_option("--config", config_path)->required();

  auto* correlate = app.add_subcommand("correlate", "Training-set size vs accuracy correlation");
  correlate->add_option("--sizes", sizes_list)->required();
  correlate->add_option("--config", config_path)->required();
  correlate->add_option("--n-perm", n_perm)->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus with planted term biases");
  synth->add_option("--n", synth_n)->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const auto fmt = g.fmt();
    if (*validate) {
      auto corpus = cbt::parse_corpus(read_file(corpus_path), corpus_path);
      if (fmt == cbt::Format::Json) {
        nlohmann::ordered_json j{{"valid", true}, {"records", corpus.size()}};
        cbt::write_output(g.out, j.dump(2) + "\n");
      } else {
        cbt::write_output(g.out, "valid,records\ntrue," + std::to_string(corpus.size()) + "\n");
      }
    } else if (*stats) {
      auto corpus = cbt::parse_corpus(read_file(corpus_path), corpus_path);
      if (unique) corpus = cbt::unique_view(corpus);
      cbt::write_output(g.out, cbt::emit_stats(cbt::category_stats(corpus), fmt));
    } else if (*kappa) {
      auto matrix = load_rating_matrix(read_file(annotations_path));
      if (matrix.empty()) throw cbt::Error(cbt::ErrorCode::EmptyInput, "no items");
      int raters = 0;
      for (int c : matrix.front()) raters += c;
      const double value = cbt::fleiss_kappa(matrix, raters);
      if (fmt == cbt::Format::Json) {
        nlohmann::ordered_json j{{"kappa", cbt::rounded(value)},
                                 {"items", matrix.size()},
                                 {"raters_per_item", raters}};
        cbt::write_output(g.out, j.dump(2) + "\n");
      } else {
        cbt::write_output(g.out, "kappa,items,raters_per_item\n" + cbt::fixed(value, 4) + "," +
                                     std::to_string(matrix.size()) + "," +
                                     std::to_string(raters) + "\n");
      }
    } else if (*generalize) {
      auto ontology = cbt::load_ontology(read_file(ontology_path));
      auto corpus = cbt::parse_corpus(read_file(corpus_path), corpus_path);
      auto result = cbt::generalize_corpus(
          corpus, ontology, level == 1 ? cbt::GeneralizationLevel::L1 : cbt::GeneralizationLevel::L2);
      if (result.unmapped > 0)
        note(g, "warning: " + std::to_string(result.unmapped) + " records with unmapped terms");
      cbt::write_output(g.out, cbt::serialize_corpus(result.corpus));
    } else if (*train) {
      auto corpus = cbt::parse_corpus(read_file(corpus_path), corpus_path);
      auto model = cbt::train_reference(corpus, alpha);
      cbt::write_output(g.out, model.to_json().dump() + "\n");
    } else if (*eval) {
      nlohmann::json mj;
      try {
        mj = nlohmann::json::parse(read_file(model_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw cbt::Error(cbt::ErrorCode::InvalidArgument, model_path + ": " + e.what());
      }
      auto model = cbt::ClassifierModel::from_json(mj);
      auto corpus = cbt::parse_corpus(read_file(corpus_path), corpus_path);
      auto metrics = cbt::evaluate(cbt::predict_labels(model, cbt::texts_of(corpus)),
                                   cbt::golds_of(corpus));
      cbt::write_output(g.out, cbt::emit_metrics(metrics, fmt));
    } else if (*polarize) {
      auto ontology = cbt::load_ontology(read_file(ontology_path));
      auto corpus = cbt::parse_corpus(read_file(corpus_path), corpus_path);
      auto predictor = make_predictor(backend_url, corpus, alpha);
      auto report = cbt::measure_all(*predictor, corpus, ontology);
      if (report.unknown_terms > 0)
        note(g, "warning: " + std::to_string(report.unknown_terms) + " terms not in ontology");
      auto selected = cbt::select_polarized(report.terms, tau);
      cbt::write_output(g.out, groups_only ? cbt::emit_group_table(report)
                                           : cbt::emit_polarization(report, selected, fmt));
    } else if (*augment) {
      const auto target_categories = parse_categories(categories);
      auto corpus = cbt::parse_corpus(read_file(corpus_path), corpus_path);
      std::optional<cbt::SynonymProvider> provider;
      if (!remote_cfg.empty()) {
        provider.emplace(load_remote_provider(remote_cfg));
      } else {
        provider.emplace(cbt::Thesaurus::load_file(
            thesaurus_path.empty() ? default_data("thesaurus.tsv") : thesaurus_path));
      }
      cbt::AugmentResult result;
      if (mode == "threshold") {
        auto ontology = cbt::load_ontology(read_file(ontology_path));
        auto predictor = make_predictor(backend_url, corpus, alpha);
        auto report = cbt::measure_all(*predictor, corpus, ontology);
        auto selected = cbt::select_polarized(report.terms, tau);
        note(g, std::to_string(selected.size()) + " polarized terms selected");
        result = cbt::threshold_augment(corpus, selected, *provider, k);
      } else {
        result = cbt::standard_augment(corpus, target_categories, *provider, k);
      }
      report_warnings(g, result.warnings);
      note(g, std::to_string(result.augmented) + " augmented records");
      cbt::write_output(g.out, cbt::serialize_corpus(result.corpus));
    } else if (*experiment) {
      auto config = cbt::load_config(config_path);
      if (!strategy.empty()) config.strategy = *cbt::try_parse_strategy(strategy);
      if (g.seed) config.seed = *g.seed;
      auto report = cbt::run_experiment(config);
      report_warnings(g, report.warnings);
      cbt::write_output(g.out, cbt::emit_report(report, fmt, g.timing));
    } else if (*correlate) {
      auto config = cbt::load_config(config_path);
      if (g.seed) config.seed = *g.seed;
      auto corpus = cbt::load_corpus_file(config.resolve(config.corpus_path));
      auto points = cbt::accuracy_vs_size(corpus, parse_sizes(sizes_list), config);
      std::vector<double> xs, ys;
      for (const auto& p : points) {
        xs.push_back(static_cast<double>(p.size));
        ys.push_back(p.accuracy);
      }
      auto result = cbt::correlate(xs, ys, n_perm, config.seed);
      cbt::write_output(g.out, cbt::emit_correlation(points, result, fmt));
    } else if (*synth) {
      cbt::synthetic::Options options;
      options.n = synth_n;
      options.seed = g.seed.value_or(42);
      cbt::write_output(g.out, cbt::serialize_corpus(cbt::synthetic::generate(options)));
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cbt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cbt::is_backend_error(e.code()) ? kExitBackend : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
