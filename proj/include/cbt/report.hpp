#ifndef CBT_REPORT_HPP
#define CBT_REPORT_HPP

// JSON and CSV emission. Field order is fixed and every real is written with
// explicit precision: 4 decimals in reports, 2 in grouped polarization views.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cbt/classifier.hpp"
#include "cbt/corpus.hpp"
#include "cbt/correlation.hpp"
#include "cbt/error.hpp"
#include "cbt/pipeline.hpp"
#include "cbt/polarization.hpp"

namespace cbt {

enum class Format { Json, Csv };

inline constexpr int kReportDecimals = 4;
inline constexpr int kGroupDecimals = 2;

/// Fixed-point text with `digits` decimals; negative zero prints unsigned.
inline std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

/// The double closest to the fixed-point rendering, so JSON and CSV carry the
/// same number.
inline double rounded(double value, int digits = kReportDecimals) {
  return std::stod(fixed(value, digits));
}

inline std::string group_label(std::string_view group, double p_signed) {
  return std::string(group) + " (" + fixed(p_signed, kGroupDecimals) + ")";
}

namespace report_detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void metric_rows(std::ostringstream& out, std::string_view scope, const Metrics& m) {
  auto row = [&](std::string_view metric, const std::string& value) {
    out << scope << ',' << metric << ',' << value << '\n';
  };
  row("n", std::to_string(m.n));
  row("accuracy", fixed(m.accuracy, kReportDecimals));
  row("weighted_precision", fixed(m.weighted_precision, kReportDecimals));
  row("weighted_recall", fixed(m.weighted_recall, kReportDecimals));
  row("weighted_f1", fixed(m.weighted_f1, kReportDecimals));
  for (Label l : kAllLabels) {
    const auto& pc = m.per_class[index_of(l)];
    const std::string prefix(to_string(l));
    row(prefix + ".precision", fixed(pc.precision, kReportDecimals));
    row(prefix + ".recall", fixed(pc.recall, kReportDecimals));
    row(prefix + ".f1", fixed(pc.f1, kReportDecimals));
    row(prefix + ".support", std::to_string(pc.support));
  }
}

}  // namespace report_detail

inline nlohmann::ordered_json metrics_to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["n"] = m.n;
  j["accuracy"] = rounded(m.accuracy);
  j["weighted_precision"] = rounded(m.weighted_precision);
  j["weighted_recall"] = rounded(m.weighted_recall);
  j["weighted_f1"] = rounded(m.weighted_f1);
  nlohmann::ordered_json per_class;
  for (Label l : kAllLabels) {
    const auto& pc = m.per_class[index_of(l)];
    per_class[std::string(to_string(l))] = {{"precision", rounded(pc.precision)},
                                            {"recall", rounded(pc.recall)},
                                            {"f1", rounded(pc.f1)},
                                            {"support", pc.support}};
  }
  j["per_class"] = std::move(per_class);
  return j;
}

inline std::string emit_metrics(const Metrics& m, Format format) {
  if (format == Format::Json) return metrics_to_json(m).dump(2) + "\n";
  std::ostringstream out;
  out << "scope,metric,value\n";
  report_detail::metric_rows(out, "overall", m);
  return out.str();
}

inline std::string emit_stats(const CategoryStats& stats, Format format) {
  if (format == Format::Json) {
    nlohmann::ordered_json j;
    j["total"] = stats.total;
    j["unique_texts"] = stats.unique_texts;
    auto cats = nlohmann::ordered_json::array();
    for (Category c : kAllCategories)
      cats.push_back({{"category", to_string(c)},
                      {"count", stats.counts[index_of(c)]},
                      {"share", rounded(stats.shares[index_of(c)])}});
    j["categories"] = std::move(cats);
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "category,count,share\n";
  for (Category c : kAllCategories)
    out << to_string(c) << ',' << stats.counts[index_of(c)] << ','
        << fixed(stats.shares[index_of(c)], kReportDecimals) << '\n';
  out << "total," << stats.total << ',' << fixed(stats.total ? 1.0 : 0.0, kReportDecimals) << '\n';
  return out.str();
}

inline nlohmann::ordered_json polarization_to_json(const PolarizationReport& report,
                                                   const std::set<std::string>& selected) {
  nlohmann::ordered_json j;
  auto terms = nlohmann::ordered_json::array();
  for (const auto& t : report.terms)
    terms.push_back({{"term", t.term},
                     {"n_total", t.n_total},
                     {"n_pos", t.n_changed_positive},
                     {"n_neg", t.n_changed_negative},
                     {"p_signed", rounded(t.p_signed)}});
  j["terms"] = std::move(terms);
  auto groups = nlohmann::ordered_json::array();
  nlohmann::ordered_json table = nlohmann::ordered_json::object();
  for (const auto& g : report.groups) {
    groups.push_back({{"group", g.group},
                      {"category", to_string(g.category)},
                      {"n_total", g.n_total},
                      {"p_signed", rounded(g.p_signed)}});
    table[std::string(to_string(g.category))].push_back(group_label(g.group, g.p_signed));
  }
  j["groups"] = std::move(groups);
  j["table"] = std::move(table);
  j["selected"] = std::vector<std::string>(selected.begin(), selected.end());
  j["unknown_terms"] = report.unknown_terms;
  return j;
}

inline std::string emit_polarization(const PolarizationReport& report,
                                     const std::set<std::string>& selected, Format format) {
  if (format == Format::Json) return polarization_to_json(report, selected).dump(2) + "\n";
  std::ostringstream out;
  out << "term,n_total,n_pos,n_neg,p_signed\n";
  for (const auto& t : report.terms)
    out << report_detail::csv_field(t.term) << ',' << t.n_total << ',' << t.n_changed_positive
        << ',' << t.n_changed_negative << ',' << fixed(t.p_signed, kReportDecimals) << '\n';
  return out.str();
}

/// Grouped view: one line per category, "Group (value)" entries at 2 decimals.
inline std::string emit_group_table(const PolarizationReport& report) {
  std::ostringstream out;
  for (Category c : kAllCategories) {
    std::string line;
    for (const auto& g : report.groups) {
      if (g.category != c) continue;
      if (!line.empty()) line += ", ";
      line += group_label(g.group, g.p_signed);
    }
    if (!line.empty()) out << to_string(c) << '\t' << line << '\n';
  }
  return out.str();
}

inline nlohmann::ordered_json report_to_json(const ExperimentReport& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["version"] = r.version;
  j["strategy"] = to_string(r.strategy);
  j["config"] = r.config;
  j["sizes"] = {{"corpus", r.corpus_size},
                {"train_before", r.train_size_before},
                {"train_after", r.train_size_after},
                {"test", r.test_size}};
  nlohmann::ordered_json metrics;
  metrics["overall"] = metrics_to_json(r.overall);
  nlohmann::ordered_json per_category = nlohmann::ordered_json::object();
  for (const auto& [c, m] : r.per_category) per_category[std::string(to_string(c))] = metrics_to_json(m);
  metrics["per_category"] = std::move(per_category);
  j["metrics"] = std::move(metrics);
  if (r.polarization) {
    std::set<std::string> selected(r.selected_terms.begin(), r.selected_terms.end());
    j["polarization"] = polarization_to_json(*r.polarization, selected);
  }
  auto stages = nlohmann::ordered_json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"stage", s.stage},
                      {"detail", s.detail},
                      {"records_in", s.records_in},
                      {"records_out", s.records_out}});
  j["stages"] = std::move(stages);
  auto augmented = nlohmann::ordered_json::array();
  for (const auto& a : r.augmented)
    augmented.push_back({{"id", a.id}, {"source_id", a.source_id}, {"synonym", a.synonym}});
  j["augmented"] = std::move(augmented);
  j["test_digest"] = r.test_digest;
  nlohmann::ordered_json warnings = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.warnings.counts) warnings[k] = v;
  j["warnings"] = std::move(warnings);
  if (include_timing) j["duration_ms"] = rounded(r.duration_ms, 1);
  return j;
}

/// Wall-clock duration is left out unless `include_timing` is set, so that
/// identical runs produce identical bytes.
inline std::string emit_report(const ExperimentReport& r, Format format,
                               bool include_timing = false) {
  if (format == Format::Json) return report_to_json(r, include_timing).dump(2) + "\n";
  std::ostringstream out;
  out << "scope,metric,value\n";
  out << "sizes,corpus," << r.corpus_size << '\n';
  out << "sizes,train_before," << r.train_size_before << '\n';
  out << "sizes,train_after," << r.train_size_after << '\n';
  out << "sizes,test," << r.test_size << '\n';
  report_detail::metric_rows(out, "overall", r.overall);
  for (const auto& [c, m] : r.per_category) report_detail::metric_rows(out, to_string(c), m);
  if (include_timing) out << "timing,duration_ms," << fixed(r.duration_ms, 1) << '\n';
  return out.str();
}

inline std::string emit_correlation(const std::vector<SizePoint>& points,
                                    const CorrelationResult& result, Format format) {
  if (format == Format::Json) {
    nlohmann::ordered_json j;
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : points) pts.push_back({{"size", p.size}, {"accuracy", rounded(p.accuracy)}});
    j["points"] = std::move(pts);
    j["r"] = rounded(result.r);
    j["p_value"] = rounded(result.p_value);
    j["n_points"] = result.n_points;
    j["n_permutations"] = result.n_permutations;
    j["seed"] = result.seed;
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "kind,key,value\n";
  for (const auto& p : points) out << "point," << p.size << ',' << fixed(p.accuracy, kReportDecimals) << '\n';
  out << "stat,r," << fixed(result.r, kReportDecimals) << '\n';
  out << "stat,p_value," << fixed(result.p_value, kReportDecimals) << '\n';
  out << "stat,n_points," << result.n_points << '\n';
  out << "stat,n_permutations," << result.n_permutations << '\n';
  out << "stat,seed," << result.seed << '\n';
  return out.str();
}

/// Writes to `path`, or to stdout when the path is empty.
inline void write_output(const std::filesystem::path& path, std::string_view content) {
  if (path.empty()) {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::UnwritablePath, path.string());
  out << content;
  if (!out) throw Error(ErrorCode::UnwritablePath, path.string());
}

}  // namespace cbt

#endif  // CBT_REPORT_HPP
