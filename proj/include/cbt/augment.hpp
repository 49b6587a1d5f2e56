#ifndef CBT_AUGMENT_HPP
#define CBT_AUGMENT_HPP

// Predicate-synonym augmentation. Synonyms come from a thesaurus file or an
// OpenAI-compatible chat-completions endpoint fronted by an on-disk cache.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include <openssl/evp.h>
#include <unistd.h>

#include <json.hpp>

#include "cbt/corpus.hpp"
#include "cbt/error.hpp"
#include "cbt/http.hpp"
#include "cbt/text.hpp"

namespace cbt {

/// Per-kind counters of soft failures.
struct Warnings {
  std::map<std::string, std::size_t> counts;

  void add(const std::string& kind, std::size_t n = 1) {
    if (n > 0) counts[kind] += n;
  }
  void merge(const Warnings& other) {
    for (const auto& [k, v] : other.counts) counts[k] += v;
  }
  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& [k, v] : counts) t += v;
    return t;
  }
};

// ---------------------------------------------------------------------------
// Thesaurus

class Thesaurus {
 public:
  /// "predicate\tsyn1|syn2|..." per line; '#' comments and blank lines are
  /// skipped. Repeated predicates extend the earlier row.
  static Thesaurus load(std::istream& in) {
    Thesaurus t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw Error(ErrorCode::MalformedRow, "thesaurus line " + std::to_string(line_no));
      const std::string key = ascii_fold(nfc(trim(line.substr(0, tab))));
      if (key.empty())
        throw Error(ErrorCode::MalformedRow, "thesaurus line " + std::to_string(line_no));
      auto& list = t.rows_[key];
      for (const auto& raw : split(line.substr(tab + 1), '|')) {
        std::string syn = nfc(trim(raw));
        if (syn.empty()) continue;
        if (std::find(list.begin(), list.end(), syn) == list.end()) list.push_back(std::move(syn));
      }
    }
    return t;
  }

  static Thesaurus load(std::string_view content) {
    std::istringstream in{std::string(content)};
    return load(in);
  }

  static Thesaurus load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    return load(in);
  }

  const std::vector<std::string>* row(std::string_view predicate) const {
    auto it = rows_.find(ascii_fold(predicate));
    return it == rows_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return rows_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> rows_;
};

/// Synonyms listed for the case-folded predicate, in file order, without the
/// predicate itself.
inline std::vector<std::string> synonyms_thesaurus(std::string_view predicate,
                                                   const Thesaurus& table) {
  std::vector<std::string> out;
  const auto* row = table.row(predicate);
  if (!row) return out;
  const std::string self = ascii_fold(trim(predicate));
  for (const auto& syn : *row)
    if (ascii_fold(syn) != self) out.push_back(syn);
  return out;
}

// ---------------------------------------------------------------------------
// Remote provider

inline constexpr std::string_view kPromptVersion = "cbt-synonyms/1";

inline std::string render_synonym_prompt(std::string_view predicate, std::string_view sentence,
                                         std::size_t k) {
  std::string prompt = "Give ";
  prompt += std::to_string(k);
  prompt += " synonyms for the verb phrase '";
  prompt += predicate;
  prompt += "' that preserve its meaning in the sentence '";
  prompt += sentence;
  prompt += "'. Answer with a comma-separated list only.";
  return prompt;
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoError, "sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

struct RemoteProviderConfig {
  std::string endpoint;      // full chat-completions URL
  std::string model;
  std::string api_key_env;   // name of the environment variable, never its value
  std::filesystem::path cache_dir;
  double timeout_s = 60.0;
  int retries = 2;
  int backoff_ms = 200;
};

/// One JSON file per request, named by the SHA-256 of (endpoint, model,
/// prompt). Writes go to a temporary file that is renamed into place.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  static std::string key(std::string_view endpoint, std::string_view model,
                         std::string_view prompt) {
    std::string material;
    material.append(endpoint).push_back('\0');
    material.append(model).push_back('\0');
    material.append(prompt);
    return sha256_hex(material);
  }

  std::filesystem::path path_for(const std::string& key) const { return dir_ / (key + ".json"); }

  std::optional<std::string> get(const std::string& key) const {
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    try {
      auto j = nlohmann::json::parse(in);
      return j.at("response").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  }

  void put(const std::string& key, const nlohmann::ordered_json& entry) const {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    std::ostringstream suffix;
    suffix << ".tmp." << ::getpid() << "." << std::this_thread::get_id();
    const auto final_path = path_for(key);
    auto tmp = final_path;
    tmp += suffix.str();
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::UnwritablePath, tmp.string());
      out << entry.dump(2) << '\n';
      if (!out) throw Error(ErrorCode::UnwritablePath, tmp.string());
    }
    std::filesystem::rename(tmp, final_path, ec);
    if (ec) {
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::UnwritablePath, final_path.string());
    }
  }

 private:
  std::filesystem::path dir_;
};

namespace augment_detail {

inline bool allowed_synonym_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == ' ' || c == '-' || c >= 0x80;
}

/// Lower-cased, trimmed synonym, or nullopt when it is not a short
/// well-formed phrase (at most 4 words, no punctuation but inner hyphens).
inline std::optional<std::string> sanitize(std::string_view raw) {
  std::string s = trim(raw);
  while (!s.empty() && (s.back() == '.' || s.back() == '"' || s.back() == '\'')) s.pop_back();
  while (!s.empty() && (s.front() == '"' || s.front() == '\'')) s.erase(s.begin());
  s = ascii_fold(trim(s));
  if (s.empty() || s.front() == '-' || s.back() == '-') return std::nullopt;
  std::size_t words = 1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (!allowed_synonym_char(c)) return std::nullopt;
    if (c == ' ') {
      if (s[i - 1] == ' ') return std::nullopt;
      ++words;
    }
    if (c == '-' && (s[i - 1] == ' ' || s[i + 1] == ' ')) return std::nullopt;
  }
  if (words > 4) return std::nullopt;
  return s;
}

inline std::string chat_content(const std::string& body) {
  try {
    auto j = nlohmann::json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::UnparseableResponse, "not a chat-completions response");
  }
}

}  // namespace augment_detail

/// Parses a comma-separated synonym list: trims, case-folds, deduplicates,
/// drops the predicate and malformed items, and keeps at most k.
inline std::vector<std::string> parse_synonym_list(std::string_view response,
                                                   std::string_view predicate, std::size_t k) {
  std::vector<std::string> out;
  const std::string self = ascii_fold(trim(predicate));
  for (const auto& item : split(response, ',')) {
    auto syn = augment_detail::sanitize(item);
    if (!syn || *syn == self) continue;
    if (std::find(out.begin(), out.end(), *syn) != out.end()) continue;
    out.push_back(std::move(*syn));
    if (out.size() == k) break;
  }
  if (out.empty())
    throw Error(ErrorCode::UnparseableResponse, std::string(response.substr(0, 80)));
  return out;
}

/// Fetches synonyms from the chat endpoint at temperature 0. The raw body is
/// cached before parsing, so a cached entry is reused even when unparseable.
inline std::vector<std::string> synonyms_remote(std::string_view predicate,
                                                std::string_view context_sentence, std::size_t k,
                                                const RemoteProviderConfig& config) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const std::string prompt = render_synonym_prompt(predicate, context_sentence, k);
  ResponseCache cache(config.cache_dir);
  const std::string key = ResponseCache::key(config.endpoint, config.model, prompt);
  std::optional<std::string> body = cache.get(key);
  if (!body) {
    nlohmann::ordered_json request;
    request["model"] = config.model;
    request["temperature"] = 0;
    request["messages"] = nlohmann::ordered_json::array(
        {nlohmann::ordered_json{{"role", "user"}, {"content", prompt}}});
    HttpOptions options;
    options.timeout_s = config.timeout_s;
    options.retries = config.retries;
    options.backoff_ms = config.backoff_ms;
    if (!config.api_key_env.empty()) {
      if (const char* secret = std::getenv(config.api_key_env.c_str()); secret && *secret)
        options.headers.emplace_back("Authorization", std::string("Bearer ") + secret);
    }
    const Endpoint endpoint = parse_endpoint(config.endpoint);
    body = post_json(endpoint, endpoint.path, request.dump(), options);
    nlohmann::ordered_json entry;
    entry["prompt_version"] = kPromptVersion;
    entry["endpoint"] = config.endpoint;
    entry["model"] = config.model;
    entry["prompt"] = prompt;
    entry["response"] = *body;
    cache.put(key, entry);
  }
  return parse_synonym_list(augment_detail::chat_content(*body), predicate, k);
}

/// Where synonyms come from. Both kinds are deterministic given their
/// configuration (and, for Remote, the cache contents).
class SynonymProvider {
 public:
  explicit SynonymProvider(Thesaurus thesaurus) : source_(std::move(thesaurus)) {}
  explicit SynonymProvider(RemoteProviderConfig remote) : source_(std::move(remote)) {}

  std::string kind() const {
    return std::holds_alternative<Thesaurus>(source_) ? "thesaurus" : "remote";
  }

  std::vector<std::string> synonyms(const SentenceRecord& record, std::size_t k) const {
    if (const auto* t = std::get_if<Thesaurus>(&source_)) {
      auto all = synonyms_thesaurus(record.predicate, *t);
      if (all.size() > k) all.resize(k);
      return all;
    }
    return synonyms_remote(record.predicate, record.text, k,
                           std::get<RemoteProviderConfig>(source_));
  }

 private:
  std::variant<Thesaurus, RemoteProviderConfig> source_;
};

// ---------------------------------------------------------------------------
// Augmentation

/// Copy of `record` with the predicate replaced and text re-rendered from the
/// tuple. Everything else, labels included, is carried over.
inline SentenceRecord augment_record(const SentenceRecord& record, std::string_view synonym,
                                     std::string_view provider_kind = "thesaurus") {
  const std::string replacement = trim(synonym);
  if (replacement.empty() || ascii_fold(replacement) == ascii_fold(trim(record.predicate)))
    throw Error(ErrorCode::IdenticalPredicate, record.id + ": " + std::string(synonym));
  SentenceRecord out = record;
  out.predicate = replacement;
  out.text = render_tuple(out.subject, out.predicate, out.object);
  std::string slug = replacement;
  for (char& c : slug)
    if (c == ' ') c = '-';
  out.id = record.id + "~" + slug;
  out.provenance = AugmentedSource{record.id, replacement, std::string(provider_kind)};
  if (!contains_whole_word(out.text, out.term)) throw Error(ErrorCode::TermNotInText, out.id);
  return out;
}

struct AugmentResult {
  Corpus corpus;
  Warnings warnings;
  std::size_t augmented = 0;
};

/// Originals first, then augmented records in (source order, synonym order).
/// An augmented record is dropped when its (text, gold) already exists.
inline AugmentResult augment_where(const Corpus& corpus,
                                   const std::function<bool(const SentenceRecord&)>& eligible,
                                   const SynonymProvider& provider, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  AugmentResult result;
  result.corpus = corpus;
  std::set<std::pair<std::string, Label>> seen;
  std::unordered_set<std::string> ids;
  for (const auto& r : corpus.records) {
    seen.emplace(r.text, r.gold);
    ids.insert(r.id);
  }
  const std::string kind = provider.kind();
  for (const auto& r : corpus.records) {
    if (!eligible(r)) continue;
    std::vector<std::string> synonyms;
    try {
      synonyms = provider.synonyms(r, k);
    } catch (const Error& e) {
      result.warnings.add("provider:" + std::string(to_string(e.code())));
      continue;
    }
    for (const auto& syn : synonyms) {
      SentenceRecord a;
      try {
        a = augment_record(r, syn, kind);
      } catch (const Error& e) {
        result.warnings.add("augment:" + std::string(to_string(e.code())));
        continue;
      }
      if (!seen.emplace(a.text, a.gold).second) {
        result.warnings.add("duplicate_text");
        continue;
      }
      const std::string base_id = a.id;
      for (int n = 2; !ids.insert(a.id).second; ++n) a.id = base_id + "#" + std::to_string(n);
      result.corpus.records.push_back(std::move(a));
      ++result.augmented;
    }
  }
  return result;
}

/// Augments records whose term is in `polarized_terms` (case-insensitive).
inline AugmentResult threshold_augment(const Corpus& corpus,
                                       const std::set<std::string>& polarized_terms,
                                       const SynonymProvider& provider, std::size_t k) {
  std::set<std::string> keys;
  for (const auto& t : polarized_terms) keys.insert(ascii_fold(t));
  return augment_where(
      corpus, [&](const SentenceRecord& r) { return keys.contains(ascii_fold(r.term)); },
      provider, k);
}

inline std::set<Category> default_target_categories() {
  return {Category::Gender, Category::Religion};
}

/// Augments every record in the target categories, with no polarization gate.
inline AugmentResult standard_augment(const Corpus& corpus,
                                      const std::set<Category>& target_categories,
                                      const SynonymProvider& provider, std::size_t k) {
  return augment_where(
      corpus, [&](const SentenceRecord& r) { return target_categories.contains(r.category); },
      provider, k);
}

}  // namespace cbt

#endif  // CBT_AUGMENT_HPP
