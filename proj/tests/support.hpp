#ifndef CBT_TESTS_SUPPORT_HPP
#define CBT_TESTS_SUPPORT_HPP

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <httplib.h>

#include "cbt/cbt.hpp"

#define EXPECT_CBT_ERROR(statement, expected_code)                                \
  do {                                                                          \
    try {                                                                       \
      statement;                                                                \
      ADD_FAILURE() << "expected " << ::cbt::to_string(expected_code);          \
    } catch (const ::cbt::Error& e) {                                           \
      EXPECT_EQ(e.code(), expected_code) << e.what();                           \
    }                                                                           \
  } while (0)

namespace cbt::test {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(CBT_DATA_DIR) / name;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SentenceRecord make_record(std::string id, std::string subject, std::string predicate,
                                  std::string object, Category category,
                                  std::vector<Label> labels = {Label::Neutral}) {
  SentenceRecord r;
  r.id = std::move(id);
  r.subject = std::move(subject);
  r.predicate = std::move(predicate);
  r.object = std::move(object);
  r.text = render_tuple(r.subject, r.predicate, r.object);
  r.category = category;
  r.term = r.subject;
  r.annotator_labels = std::move(labels);
  r.gold = majority_gold(r.annotator_labels);
  return r;
}

inline Corpus bundled_corpus() { return parse_corpus(slurp(data_path("synthetic_500.jsonl"))); }
inline TermOntology bundled_ontology() { return load_ontology(slurp(data_path("ontology.tsv"))); }
inline Thesaurus bundled_thesaurus() { return Thesaurus::load_file(data_path("thesaurus.tsv")); }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cbt-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Local HTTP server on an ephemeral port; routes are registered by `setup`
/// before it starts listening.
class MockServer {
 public:
  explicit MockServer(const std::function<void(httplib::Server&)>& setup) {
    setup(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

/// A port that nothing listens on: bound once, then released.
inline int closed_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

/// Predictor returning a fixed label per text, looked up in a table.
class TablePredictor : public Predictor {
 public:
  explicit TablePredictor(std::map<std::string, Label> table, Label fallback = Label::Neutral)
      : table_(std::move(table)), fallback_(fallback) {}
  std::vector<LabelDistribution> predict_batch(std::span<const std::string> texts) const override {
    std::vector<LabelDistribution> out;
    for (const auto& t : texts) {
      auto it = table_.find(t);
      LabelDistribution d;
      d.probs[index_of(it == table_.end() ? fallback_ : it->second)] = 1.0;
      out.push_back(d);
    }
    return out;
  }

 private:
  std::map<std::string, Label> table_;
  Label fallback_;
};

}  // namespace cbt::test

#endif
