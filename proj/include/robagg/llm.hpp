#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "robagg/experiments.hpp"

namespace robagg {

struct EndpointConfig {
  std::string base_url;  // e.g. https://api.example.com/v1
  std::string model;
  std::string api_key_env = "ROBAGG_API_KEY";
  int max_retries = 5;
  std::chrono::milliseconds base_backoff{500};
  std::chrono::seconds timeout{60};
};

struct LlmRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  int sample_index = 0;
};

// Transient failures (rate limits, transport errors, 5xx) are retried; the
// transport signals them by throwing ServiceError with kRateLimit or
// kTransport. kAuth and kMalformed are final.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string complete(const EndpointConfig& endpoint, const LlmRequest& request) = 0;
};

// Chat-completions over HTTP(S). The key is read from endpoint.api_key_env.
std::unique_ptr<Transport> make_http_transport();

class MockTransport : public Transport {
 public:
  using Handler = std::function<std::string(const LlmRequest&)>;
  explicit MockTransport(Handler handler) : handler_(std::move(handler)) {}
  std::string complete(const EndpointConfig&, const LlmRequest& request) override {
    ++calls_;
    return handler_(request);
  }
  long calls() const { return calls_; }

 private:
  Handler handler_;
  std::atomic<long> calls_{0};
};

std::string sha256_hex(const std::string& text);

// Append-only JSONL cache keyed by (model, prompt hash, temperature, sample).
class ResponseCache {
 public:
  // Empty path: memory only. Unreadable lines are skipped with a warning.
  explicit ResponseCache(std::filesystem::path path = {});

  static std::string key(const LlmRequest& request);
  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const LlmRequest& request, const std::string& response);
  std::size_t size() const;
  std::size_t skipped_lines() const { return skipped_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::size_t skipped_ = 0;
};

// Cache lookup, then the transport with exponential backoff.
std::string llm_query(const EndpointConfig& endpoint, Transport& transport, ResponseCache& cache,
                      const std::string& prompt, double temperature, int sample_index);

enum class AnswerMode { kBinaryLR, kOptionLetter };

// Last <answer>...</answer> span. L -> 1, R -> 0; letters A.. -> 0.. below m.
int parse_answer(const std::string& text, AnswerMode mode, int option_count = 2);

// Replaces every {name}; throws ValidationError for a placeholder without a value.
std::string render_template(const std::string& text, const std::map<std::string, std::string>& values);

std::string load_text(const std::filesystem::path& path);

// Prompt text for a box-ball scenario from the decision template.
std::string bayes_prompt(const std::string& tmpl, const BoxBallScenario& s);

struct McqaItem {
  std::string id;
  std::string question;
  std::vector<std::string> options;
  int answer = 0;
};

std::string mcqa_prompt(const std::string& tmpl, const McqaItem& item);

}  // namespace robagg
