#include "robagg/llm.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "robagg/error.hpp"

namespace robagg {

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      entries_[j.at("key").get<std::string>()] = j.at("response").get<std::string>();
    } catch (const std::exception& e) {
      ++skipped_;
      std::cerr << "warning: cache " << path_.string() << ":" << lineno
                << " unreadable, treated as a miss (" << e.what() << ")\n";
    }
  }
}

std::string ResponseCache::key(const LlmRequest& r) {
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.17g", r.temperature);
  return r.model + "|" + sha256_hex(r.prompt) + "|" + temp + "|" + std::to_string(r.sample_index);
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const std::string& key, const LlmRequest& r, const std::string& response) {
  std::lock_guard lock(mutex_);
  entries_[key] = response;
  if (path_.empty()) return;
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  nlohmann::json j = {{"key", key},
                      {"model", r.model},
                      {"prompt_sha256", sha256_hex(r.prompt)},
                      {"temperature", r.temperature},
                      {"sample_index", r.sample_index},
                      {"response", response},
                      {"timestamp", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
  std::ofstream out(path_, std::ios::app);
  out << j.dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot append to cache " + path_.string());
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string llm_query(const EndpointConfig& endpoint, Transport& transport, ResponseCache& cache,
                      const std::string& prompt, double temperature, int sample_index) {
  const LlmRequest request{endpoint.model, prompt, temperature, sample_index};
  const std::string key = ResponseCache::key(request);
  if (auto hit = cache.get(key)) return *hit;

  for (int attempt = 0;; ++attempt) {
    try {
      std::string text = transport.complete(endpoint, request);
      cache.put(key, request, text);
      return text;
    } catch (const ServiceError& e) {
      const bool transient =
          e.kind() == ServiceErrorKind::kRateLimit || e.kind() == ServiceErrorKind::kTransport;
      if (!transient || attempt >= endpoint.max_retries) throw;
      std::this_thread::sleep_for(endpoint.base_backoff * (1L << attempt));
    }
  }
}

int parse_answer(const std::string& text, AnswerMode mode, int option_count) {
  static const std::string open = "<answer>";
  static const std::string close = "</answer>";
  const auto end = text.rfind(close);
  if (end == std::string::npos) throw ParseError("no </answer> tag", text);
  const auto begin = text.rfind(open, end);
  if (begin == std::string::npos) throw ParseError("no <answer> tag", text);
  std::string body = text.substr(begin + open.size(), end - begin - open.size());
  const auto first = body.find_first_not_of(" \t\r\n");
  const auto last = body.find_last_not_of(" \t\r\n");
  body = first == std::string::npos ? "" : body.substr(first, last - first + 1);
  if (body.size() != 1) throw ParseError("answer is not a single letter", text);
  const char c = body[0];
  if (mode == AnswerMode::kBinaryLR) {
    if (c == 'L') return 1;
    if (c == 'R') return 0;
    throw ParseError("answer is neither L nor R", text);
  }
  if (c < 'A' || c >= 'A' + option_count) throw ParseError("answer letter out of range", text);
  return c - 'A';
}

std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string::npos) break;
    const auto close = text.find('}', open);
    if (close == std::string::npos) break;
    out.append(text, pos, open - pos);
    const std::string name = text.substr(open + 1, close - open - 1);
    const auto it = values.find(name);
    if (it == values.end()) throw ValidationError("template placeholder {" + name + "} has no value");
    out += it->second;
    pos = close + 1;
  }
  out.append(text, pos, std::string::npos);
  return out;
}

std::string load_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string bayes_prompt(const std::string& tmpl, const BoxBallScenario& s) {
  const auto balls = [](double frac) { return std::to_string(std::lround(100.0 * frac)); };
  const auto percent = [](double frac) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << 100.0 * frac;
    return os.str();
  };
  return render_template(tmpl, {{"left_red", balls(s.red_given_left)},
                                {"left_blue", balls(1.0 - s.red_given_left)},
                                {"right_red", balls(s.red_given_right)},
                                {"right_blue", balls(1.0 - s.red_given_right)},
                                {"left_probability", percent(s.prior_left)},
                                {"right_probability", percent(1.0 - s.prior_left)},
                                {"color", to_string(s.drawn_color)}});
}

std::string mcqa_prompt(const std::string& tmpl, const McqaItem& item) {
  std::string options;
  for (std::size_t k = 0; k < item.options.size(); ++k) {
    if (k) options += '\n';
    options += static_cast<char>('A' + k);
    options += ") " + item.options[k];
  }
  return render_template(tmpl, {{"question_str", item.question}, {"options_str", options}});
}

}  // namespace robagg
