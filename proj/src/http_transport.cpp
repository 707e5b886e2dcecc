#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include <json.hpp>

#include "robagg/error.hpp"
#include "robagg/llm.hpp"

namespace robagg {
namespace {

class HttpTransport : public Transport {
 public:
  std::string complete(const EndpointConfig& endpoint, const LlmRequest& request) override {
    const char* key = std::getenv(endpoint.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ServiceError(ServiceErrorKind::kAuth,
                         "environment variable " + endpoint.api_key_env + " is not set");
    }
    // Split "scheme://host[:port]/prefix".
    const auto scheme_end = endpoint.base_url.find("://");
    if (scheme_end == std::string::npos) {
      throw ValidationError("base URL needs a scheme: " + endpoint.base_url);
    }
    const auto path_start = endpoint.base_url.find('/', scheme_end + 3);
    const std::string origin = endpoint.base_url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : endpoint.base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

    httplib::Client client(origin);
    client.set_connection_timeout(endpoint.timeout);
    client.set_read_timeout(endpoint.timeout);
    client.set_bearer_token_auth(key);
    const nlohmann::json body = {
        {"model", request.model},
        {"temperature", request.temperature},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})}};
    const auto res = client.Post(prefix + "/chat/completions", body.dump(), "application/json");
    if (!res) {
      throw ServiceError(ServiceErrorKind::kTransport,
                         "request failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) {
      throw ServiceError(ServiceErrorKind::kAuth, "HTTP " + std::to_string(res->status));
    }
    if (res->status == 429) {
      throw ServiceError(ServiceErrorKind::kRateLimit, "HTTP 429");
    }
    if (res->status >= 500) {
      throw ServiceError(ServiceErrorKind::kTransport, "HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw ServiceError(ServiceErrorKind::kMalformed,
                         "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      throw ServiceError(ServiceErrorKind::kMalformed, std::string("unexpected response: ") + e.what());
    }
  }
};

}  // namespace

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<HttpTransport>(); }

}  // namespace robagg
