#include "absorb/chat_client.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>

#include "absorb/error.hpp"

namespace absorb::qagen {

Json ChatRequest::to_json() const {
  return {{"model", model},
          {"messages", Json::array({{{"role", "user"}, {"content", prompt}}})},
          {"temperature", temperature},
          {"max_tokens", max_tokens}};
}

Json ChatResponse::to_json() const {
  return {{"text", text},
          {"finish_reason", finish_reason},
          {"usage", {{"prompt_tokens", prompt_tokens}, {"completion_tokens", completion_tokens}}}};
}

ChatResponse ChatResponse::from_json(const Json& j) {
  ChatResponse r;
  r.text = j.value("text", "");
  r.finish_reason = j.value("finish_reason", "");
  if (j.contains("usage")) {
    r.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
    r.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
  }
  return r;
}

ChatClient::ChatClient(ChatOptions options) : opts_(std::move(options)) {
  if (opts_.url.empty()) throw_usage("no chat endpoint configured (set ABSORB_CHAT_URL or --chat-url)");
  std::size_t scheme = opts_.url.find("://");
  if (scheme == std::string::npos) throw_usage("chat endpoint must start with http:// or https://: " + opts_.url);
  std::size_t slash = opts_.url.find('/', scheme + 3);
  origin_ = opts_.url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : opts_.url.substr(slash);
  if (path_ == "/") path_ = "/v1/chat/completions";
  int slots = std::clamp(opts_.max_in_flight, 1, 1024);
  slots_ = std::make_unique<std::counting_semaphore<1024>>(slots);
}

ChatClient::~ChatClient() = default;

ChatRequest ChatClient::make_request(std::string prompt) const {
  return {opts_.model, std::move(prompt), opts_.temperature, opts_.max_tokens};
}

std::uint64_t ChatClient::attempts() const noexcept { return attempts_.load(); }

ChatResponse ChatClient::complete(const ChatRequest& request) {
  const std::string body = request.to_json().dump();
  httplib::Headers headers;
  if (!opts_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= opts_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(opts_.backoff * (1 << std::min(attempt - 1, 16)));
    httplib::Result res;
    {
      slots_->acquire();
      struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
      } release{*slots_};
      httplib::Client cli(origin_);
      cli.set_connection_timeout(opts_.timeout);
      cli.set_read_timeout(opts_.timeout);
      cli.set_write_timeout(opts_.timeout);
      ++attempts_;
      res = cli.Post(path_, headers, body, "application/json");
    }
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw_io("chat endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    try {
      Json j = Json::parse(res->body);
      const Json& choice = j.at("choices").at(0);
      ChatResponse r;
      r.text = choice.at("message").at("content").get<std::string>();
      if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
        r.finish_reason = choice["finish_reason"].get<std::string>();
      }
      if (j.contains("usage") && j["usage"].is_object()) {
        r.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
        r.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
      }
      return r;
    } catch (const nlohmann::json::exception& e) {
      throw_data(std::string("malformed chat response: ") + e.what());
    }
  }
  throw_io("chat request failed after " + std::to_string(opts_.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace absorb::qagen
