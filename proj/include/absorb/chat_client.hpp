#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <semaphore>
#include <string>

#include "absorb/jsonio.hpp"

namespace absorb::qagen {

struct ChatRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 1024;

  Json to_json() const;
};

struct ChatResponse {
  std::string text;  // verbatim
  std::string finish_reason;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  Json to_json() const;
  static ChatResponse from_json(const Json& j);
};

struct ChatOptions {
  // Full endpoint URL; a bare host gets /v1/chat/completions.
  std::string url;
  std::string api_key;
  std::string model = "gpt-4";
  double temperature = 0.0;
  int max_tokens = 1024;
  int max_in_flight = 4;
  int max_retries = 4;
  std::chrono::milliseconds backoff{500};
  std::chrono::seconds timeout{120};
};

// OpenAI-style chat-completion client. Safe to share between threads; at
// most max_in_flight requests are outstanding at once. Transient failures
// (connection errors, 429, 5xx) are retried with exponential backoff.
class ChatClient {
 public:
  explicit ChatClient(ChatOptions options);
  ~ChatClient();

  ChatRequest make_request(std::string prompt) const;
  ChatResponse complete(const ChatRequest& request);

  /// Requests actually sent over the wire, retries included.
  std::uint64_t attempts() const noexcept;

 private:
  ChatOptions opts_;
  std::string origin_;
  std::string path_;
  std::unique_ptr<std::counting_semaphore<1024>> slots_;
  std::atomic<std::uint64_t> attempts_{0};
};

}  // namespace absorb::qagen
