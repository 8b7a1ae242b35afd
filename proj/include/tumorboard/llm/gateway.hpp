#pragma once

// Uniform chat-completion access in three modes:
//   live   — one HTTP JSON exchange against the configured endpoint
//   record — live, plus the exchange is persisted as a transcript
//   replay — responses are served from persisted transcripts by request digest
// Pipelines and the judge only ever see this interface, so a whole run can be
// replayed byte-deterministically from a transcript directory.

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tumorboard/util/digest.hpp"
#include "tumorboard/util/fs.hpp"
#include "tumorboard/util/rng.hpp"

namespace tumorboard::llm {

enum class Role { System, User, Assistant, Tool };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  throw std::logic_error("unknown role");
}

inline Role role_from_string(const std::string& s) {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "assistant") return Role::Assistant;
  if (s == "tool") return Role::Tool;
  throw std::invalid_argument("unknown role: " + s);
}

struct ToolCall {
  std::string id;
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();
};

struct ChatMessage {
  Role role = Role::User;
  std::string content;
  std::vector<ToolCall> tool_calls;        // assistant messages only
  std::optional<std::string> tool_call_id; // tool messages only
  std::optional<std::string> name;         // tool messages only

  static ChatMessage system(std::string text) { return {Role::System, std::move(text), {}, {}, {}}; }
  static ChatMessage user(std::string text) { return {Role::User, std::move(text), {}, {}, {}}; }
  static ChatMessage assistant(std::string text) { return {Role::Assistant, std::move(text), {}, {}, {}}; }
  static ChatMessage assistant_tool_calls(std::vector<ToolCall> calls) {
    return {Role::Assistant, "", std::move(calls), {}, {}};
  }
  static ChatMessage tool_result(std::string call_id, std::string tool_name, std::string result) {
    return {Role::Tool, std::move(result), {}, std::move(call_id), std::move(tool_name)};
  }
};

enum class ReasoningEffort { Low, Medium, High };

inline const char* to_string(ReasoningEffort e) {
  switch (e) {
    case ReasoningEffort::Low: return "low";
    case ReasoningEffort::Medium: return "medium";
    case ReasoningEffort::High: return "high";
  }
  throw std::logic_error("unknown reasoning effort");
}

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  std::optional<double> temperature;  // generation pipelines pin this to 0
  std::optional<int> max_output_tokens;
  std::optional<ReasoningEffort> reasoning_effort;
  std::optional<nlohmann::json> tools;  // tool schema list, passed through
};

struct ChatResponse {
  std::string content;
  std::vector<ToolCall> tool_calls;
  std::string finish_reason = "stop";
};

inline nlohmann::json tool_call_to_json(const ToolCall& c) {
  return nlohmann::json{{"id", c.id}, {"name", c.name}, {"arguments", c.arguments}};
}

inline ToolCall tool_call_from_json(const nlohmann::json& j) {
  ToolCall c;
  c.id = j.value("id", std::string{});
  c.name = j.at("name").get<std::string>();
  c.arguments = j.value("arguments", nlohmann::json::object());
  return c;
}

inline nlohmann::json message_to_json(const ChatMessage& m) {
  nlohmann::json j{{"role", to_string(m.role)}, {"content", m.content}};
  if (!m.tool_calls.empty()) {
    nlohmann::json calls = nlohmann::json::array();
    for (const auto& c : m.tool_calls) calls.push_back(tool_call_to_json(c));
    j["tool_calls"] = calls;
  }
  if (m.tool_call_id) j["tool_call_id"] = *m.tool_call_id;
  if (m.name) j["name"] = *m.name;
  return j;
}

// Canonical JSON for a request: keys are emitted in sorted order and absent
// optionals are omitted entirely, so two serializations of the same request
// always collapse to the same bytes.
inline nlohmann::json canonical_request_json(const ChatRequest& r) {
  nlohmann::json j;
  j["model_id"] = r.model_id;
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : r.messages) msgs.push_back(message_to_json(m));
  j["messages"] = msgs;
  if (r.temperature) j["temperature"] = *r.temperature;
  if (r.max_output_tokens) j["max_output_tokens"] = *r.max_output_tokens;
  if (r.reasoning_effort) j["reasoning_effort"] = to_string(*r.reasoning_effort);
  if (r.tools) j["tools"] = *r.tools;
  return j;
}

inline std::string canonical_digest(const ChatRequest& r) {
  return digest::sha256_hex(canonical_request_json(r).dump());
}

inline nlohmann::json response_to_json(const ChatResponse& r) {
  nlohmann::json calls = nlohmann::json::array();
  for (const auto& c : r.tool_calls) calls.push_back(tool_call_to_json(c));
  return nlohmann::json{
      {"content", r.content}, {"tool_calls", calls}, {"finish_reason", r.finish_reason}};
}

inline ChatResponse response_from_json(const nlohmann::json& j) {
  ChatResponse r;
  r.content = j.value("content", std::string{});
  if (j.contains("tool_calls"))
    for (const auto& c : j["tool_calls"]) r.tool_calls.push_back(tool_call_from_json(c));
  r.finish_reason = j.value("finish_reason", std::string{"stop"});
  return r;
}

// ---------------------------------------------------------------------------
// Transcript store: append-only directory of JSON records keyed by digest.

inline constexpr int kTranscriptSchemaVersion = 1;

struct TranscriptRecord {
  std::string request_digest;
  nlohmann::json request;   // canonical request JSON
  nlohmann::json response;  // ChatResponse JSON
  double latency_ms = 0;
  std::string created_at;
};

class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  std::optional<TranscriptRecord> get(const std::string& digest) const {
    auto path = dir_ / (digest + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    nlohmann::json j = nlohmann::json::parse(fs::read_file(path));
    TranscriptRecord rec;
    rec.request_digest = j.at("request_digest").get<std::string>();
    rec.request = j.at("request");
    rec.response = j.at("response");
    rec.latency_ms = j.value("latency_ms", 0.0);
    rec.created_at = j.value("created_at", std::string{});
    return rec;
  }

  void put(const TranscriptRecord& rec) const {
    auto path = dir_ / (rec.request_digest + ".json");
    if (std::filesystem::exists(path)) return;  // append-only, first write wins
    nlohmann::json j{{"schema_version", kTranscriptSchemaVersion},
                     {"request_digest", rec.request_digest},
                     {"request", rec.request},
                     {"response", rec.response},
                     {"latency_ms", rec.latency_ms},
                     {"created_at", rec.created_at}};
    fs::write_file(path, j.dump(2) + "\n");
  }

 private:
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Transport seam: live/record modes post the wire JSON through this interface,
// which keeps the retry policy testable without a network.

struct TransportReply {
  int status = 0;
  std::string body;
  std::string error;  // nonempty = transport-level failure (connect/timeout)
};

using Header = std::pair<std::string, std::string>;

class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportReply post(const std::string& path, const std::vector<Header>& headers,
                              const std::string& body) = 0;
};

struct GatewayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReplayMiss : GatewayError {
  explicit ReplayMiss(const std::string& digest)
      : GatewayError("no transcript recorded for request digest " + digest), request_digest(digest) {}
  std::string request_digest;
};

struct UpstreamError : GatewayError {
  UpstreamError(int status_, int attempts_, const std::string& detail)
      : GatewayError("upstream error status " + std::to_string(status_) + " after " +
                     std::to_string(attempts_) + " attempt(s): " + detail),
        status(status_),
        attempts(attempts_) {}
  int status;
  int attempts;
};

struct TimeoutError : GatewayError {
  explicit TimeoutError(int attempts_)
      : GatewayError("transport failed after " + std::to_string(attempts_) + " attempt(s)"),
        attempts(attempts_) {}
  int attempts;
};

enum class GatewayMode { Live, Record, Replay };

inline GatewayMode mode_from_string(const std::string& s) {
  if (s == "live") return GatewayMode::Live;
  if (s == "record") return GatewayMode::Record;
  if (s == "replay") return GatewayMode::Replay;
  throw std::invalid_argument("unknown gateway mode: " + s);
}

inline const char* to_string(GatewayMode m) {
  switch (m) {
    case GatewayMode::Live: return "live";
    case GatewayMode::Record: return "record";
    case GatewayMode::Replay: return "replay";
  }
  throw std::logic_error("unknown gateway mode");
}

struct GatewayConfig {
  GatewayMode mode = GatewayMode::Replay;
  std::string base_url;                      // live/record only
  std::string path = "/v1/chat/completions";
  std::string auth_header = "Authorization";
  std::string auth_prefix = "Bearer ";
  std::string auth_secret;                   // resolved by the caller (env var)
  int max_attempts = 3;
  int base_delay_ms = 200;                   // exponential backoff base, jittered
  int timeout_ms = 120000;
  int in_flight_cap = 4;                     // <= 0: unlimited
  int per_minute_budget = 0;                 // <= 0: unlimited
};

struct Completion {
  ChatResponse response;
  std::string request_digest;
  int attempts = 0;      // HTTP attempts; 0 when replayed
  bool replayed = false;
};

namespace wire {

// Common chat-completions request shape.
inline nlohmann::json to_wire(const ChatRequest& r) {
  nlohmann::json j;
  j["model"] = r.model_id;
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : r.messages) {
    nlohmann::json jm{{"role", to_string(m.role)}};
    jm["content"] = m.content;
    if (!m.tool_calls.empty()) {
      nlohmann::json calls = nlohmann::json::array();
      for (const auto& c : m.tool_calls) {
        calls.push_back(nlohmann::json{
            {"id", c.id},
            {"type", "function"},
            {"function", {{"name", c.name}, {"arguments", c.arguments.dump()}}}});
      }
      jm["tool_calls"] = calls;
    }
    if (m.tool_call_id) jm["tool_call_id"] = *m.tool_call_id;
    if (m.name) jm["name"] = *m.name;
    msgs.push_back(jm);
  }
  j["messages"] = msgs;
  if (r.temperature) j["temperature"] = *r.temperature;
  if (r.max_output_tokens) j["max_tokens"] = *r.max_output_tokens;
  if (r.reasoning_effort) j["reasoning_effort"] = to_string(*r.reasoning_effort);
  if (r.tools) j["tools"] = *r.tools;
  return j;
}

inline ChatResponse from_wire(const nlohmann::json& j) {
  const auto& choice = j.at("choices").at(0);
  const auto& message = choice.at("message");
  ChatResponse r;
  if (message.contains("content") && !message["content"].is_null())
    r.content = message["content"].get<std::string>();
  if (message.contains("tool_calls")) {
    for (const auto& c : message["tool_calls"]) {
      ToolCall call;
      call.id = c.value("id", std::string{});
      call.name = c.at("function").at("name").get<std::string>();
      std::string args = c.at("function").value("arguments", std::string{"{}"});
      call.arguments = args.empty() ? nlohmann::json::object() : nlohmann::json::parse(args);
      r.tool_calls.push_back(std::move(call));
    }
  }
  r.finish_reason = choice.value("finish_reason", std::string{"stop"});
  return r;
}

}  // namespace wire

class Gateway {
 public:
  Gateway(GatewayConfig config, std::shared_ptr<TranscriptStore> store,
          std::shared_ptr<Transport> transport = nullptr)
      : config_(std::move(config)), store_(std::move(store)), transport_(std::move(transport)) {
    if (config_.mode != GatewayMode::Replay && transport_ == nullptr)
      throw std::invalid_argument("live/record gateway requires a transport");
    if (config_.mode != GatewayMode::Live && store_ == nullptr)
      throw std::invalid_argument("record/replay gateway requires a transcript store");
  }

  const GatewayConfig& config() const { return config_; }

  Completion complete(const ChatRequest& request) {
    if (request.messages.empty()) throw std::invalid_argument("chat request needs >= 1 message");
    std::string req_digest = canonical_digest(request);
    if (config_.mode == GatewayMode::Replay) {
      auto rec = store_->get(req_digest);
      if (!rec) throw ReplayMiss(req_digest);
      return Completion{response_from_json(rec->response), req_digest, 0, true};
    }

    Throttle throttle(*this);
    auto started = std::chrono::steady_clock::now();
    int attempts = 0;
    TransportReply reply;
    while (true) {
      ++attempts;
      reply = transport_->post(config_.path, auth_headers(), wire::to_wire(request).dump());
      bool transient = !reply.error.empty() || reply.status == 429 || reply.status >= 500;
      if (reply.error.empty() && reply.status >= 200 && reply.status < 300) break;
      if (!transient || attempts >= config_.max_attempts) {
        if (!reply.error.empty()) throw TimeoutError(attempts);
        throw UpstreamError(reply.status, attempts, reply.body.substr(0, 200));
      }
      backoff(attempts);
    }
    double latency_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - started).count();

    ChatResponse response = wire::from_wire(nlohmann::json::parse(reply.body));
    if (config_.mode == GatewayMode::Record) {
      TranscriptRecord rec;
      rec.request_digest = req_digest;
      rec.request = canonical_request_json(request);
      rec.response = response_to_json(response);
      rec.latency_ms = latency_ms;
      rec.created_at = now_iso8601();
      store_->put(rec);
    }
    return Completion{std::move(response), req_digest, attempts, false};
  }

 private:
  struct ThrottleState {
    std::mutex mutex;
    std::condition_variable cv;
    int in_flight = 0;
    std::deque<std::chrono::steady_clock::time_point> request_times;
  };

  // Scoped in-flight cap + per-minute budget; live/record only.
  struct Throttle {
    explicit Throttle(Gateway& g) : state(*g.throttle_), cap(g.config_.in_flight_cap),
                                    budget(g.config_.per_minute_budget) {
      std::unique_lock lock(state.mutex);
      if (cap > 0) state.cv.wait(lock, [&] { return state.in_flight < cap; });
      ++state.in_flight;
      if (budget <= 0) return;
      auto now = std::chrono::steady_clock::now();
      auto& window = state.request_times;
      while (!window.empty() && now - window.front() > std::chrono::seconds(60)) window.pop_front();
      if (static_cast<int>(window.size()) >= budget) {
        auto wake = window.front() + std::chrono::seconds(60);
        lock.unlock();
        std::this_thread::sleep_until(wake);
        lock.lock();
      }
      window.push_back(std::chrono::steady_clock::now());
    }
    ~Throttle() {
      {
        std::lock_guard lock(state.mutex);
        --state.in_flight;
      }
      state.cv.notify_one();
    }
    ThrottleState& state;
    int cap;
    int budget;
  };

  std::vector<Header> auth_headers() const {
    std::vector<Header> headers{{"Content-Type", "application/json"}};
    if (!config_.auth_secret.empty())
      headers.emplace_back(config_.auth_header, config_.auth_prefix + config_.auth_secret);
    return headers;
  }

  void backoff(int attempt) {
    if (config_.base_delay_ms <= 0) return;
    double factor = static_cast<double>(1 << (attempt - 1));
    thread_local rng::Prng jitter(
        static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
    double ms = config_.base_delay_ms * factor * (0.5 + 0.5 * jitter.uniform());
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
  }

  static std::string now_iso8601() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  GatewayConfig config_;
  std::shared_ptr<TranscriptStore> store_;
  std::shared_ptr<Transport> transport_;
  // boxed so the gateway stays movable
  std::unique_ptr<ThrottleState> throttle_ = std::make_unique<ThrottleState>();
};

}  // namespace tumorboard::llm
