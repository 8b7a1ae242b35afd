#include <catch2/catch_amalgamated.hpp>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <memory>
#include <thread>

#include "support/fixtures.hpp"
#include "support/scripted_model.hpp"
#include "tumorboard/llm/gateway.hpp"
#include "tumorboard/llm/http_transport.hpp"

using namespace tumorboard;
using namespace tumorboard::llm;

namespace {

ChatRequest sample_request() {
  ChatRequest r;
  r.model_id = "generation-model";
  r.temperature = 0.0;
  r.messages.push_back(ChatMessage::system("You are concise."));
  r.messages.push_back(ChatMessage::user("Summarize the chart."));
  return r;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("canonical digest: stable for equal requests, sensitive to content") {
  ChatRequest a = sample_request();
  ChatRequest b = sample_request();
  CHECK(canonical_digest(a) == canonical_digest(b));
  CHECK(canonical_digest(a).size() == 64);  // sha-256 hex

  // Round-tripping through differently ordered JSON text does not move the digest.
  nlohmann::json canon = canonical_request_json(a);
  std::string reordered = "{\"temperature\":0.0,\"model_id\":\"generation-model\",\"messages\":" +
                          canon["messages"].dump() + "}";
  CHECK(nlohmann::json::parse(reordered).dump() == canon.dump());

  ChatRequest changed = sample_request();
  changed.messages[1].content += "!";
  CHECK(canonical_digest(changed) != canonical_digest(a));

  ChatRequest warm = sample_request();
  warm.temperature = 0.7;
  CHECK(canonical_digest(warm) != canonical_digest(a));

  ChatRequest unset = sample_request();
  unset.temperature.reset();
  CHECK(canonical_digest(unset) != canonical_digest(a));

  ChatRequest effort = sample_request();
  effort.reasoning_effort = ReasoningEffort::Medium;
  CHECK(canonical_digest(effort) != canonical_digest(a));
}

TEST_CASE("replay: recorded response comes back verbatim; unseen requests miss") {
  auto dir = fresh_dir("tb-gw-replay");
  auto store = std::make_shared<TranscriptStore>(dir);

  ChatRequest request = sample_request();
  ChatResponse response;
  response.content = "ID: [X] 65M\n\nBiomarkers/NGS: none\n\nPrior therapy: none";
  response.tool_calls.push_back(ToolCall{"call_1", "store_summary", {{"summary", "s"}}});
  response.finish_reason = "tool_calls";
  tbtest::stage_transcript(*store, request, response);

  GatewayConfig gc;
  gc.mode = GatewayMode::Replay;
  Gateway gateway(gc, store);

  auto completion = gateway.complete(request);
  CHECK(completion.replayed);
  CHECK(completion.response.content == response.content);
  REQUIRE(completion.response.tool_calls.size() == 1);
  CHECK(completion.response.tool_calls[0].name == "store_summary");
  CHECK(completion.response.finish_reason == "tool_calls");

  ChatRequest unseen = sample_request();
  unseen.messages[1].content = "something never recorded";
  try {
    gateway.complete(unseen);
    FAIL("expected ReplayMiss");
  } catch (const ReplayMiss& miss) {
    CHECK(miss.request_digest == canonical_digest(unseen));
    CHECK(std::string(miss.what()).find(miss.request_digest) != std::string::npos);
  }
}

TEST_CASE("live: transient statuses retried with bounded attempts") {
  int calls = 0;
  auto transport = std::make_shared<tbtest::LambdaTransport>([&](const std::string&) {
    ++calls;
    if (calls <= 2) return TransportReply{429, "slow down", ""};
    return tbtest::ok_chat_reply("done");
  });
  GatewayConfig gc;
  gc.mode = GatewayMode::Live;
  gc.base_delay_ms = 0;
  Gateway gateway(gc, nullptr, transport);

  auto completion = gateway.complete(sample_request());
  CHECK(completion.attempts == 3);
  CHECK(calls == 3);
  CHECK(completion.response.content == "done");
}

TEST_CASE("live: non-transient 4xx fails immediately; exhausted retries surface status") {
  int calls = 0;
  auto bad_request = std::make_shared<tbtest::LambdaTransport>([&](const std::string&) {
    ++calls;
    return TransportReply{400, "bad", ""};
  });
  GatewayConfig gc;
  gc.mode = GatewayMode::Live;
  gc.base_delay_ms = 0;
  Gateway gateway(gc, nullptr, bad_request);
  try {
    gateway.complete(sample_request());
    FAIL("expected UpstreamError");
  } catch (const UpstreamError& e) {
    CHECK(e.status == 400);
    CHECK(e.attempts == 1);
  }
  CHECK(calls == 1);

  calls = 0;
  auto always_503 = std::make_shared<tbtest::LambdaTransport>([&](const std::string&) {
    ++calls;
    return TransportReply{503, "down", ""};
  });
  Gateway retrying(gc, nullptr, always_503);
  try {
    retrying.complete(sample_request());
    FAIL("expected UpstreamError");
  } catch (const UpstreamError& e) {
    CHECK(e.status == 503);
    CHECK(e.attempts == 3);
  }
  CHECK(calls == 3);

  auto dead = std::make_shared<tbtest::LambdaTransport>(
      [&](const std::string&) { return TransportReply{0, "", "connection refused"}; });
  Gateway unreachable(gc, nullptr, dead);
  CHECK_THROWS_AS(unreachable.complete(sample_request()), TimeoutError);
}

TEST_CASE("record: exchange persisted once, then replayable") {
  auto dir = fresh_dir("tb-gw-record");
  auto store = std::make_shared<TranscriptStore>(dir);
  int calls = 0;
  auto transport = std::make_shared<tbtest::LambdaTransport>([&](const std::string&) {
    ++calls;
    return tbtest::ok_chat_reply("recorded answer");
  });
  GatewayConfig gc;
  gc.mode = GatewayMode::Record;
  gc.base_delay_ms = 0;
  Gateway recorder(gc, store, transport);

  ChatRequest request = sample_request();
  auto first = recorder.complete(request);
  CHECK_FALSE(first.replayed);
  CHECK(calls == 1);
  REQUIRE(store->get(first.request_digest).has_value());

  GatewayConfig replay_cfg;
  replay_cfg.mode = GatewayMode::Replay;
  Gateway replayer(replay_cfg, store);
  auto replayed = replayer.complete(request);
  CHECK(replayed.replayed);
  CHECK(replayed.response.content == "recorded answer");
}

TEST_CASE("live over HTTP: a scripted endpoint with two 429s then 200") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (req.get_header_value("Authorization") != "Bearer test-secret") {
      res.status = 401;
      return;
    }
    int n = ++hits;
    if (n <= 2) {
      res.status = 429;
      res.set_content("busy", "text/plain");
      return;
    }
    nlohmann::json body{{"choices",
                         nlohmann::json::array({nlohmann::json{
                             {"message", {{"role", "assistant"}, {"content", "hello from http"}}},
                             {"finish_reason", "stop"}}})}};
    res.set_content(body.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  GatewayConfig gc;
  gc.mode = GatewayMode::Live;
  gc.base_url = "http://127.0.0.1:" + std::to_string(port);
  gc.base_delay_ms = 1;
  gc.auth_secret = "test-secret";
  Gateway gateway(gc, nullptr, make_http_transport(gc));
  auto completion = gateway.complete(sample_request());
  CHECK(completion.attempts == 3);
  CHECK(completion.response.content == "hello from http");

  server.stop();
  server_thread.join();
}
