#pragma once

#include <httplib.h>

#include <memory>
#include <string>

#include "tumorboard/llm/gateway.hpp"

namespace tumorboard::llm {

class HttplibTransport : public Transport {
 public:
  HttplibTransport(std::string base_url, int timeout_ms) : client_(base_url) {
    client_.set_connection_timeout(0, timeout_ms * 1000);
    client_.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    client_.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  }

  TransportReply post(const std::string& path, const std::vector<Header>& headers,
                      const std::string& body) override {
    httplib::Headers hs;
    std::string content_type = "application/json";
    for (const auto& [k, v] : headers) {
      if (k == "Content-Type") content_type = v;
      else hs.emplace(k, v);
    }
    auto res = client_.Post(path, hs, body, content_type);
    if (!res) return TransportReply{0, "", httplib::to_string(res.error())};
    return TransportReply{res->status, res->body, ""};
  }

 private:
  httplib::Client client_;
};

inline std::shared_ptr<Transport> make_http_transport(const GatewayConfig& cfg) {
  return std::make_shared<HttplibTransport>(cfg.base_url, cfg.timeout_ms);
}

}  // namespace tumorboard::llm
