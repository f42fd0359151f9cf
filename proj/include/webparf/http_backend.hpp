#pragma once

// Live HTTP fetch backend on top of cpp-httplib. Plain http out of the box;
// define CPPHTTPLIB_OPENSSL_SUPPORT (and link OpenSSL) before including this
// header to enable https.

#include <chrono>
#include <memory>
#include <string>

#include <httplib.h>

#include "webparf/fetcher.hpp"
#include "webparf/url.hpp"

namespace webparf {

inline constexpr const char* kUserAgent = "webparf/0.1";

class HttpBackend : public FetchBackend {
 public:
  explicit HttpBackend(std::chrono::seconds timeout = std::chrono::seconds(10))
      : timeout_(timeout) {}

  FetchResult fetch(const CanonicalUrl& url) override {
    FetchResult result;
    result.url = url;

    std::string origin = url.scheme + "://" + url.host;
    if (url.port) origin += ":" + std::to_string(*url.port);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url.scheme == "https") return result;  // transport failure without TLS
#endif
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_.count(), 0);
    client.set_read_timeout(timeout_.count(), 0);
    client.set_follow_location(false);
    client.set_default_headers({{"User-Agent", kUserAgent}});

    std::string target = url.path;
    if (url.query) target += "?" + *url.query;

    auto response = client.Get(target);
    if (!response) return result;  // status stays at the transport sentinel
    result.status = response->status;
    if (response->status == 200) result.body = response->body;
    if (response->has_header("Content-Type"))
      result.content_type = response->get_header_value("Content-Type");
    return result;
  }

 private:
  std::chrono::seconds timeout_;
};

}  // namespace webparf
