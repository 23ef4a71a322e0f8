#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace facts::http {

struct Url {
    std::string scheme;       // lowercase
    std::string origin;       // scheme://host[:port]
    std::string path;         // path plus query, at least "/"
};

/// Splits an absolute http(s) URL; nullopt when it is not one.
std::optional<Url> parse_url(std::string_view text);

struct Response {
    int status = 0;           // 0 when the request never completed
    std::string body;
    std::string error;        // transport error description when status == 0
};

Response get(const Url& url, std::chrono::seconds timeout);
Response post_json(const Url& url, const std::string& body, std::chrono::seconds timeout);

}  // namespace facts::http
